#include "increvise/syntax.hpp"

#include <algorithm>

namespace increvise {

namespace {

const ComplementSlot* frame_slot_by_sem(const SyntaxStructure& v, const std::string& sem) {
  for (const auto& slot : v.frame) {
    if (slot.sem_function == sem) return &slot;
  }
  return nullptr;
}

const ComplementSlot* frame_slot_by_gf(const SyntaxStructure& v, const std::string& gf) {
  for (const auto& slot : v.frame) {
    if (slot.gram_function == gf) return &slot;
  }
  return nullptr;
}

}  // namespace

SyntaxStructure minimal_verbal_structure(const FeatureMap& spec) {
  auto cat = spec.get(Feature::Cat);
  if (!cat || *cat != "v") {
    throw EngineError("minimal verbal structure requires CAT v");
  }
  SyntaxStructure v;
  v.dummy = !spec.contains(Feature::Lemma);
  ComplementSlot subject;
  subject.gram_function = "subject";
  subject.case_assigned = "nom";
  subject.sem_function = "agent";
  subject.position_rank = 1;
  v.frame.push_back(std::move(subject));
  return v;
}

std::string required_subject_sem(const std::string& voice) {
  return voice == "passive" ? "patient" : "agent";
}

std::optional<ComplementSlot> slot_for(const SyntaxStructure& v, const std::string& voice,
                                       const std::string& sem_function, const std::string& lang) {
  if (voice != "passive") {
    const ComplementSlot* slot = frame_slot_by_sem(v, sem_function);
    if (!slot) return std::nullopt;
    return *slot;
  }
  if (sem_function == "agent") {
    const ComplementSlot* dobj = frame_slot_by_gf(v, "dir_object");
    ComplementSlot slot;
    slot.gram_function = "von_phrase";
    slot.case_assigned = "dat";
    slot.sem_function = "agent";
    slot.position_rank = dobj ? dobj->position_rank : 3;
    slot.prep = lang == "de" ? "von" : "by";
    return slot;
  }
  if (sem_function == "patient") {
    const ComplementSlot* subj = frame_slot_by_gf(v, "subject");
    if (!subj) return std::nullopt;
    ComplementSlot slot = *subj;
    slot.sem_function = "patient";
    return slot;
  }
  const ComplementSlot* slot = frame_slot_by_sem(v, sem_function);
  if (!slot || slot->gram_function == "subject" || slot->gram_function == "dir_object") {
    return std::nullopt;
  }
  return *slot;
}

bool check_case_uniqueness(const SyntaxStructure& v, const std::string& voice,
                           const std::string& lang) {
  int nom_count = 0;
  for (const auto& [sem, fill] : v.fills) {
    auto slot = slot_for(v, voice, sem, lang);
    if (slot && slot->case_assigned == std::optional<std::string>("nom")) ++nom_count;
  }
  return nom_count <= 1;
}

CombineOutcome combine(const std::string& np_obj, const FeatureMap& np_features,
                       SyntaxStructure& v, const std::string& sem_function,
                       const std::string& voice, const std::string& lang,
                       const SlotFill& fill) {
  CombineOutcome out;
  auto slot = slot_for(v, voice, sem_function, lang);
  if (!slot) {
    out.error = "no slot for semantic function `" + sem_function + "` under voice `" + voice + "`";
    return out;
  }
  if (v.fills.count(sem_function)) {
    out.error = "slot for `" + sem_function + "` already filled";
    return out;
  }
  // The same grammatical function may be reachable from two semantic
  // functions only after a voice flip; a stale fill on it blocks too.
  for (const auto& [sem, existing] : v.fills) {
    auto other = slot_for(v, voice, sem, lang);
    if (other && other->gram_function == slot->gram_function) {
      out.error = "slot `" + slot->gram_function + "` already filled";
      return out;
    }
  }
  if (slot->case_assigned) {
    auto existing = np_features.get(Feature::Case);
    if (existing && *existing != *slot->case_assigned) {
      out.error = "case `" + std::string(*existing) + "` on " + np_obj +
                  " conflicts with slot case `" + *slot->case_assigned + "`";
      return out;
    }
    if (*slot->case_assigned == "nom") {
      for (const auto& [sem, existing_fill] : v.fills) {
        auto other = slot_for(v, voice, sem, lang);
        if (other && other->case_assigned == std::optional<std::string>("nom")) {
          out.error = "nominative already assigned in this frame";
          return out;
        }
      }
    }
    out.inherited.set(Feature::Case, *slot->case_assigned);
  }
  SlotFill record = fill;
  record.filler = np_obj;
  v.fills[sem_function] = std::move(record);
  out.ok = true;
  out.position_rank = slot->position_rank;
  return out;
}

}  // namespace increvise
