#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "increvise/feature_map.hpp"
#include "increvise/lexicon.hpp"
#include "increvise/types.hpp"

namespace increvise {

// Linear ranks reserved for the verb's own surface chunks. Complement slots
// use ranks 1 and 3..n.
inline constexpr int kVerbRank = 2;
inline constexpr int kVerbFinalRank = 100;

struct SlotFill {
  std::string filler;       // object id
  std::set<int> deps;       // assumption applications this fill depends on
  Tick lic = 0;             // tick of the latest fact that licensed the fill
};

// A flat verbal frame: slot definitions in their active-voice configuration
// plus fills keyed by semantic function, which keeps the fills stable when
// the voice-driven remapping changes.
struct SyntaxStructure {
  std::string root_obj;
  bool dummy = true;  // head lemma unfilled
  std::vector<ComplementSlot> frame;
  std::map<std::string, SlotFill> fills;  // sem_function -> fill
};

// Minimal structure for a verbal spec: one subject slot (nom, agent, front
// position). Throws EngineError unless the spec says CAT v.
SyntaxStructure minimal_verbal_structure(const FeatureMap& spec);

// Effective slot definition for a semantic function under a voice. Under
// passive voice the agent is remapped to a von/by phrase (dative) and the
// patient takes over the subject slot; everything else keeps its frame slot.
std::optional<ComplementSlot> slot_for(const SyntaxStructure& v, const std::string& voice,
                                       const std::string& sem_function, const std::string& lang);

// Semantic function that must fill the subject before anything after the
// front position may be uttered.
std::string required_subject_sem(const std::string& voice);

struct CombineOutcome {
  bool ok = false;
  std::string error;
  FeatureMap inherited;  // features the filler inherits from the slot (CASE)
  int position_rank = 0;
};

// Fills the slot selected by (voice, sem_function) with np_obj. On error the
// structure is left untouched; a combine can never create a second
// nominative in one frame.
CombineOutcome combine(const std::string& np_obj, const FeatureMap& np_features,
                       SyntaxStructure& v, const std::string& sem_function,
                       const std::string& voice, const std::string& lang,
                       const SlotFill& fill);

// True iff at most one filled slot carries nominative case.
bool check_case_uniqueness(const SyntaxStructure& v, const std::string& voice,
                           const std::string& lang);

}  // namespace increvise
