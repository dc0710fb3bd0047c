#include "increvise/lexicon.hpp"

#include <algorithm>
#include <set>

#include "increvise/sexpr.hpp"

namespace increvise {

const LexEntry* Lexicon::find(std::string_view lemma) const {
  auto it = entries_.find(lemma);
  return it == entries_.end() ? nullptr : &it->second;
}

void Lexicon::add(LexEntry entry) {
  if (lang_.empty()) lang_ = entry.lang;
  entries_[entry.lemma] = std::move(entry);
}

namespace {

// True when every pair of `key` is present in `features` with equal value.
bool key_subsumed(const FeatureMap& key, const FeatureMap& features) {
  for (const auto& [f, v] : key) {
    auto got = features.get(f);
    if (!got || *got != v) return false;
  }
  return true;
}

// True when the key does not contradict `features` (each key feature is
// either matched or still unspecified).
bool key_compatible(const FeatureMap& key, const FeatureMap& features) {
  for (const auto& [f, v] : key) {
    auto got = features.get(f);
    if (got && *got != v) return false;
  }
  return true;
}

ComplementSlot parse_slot(const Sexpr& node) {
  ComplementSlot slot;
  slot.gram_function = node.atom_at(1, "grammatical function");
  for (size_t i = 2; i < node.size(); ++i) {
    const Sexpr& part = node.at(i);
    if (!part.is_list() || part.size() != 2) {
      throw ParseError("expected (CASE|SEM|POS|PREP value)", part.line);
    }
    const std::string& tag = part.atom_at(0, "slot field");
    if (tag == "CASE") {
      const std::string& v = part.atom_at(1, "case");
      if (!value_allowed(Feature::Case, v)) throw ParseError("unknown case `" + v + "`", part.line);
      slot.case_assigned = v;
    } else if (tag == "SEM") {
      const std::string& v = part.atom_at(1, "semantic function");
      if (!value_allowed(Feature::Function, v)) {
        throw ParseError("unknown semantic function `" + v + "`", part.line);
      }
      slot.sem_function = v;
    } else if (tag == "POS") {
      slot.position_rank = std::stoi(part.atom_at(1, "position"));
    } else if (tag == "PREP") {
      const Sexpr& v = part.at(1);
      slot.prep = v.text;
    } else {
      throw ParseError("unknown slot field `" + tag + "`", part.line);
    }
  }
  if (slot.sem_function.empty()) throw ParseError("slot lacks (SEM ...)", node.line);
  if (slot.position_rank <= 0) throw ParseError("slot lacks (POS ...)", node.line);
  return slot;
}

ParadigmRow parse_form_row(const Sexpr& node) {
  if (!node.is_list() || node.size() < 1) {
    throw ParseError("expected ((FEATURE value)... \"form\")", node.line);
  }
  ParadigmRow row;
  const Sexpr& last = node.at(node.size() - 1);
  if (!last.is_string()) throw ParseError("paradigm row must end with a quoted form", node.line);
  row.form = last.text;
  for (size_t i = 0; i + 1 < node.size(); ++i) {
    const Sexpr& pair = node.at(i);
    if (!pair.is_list() || pair.size() != 2) {
      throw ParseError("expected (FEATURE value) in paradigm key", pair.line);
    }
    const std::string& fname = pair.atom_at(0, "feature");
    auto feature = feature_from_name(fname);
    if (!feature) throw ParseError("unknown feature `" + fname + "`", pair.line);
    try {
      row.key.set(*feature, pair.atom_at(1, "value"));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), pair.line);
    }
  }
  return row;
}

void validate_entry(const LexEntry& entry, int line) {
  std::set<std::string> functions;
  std::set<int> positions;
  for (const auto& slot : entry.subcat) {
    if (!functions.insert(slot.gram_function).second) {
      throw ParseError("duplicate grammatical function `" + slot.gram_function + "` in frame",
                       line);
    }
    if (!positions.insert(slot.position_rank).second) {
      throw ParseError("duplicate position rank in frame for `" + entry.lemma + "`", line);
    }
    if (slot.position_rank == 2) {
      throw ParseError("position 2 is reserved for the verb itself", line);
    }
    if (entry.lang == "de" && slot.gram_function == "subject" &&
        slot.case_assigned != std::optional<std::string>("nom")) {
      throw ParseError("German subject slot must assign nom", line);
    }
  }
  // No two rows may share a key; equal-size keys that can match the same
  // feature bundle would make the most-specific lookup ambiguous.
  for (size_t i = 0; i < entry.paradigm.size(); ++i) {
    for (size_t j = i + 1; j < entry.paradigm.size(); ++j) {
      const auto& a = entry.paradigm[i].key;
      const auto& b = entry.paradigm[j].key;
      if (a == b) {
        throw ParseError("duplicate paradigm key in `" + entry.lemma + "`", line);
      }
    }
  }
}

LexEntry parse_entry(const Sexpr& node) {
  LexEntry entry;
  entry.lemma = node.atom_at(1, "lemma");
  for (size_t i = 2; i < node.size(); ++i) {
    const Sexpr& part = node.at(i);
    if (!part.is_list() || part.size() < 1) throw ParseError("expected (TAG ...)", part.line);
    const std::string& tag = part.atom_at(0, "entry field");
    if (tag == "CAT") {
      const std::string& v = part.atom_at(1, "category");
      if (!value_allowed(Feature::Cat, v)) throw ParseError("unknown category `" + v + "`", part.line);
      entry.cat = v;
    } else if (tag == "LANG") {
      entry.lang = part.atom_at(1, "language");
    } else if (tag == "ART") {
      entry.article = part.atom_at(1, "article lemma");
    } else if (tag == "SUBCAT") {
      for (size_t s = 1; s < part.size(); ++s) {
        const Sexpr& slot = part.at(s);
        if (!slot.is_list() || slot.size() < 2 || slot.atom_at(0, "slot") != "SLOT") {
          throw ParseError("expected (SLOT ...)", slot.line);
        }
        entry.subcat.push_back(parse_slot(slot));
      }
    } else if (tag == "FORMS") {
      for (size_t r = 1; r < part.size(); ++r) {
        entry.paradigm.push_back(parse_form_row(part.at(r)));
      }
    } else {
      throw ParseError("unknown entry field `" + tag + "`", part.line);
    }
  }
  if (entry.cat.empty()) throw ParseError("entry lacks (CAT ...)", node.line);
  if (entry.lang.empty()) throw ParseError("entry lacks (LANG ...)", node.line);
  if (entry.paradigm.empty()) throw ParseError("entry lacks (FORMS ...)", node.line);
  validate_entry(entry, node.line);
  return entry;
}

}  // namespace

Lexicon load_lexicon(const std::string& text) {
  Lexicon lexicon;
  for (const Sexpr& node : parse_sexprs(text)) {
    if (!node.is_list() || node.size() < 2 || node.atom_at(0, "entry") != "LEX") {
      throw ParseError("expected (LEX ...)", node.line);
    }
    lexicon.add(parse_entry(node));
  }
  return lexicon;
}

std::optional<std::string> inflect(const LexEntry& entry, const FeatureMap& features) {
  const ParadigmRow* best = nullptr;
  for (const auto& row : entry.paradigm) {
    if (!key_subsumed(row.key, features)) continue;
    if (!best || row.key.size() > best->key.size()) best = &row;
  }
  if (!best) return std::nullopt;
  return best->form;
}

std::vector<Feature> missing_features(const LexEntry& entry, const FeatureMap& features) {
  if (inflect(entry, features)) return {};
  std::set<Feature> missing;
  for (const auto& row : entry.paradigm) {
    if (!key_compatible(row.key, features)) continue;
    for (const auto& [f, v] : row.key) {
      if (!features.contains(f)) missing.insert(f);
    }
  }
  return {missing.begin(), missing.end()};
}

}  // namespace increvise
