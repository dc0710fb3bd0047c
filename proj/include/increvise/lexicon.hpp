#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "increvise/feature_map.hpp"
#include "increvise/types.hpp"

namespace increvise {

// One complement slot of a verb frame, in its active-voice configuration.
struct ComplementSlot {
  std::string gram_function;                 // subject, dir_object, ...
  std::optional<std::string> case_assigned;  // nullopt = no case from this slot
  std::string sem_function;                  // agent, patient, theme, goal
  int position_rank = 0;                     // 1 = sentence front
  std::optional<std::string> prep;           // marker token uttered before the filler
};

struct ParadigmRow {
  FeatureMap key;
  std::string form;
};

struct LexEntry {
  std::string lemma;
  std::string cat;
  std::string lang;
  std::optional<std::string> article;  // lemma of a det entry in the same lexicon
  std::vector<ComplementSlot> subcat;
  std::vector<ParadigmRow> paradigm;
};

class Lexicon {
 public:
  const LexEntry* find(std::string_view lemma) const;
  const std::string& lang() const { return lang_; }

  void add(LexEntry entry);

 private:
  std::string lang_;
  std::map<std::string, LexEntry, std::less<>> entries_;
};

// Format, one entry per s-expression:
//   (LEX <lemma> (CAT v) (LANG de) [(ART der)]
//        (SUBCAT (SLOT subject (CASE nom) (SEM agent) (POS 1) [(PREP "von")]) ...)
//        (FORMS ((NUMBER sg) "man") ((NUMBER pl) "men") ("fixed")))
Lexicon load_lexicon(const std::string& text);

// Most specific matching paradigm row (largest key contained in `features`),
// or nullopt when no row matches.
std::optional<std::string> inflect(const LexEntry& entry, const FeatureMap& features);

// Features that would have to be filled in before some paradigm row of the
// entry can match. Empty iff inflect succeeds.
std::vector<Feature> missing_features(const LexEntry& entry, const FeatureMap& features);

}  // namespace increvise
