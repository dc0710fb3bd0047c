#pragma once

#include <string>
#include <variant>
#include <vector>

#include "increvise/feature_map.hpp"
#include "increvise/types.hpp"

namespace increvise {

// One precondition test, applied to a candidate object bound to `var`.
struct RuleTest {
  enum class Kind { FeatureEq, Missing, NoHeadLemma, HasHead, IsUttered };
  Kind kind = Kind::FeatureEq;
  std::string var;
  Feature feature = Feature::Cat;  // FeatureEq / Missing
  std::string value;               // FeatureEq
};

struct BodyEntity {
  std::string var;
  FeatureMap features;
};

struct BodyRelation {
  std::string rel_var;
  std::string head_var;
  std::string mod_var;
};

using BodyTemplate = std::variant<BodyEntity, BodyRelation>;

// [preconditions => body ; certainty]. The body is a list of increment
// templates over variables; variables not bound by the preconditions are
// fresh and get generated ids when the rule fires.
struct DefaultDescription {
  std::string rule_id;
  std::string lang = "any";  // de | en | any
  std::vector<RuleTest> preconditions;
  std::vector<BodyTemplate> body;
  double certainty = 0.0;
  int order = 0;  // position in the rule file; tie-break for selection
};

class RuleRegistry {
 public:
  void add(DefaultDescription rule);
  const std::vector<DefaultDescription>& rules() const { return rules_; }
  bool empty() const { return rules_.empty(); }

 private:
  std::vector<DefaultDescription> rules_;
};

// Format:
//   (DEFAULT <rule-id> [(LANG de|en)]
//     (PRE (CAT ?obj n) (MISSING NUMBER ?obj) (NO-HEAD-LEMMA ?obj) ...)
//     (BODY (ENTITY ?obj (NUMBER sg)) (RELATION ?r (HEAD ?v) (MODIFIER ?obj)))
//     (CERTAINTY 0.8))
RuleRegistry parse_rules(const std::string& text);

}  // namespace increvise
