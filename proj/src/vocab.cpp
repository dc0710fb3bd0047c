#include "increvise/vocab.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace increvise {

namespace {

struct FeatureSpec {
  Feature feature;
  std::string_view name;
  std::vector<std::string> values;  // empty = open
};

const std::array<FeatureSpec, kFeatureCount>& specs() {
  static const std::array<FeatureSpec, kFeatureCount> table = {{
      {Feature::Cat, "CAT", {"n", "v", "pron", "det", "p", "adv"}},
      {Feature::Lemma, "LEMMA", {}},
      {Feature::Number, "NUMBER", {"sg", "pl"}},
      {Feature::Case, "CASE", {"nom", "acc", "dat", "gen"}},
      {Feature::Voice, "VOICE", {"active", "passive"}},
      {Feature::Polarity, "POLARITY", {"pos", "neg"}},
      {Feature::Tense, "TENSE", {"pres", "past", "fut"}},
      {Feature::Person, "PERSON", {"1", "2", "3"}},
      {Feature::Function, "FUNCTION", {"agent", "patient", "theme", "goal"}},
  }};
  return table;
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

}  // namespace

std::string_view feature_name(Feature f) {
  return specs()[static_cast<size_t>(f)].name;
}

std::optional<Feature> feature_from_name(std::string_view name) {
  const std::string canon = upper(name);
  for (const auto& spec : specs()) {
    if (spec.name == canon) return spec.feature;
  }
  return std::nullopt;
}

const std::vector<std::string>& feature_values(Feature f) {
  return specs()[static_cast<size_t>(f)].values;
}

bool value_allowed(Feature f, std::string_view value) {
  const auto& vals = feature_values(f);
  if (vals.empty()) return !value.empty();
  return std::find(vals.begin(), vals.end(), value) != vals.end();
}

const std::vector<Feature>& all_features() {
  static const std::vector<Feature> order = [] {
    std::vector<Feature> v;
    for (const auto& spec : specs()) v.push_back(spec.feature);
    return v;
  }();
  return order;
}

}  // namespace increvise
