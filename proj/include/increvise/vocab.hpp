#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace increvise {

// The closed feature vocabulary. LEMMA is the only open-valued feature; every
// other feature draws from a fixed value set, which keeps precondition
// matching decidable.
enum class Feature {
  Cat,
  Lemma,
  Number,
  Case,
  Voice,
  Polarity,
  Tense,
  Person,
  Function,
};

inline constexpr int kFeatureCount = 9;

std::string_view feature_name(Feature f);

// Case-insensitive lookup; returns nullopt for unknown names.
std::optional<Feature> feature_from_name(std::string_view name);

// Values of a closed feature; empty for LEMMA (open).
const std::vector<std::string>& feature_values(Feature f);

bool value_allowed(Feature f, std::string_view value);

// All features in declaration order, for deterministic iteration.
const std::vector<Feature>& all_features();

}  // namespace increvise
