#pragma once

#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "increvise/vocab.hpp"

namespace increvise {

// A partial assignment of features to values. An absent entry means the
// feature is unspecified (NIL); there is no explicit NIL value.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::initializer_list<std::pair<Feature, std::string>> init);

  std::optional<std::string_view> get(Feature f) const;
  bool contains(Feature f) const { return entries_.count(f) != 0; }

  // Throws std::invalid_argument when the value is outside the feature's
  // closed value set.
  void set(Feature f, std::string value);
  void unset(Feature f) { entries_.erase(f); }

  bool empty() const { return entries_.empty(); }
  size_t size() const { return entries_.size(); }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  bool operator==(const FeatureMap& other) const = default;

 private:
  std::map<Feature, std::string> entries_;
};

struct FeatureConflict {
  Feature feature;
  std::string before;
  std::string after;
  bool operator==(const FeatureConflict&) const = default;
};

struct ComposeResult {
  FeatureMap merged;
  std::set<Feature> changed;
  std::vector<FeatureConflict> conflicts;
};

// Merges an incoming package into the current one. The incoming value wins on
// conflict; the conflict itself is reported so the caller can decide whether
// it contradicts an assumption.
ComposeResult compose_entity(const FeatureMap& current, const FeatureMap& incoming);

struct FeatureDiff {
  Feature feature;
  std::optional<std::string> before;  // nullopt = NIL
  std::optional<std::string> after;
  bool operator==(const FeatureDiff&) const = default;
};

// Exact symmetric difference on effective values; empty iff the maps agree.
std::vector<FeatureDiff> diff_features(const FeatureMap& a, const FeatureMap& b);

// Union of two maps, or nullopt when some feature carries two distinct
// values. Never mutates its inputs.
std::optional<FeatureMap> unify(const FeatureMap& a, const FeatureMap& b);

}  // namespace increvise
