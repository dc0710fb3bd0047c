#include "increvise/feature_map.hpp"

#include <stdexcept>

namespace increvise {

FeatureMap::FeatureMap(std::initializer_list<std::pair<Feature, std::string>> init) {
  for (const auto& [f, v] : init) set(f, v);
}

std::optional<std::string_view> FeatureMap::get(Feature f) const {
  auto it = entries_.find(f);
  if (it == entries_.end()) return std::nullopt;
  return std::string_view(it->second);
}

void FeatureMap::set(Feature f, std::string value) {
  if (!value_allowed(f, value)) {
    throw std::invalid_argument("unknown value `" + value + "` for " +
                                std::string(feature_name(f)));
  }
  entries_[f] = std::move(value);
}

ComposeResult compose_entity(const FeatureMap& current, const FeatureMap& incoming) {
  ComposeResult result;
  result.merged = current;
  for (const auto& [f, v] : incoming) {
    auto old = result.merged.get(f);
    if (old && *old != v) {
      result.conflicts.push_back({f, std::string(*old), v});
    }
    if (!old || *old != v) {
      result.changed.insert(f);
    }
    result.merged.set(f, v);
  }
  return result;
}

std::vector<FeatureDiff> diff_features(const FeatureMap& a, const FeatureMap& b) {
  std::vector<FeatureDiff> out;
  for (Feature f : all_features()) {
    auto va = a.get(f);
    auto vb = b.get(f);
    if (va == vb) continue;
    FeatureDiff d;
    d.feature = f;
    if (va) d.before = std::string(*va);
    if (vb) d.after = std::string(*vb);
    out.push_back(std::move(d));
  }
  return out;
}

std::optional<FeatureMap> unify(const FeatureMap& a, const FeatureMap& b) {
  FeatureMap merged = a;
  for (const auto& [f, v] : b) {
    auto old = merged.get(f);
    if (old && *old != v) return std::nullopt;
    merged.set(f, v);
  }
  return merged;
}

}  // namespace increvise
