#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "increvise/runner.hpp"

namespace testutil {

#ifndef INCREVISE_TEST_ASSETS
#define INCREVISE_TEST_ASSETS "assets"
#endif
#ifndef INCREVISE_TEST_DATA
#define INCREVISE_TEST_DATA "tests/data"
#endif

inline std::string assets_path(const std::string& rel) {
  return std::string(INCREVISE_TEST_ASSETS) + "/" + rel;
}

inline std::string data_path(const std::string& rel) {
  return std::string(INCREVISE_TEST_DATA) + "/" + rel;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open `" + path + "`");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline const increvise::Lexicon& lexicon_en() {
  static const increvise::Lexicon lex = increvise::load_lexicon(slurp(assets_path("lexicon/en.lex")));
  return lex;
}

inline const increvise::Lexicon& lexicon_de() {
  static const increvise::Lexicon lex = increvise::load_lexicon(slurp(assets_path("lexicon/de.lex")));
  return lex;
}

inline const increvise::RuleRegistry& core_rules() {
  static const increvise::RuleRegistry rules =
      increvise::parse_rules(slurp(assets_path("rules/core.drl")));
  return rules;
}

inline increvise::EngineConfig config(const std::string& lang, double threshold = 0.7,
                                      increvise::Tick time_limit = 200, int max_defaults = 3,
                                      double fluency = 0.0) {
  increvise::EngineConfig c;
  c.lang = lang;
  c.threshold = threshold;
  c.time_limit = time_limit;
  c.max_defaults = max_defaults;
  c.fluency = fluency;
  return c;
}

// Random feature bundles for property tests; closed-set values only.
inline increvise::FeatureMap random_features(std::mt19937& rng) {
  using increvise::Feature;
  increvise::FeatureMap fm;
  auto flip = [&](double p) {
    return std::uniform_real_distribution<double>(0, 1)(rng) < p;
  };
  auto pick = [&](Feature f) {
    const auto& vals = increvise::feature_values(f);
    std::uniform_int_distribution<size_t> d(0, vals.size() - 1);
    fm.set(f, vals[d(rng)]);
  };
  for (Feature f : increvise::all_features()) {
    if (f == Feature::Lemma) {
      if (flip(0.3)) fm.set(f, "man");
      continue;
    }
    if (flip(0.4)) pick(f);
  }
  return fm;
}

}  // namespace testutil
