#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "increvise/lexicon.hpp"

using namespace increvise;
using testutil::lexicon_de;
using testutil::lexicon_en;

TEST_CASE("number paradigm: man/men") {
  const LexEntry* man = lexicon_en().find("man");
  REQUIRE(man);
  CHECK(inflect(*man, FeatureMap{{Feature::Number, "sg"}}) == "man");
  CHECK(inflect(*man, FeatureMap{{Feature::Number, "pl"}}) == "men");
}

TEST_CASE("participle row matches under passive voice") {
  const LexEntry* entry = lexicon_de().find("wünschen");
  REQUIRE(entry);
  CHECK(inflect(*entry, FeatureMap{{Feature::Voice, "passive"}}) == "gewünscht");
  CHECK(inflect(*entry, FeatureMap{{Feature::Voice, "active"}, {Feature::Number, "sg"}}) ==
        "wünscht");
}

TEST_CASE("missing features surface instead of a form") {
  const LexEntry* man = lexicon_en().find("man");
  REQUIRE(man);
  CHECK_FALSE(inflect(*man, FeatureMap{}));
  CHECK(missing_features(*man, FeatureMap{}) == std::vector<Feature>{Feature::Number});
}

TEST_CASE("most specific key wins") {
  const LexEntry* besucher = lexicon_de().find("Besucher");
  REQUIRE(besucher);
  CHECK(inflect(*besucher, FeatureMap{{Feature::Number, "pl"}, {Feature::Case, "dat"}}) ==
        "Besuchern");
  CHECK(inflect(*besucher, FeatureMap{{Feature::Number, "pl"}, {Feature::Case, "nom"}}) ==
        "Besucher");
}

TEST_CASE("article paradigm agrees in case and number") {
  const LexEntry* der = lexicon_de().find("der");
  REQUIRE(der);
  CHECK(inflect(*der, FeatureMap{{Feature::Case, "nom"}, {Feature::Number, "sg"}}) == "der");
  CHECK(inflect(*der, FeatureMap{{Feature::Case, "dat"}, {Feature::Number, "sg"}}) == "dem");
  CHECK(inflect(*der, FeatureMap{{Feature::Case, "acc"}, {Feature::Number, "sg"}}) == "den");
}

TEST_CASE("duplicate paradigm keys are rejected") {
  CHECK_THROWS_AS(
      load_lexicon("(LEX x (CAT n) (LANG en) (FORMS ((NUMBER sg) \"a\") ((NUMBER sg) \"b\")))"),
      ParseError);
}

TEST_CASE("frames reject duplicate functions, positions, and the verb rank") {
  CHECK_THROWS_AS(load_lexicon("(LEX v1 (CAT v) (LANG en)"
                               " (SUBCAT (SLOT subject (CASE nom) (SEM agent) (POS 1))"
                               "         (SLOT subject (CASE acc) (SEM patient) (POS 3)))"
                               " (FORMS (\"x\")))"),
                  ParseError);
  CHECK_THROWS_AS(load_lexicon("(LEX v2 (CAT v) (LANG en)"
                               " (SUBCAT (SLOT subject (CASE nom) (SEM agent) (POS 2)))"
                               " (FORMS (\"x\")))"),
                  ParseError);
  CHECK_THROWS_AS(load_lexicon("(LEX v3 (CAT v) (LANG de)"
                               " (SUBCAT (SLOT subject (CASE acc) (SEM agent) (POS 1)))"
                               " (FORMS (\"x\")))"),
                  ParseError);
}

// Every entry must inflect for every combination of values its paradigm keys
// mention; gaps would turn into unfixable stalls at run time.
static void check_totality(const Lexicon& lexicon, const std::vector<std::string>& lemmas) {
  for (const std::string& lemma : lemmas) {
    const LexEntry* entry = lexicon.find(lemma);
    REQUIRE(entry);
    std::map<Feature, std::set<std::string>> mentioned;
    for (const auto& row : entry->paradigm) {
      for (const auto& [f, v] : row.key) mentioned[f].insert(v);
    }
    std::vector<FeatureMap> combos{FeatureMap{}};
    for (const auto& [f, values] : mentioned) {
      std::vector<FeatureMap> next;
      for (const auto& combo : combos) {
        for (const auto& v : values) {
          FeatureMap extended = combo;
          extended.set(f, v);
          next.push_back(std::move(extended));
        }
      }
      combos = std::move(next);
    }
    for (const auto& combo : combos) {
      INFO("lemma ", lemma);
      CHECK(inflect(*entry, combo).has_value());
    }
  }
}

TEST_CASE("paradigms are total over their mentioned feature values") {
  check_totality(lexicon_en(), {"i", "you", "man", "visitor", "guest", "date", "hotel",
                                "evening", "tomorrow", "the", "this", "meet", "come"});
  check_totality(lexicon_de(), {"Besucher", "Termin", "der", "dieser", "werden", "wünschen"});
}
