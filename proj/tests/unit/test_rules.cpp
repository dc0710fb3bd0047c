#include "doctest.h"
#include "helpers.hpp"
#include "increvise/rules.hpp"

using namespace increvise;

TEST_CASE("core rule file parses into three ordered rules") {
  const RuleRegistry& registry = testutil::core_rules();
  REQUIRE(registry.rules().size() == 3);
  CHECK(registry.rules()[0].rule_id == "number-sg");
  CHECK(registry.rules()[1].rule_id == "agent-dummy-verb");
  CHECK(registry.rules()[2].rule_id == "polarity-pos");
  for (const auto& rule : registry.rules()) {
    CHECK(rule.certainty == doctest::Approx(0.8));
  }
  CHECK(registry.rules()[2].lang == "en");
  CHECK(registry.rules()[0].lang == "any");
  CHECK(registry.rules()[1].body.size() == 2);
}

TEST_CASE("precondition kinds parse") {
  RuleRegistry r = parse_rules(
      "(DEFAULT t1 (PRE (CAT ?x n) (MISSING NUMBER ?x) (NO-HEAD-LEMMA ?x) (HAS-HEAD ?x)"
      " (IS-UTTERED ?x)) (BODY (ENTITY ?x (NUMBER sg))) (CERTAINTY 0.5))");
  const auto& pre = r.rules()[0].preconditions;
  REQUIRE(pre.size() == 5);
  CHECK(pre[0].kind == RuleTest::Kind::FeatureEq);
  CHECK(pre[1].kind == RuleTest::Kind::Missing);
  CHECK(pre[2].kind == RuleTest::Kind::NoHeadLemma);
  CHECK(pre[3].kind == RuleTest::Kind::HasHead);
  CHECK(pre[4].kind == RuleTest::Kind::IsUttered);
}

TEST_CASE("certainty must lie in [0,1]") {
  CHECK_THROWS_AS(
      parse_rules("(DEFAULT bad (PRE (CAT ?x n)) (BODY (ENTITY ?x (NUMBER sg))) (CERTAINTY 1.5))"),
      ParseError);
}

TEST_CASE("body templates must not reference unbound variables") {
  CHECK_THROWS_AS(parse_rules("(DEFAULT bad (PRE (CAT ?x n))"
                              " (BODY (RELATION ?r (HEAD ?ghost) (MODIFIER ?x)))"
                              " (CERTAINTY 0.5))"),
                  ParseError);
}

TEST_CASE("rules need preconditions, body and certainty") {
  CHECK_THROWS_AS(parse_rules("(DEFAULT bad (BODY (ENTITY ?x (NUMBER sg))) (CERTAINTY 0.5))"),
                  ParseError);
  CHECK_THROWS_AS(parse_rules("(DEFAULT bad (PRE (CAT ?x n)) (CERTAINTY 0.5))"), ParseError);
  CHECK_THROWS_AS(parse_rules("(DEFAULT bad (PRE (CAT ?x n)) (BODY (ENTITY ?x (NUMBER sg))))"),
                  ParseError);
}

TEST_CASE("preconditions share one subject variable") {
  CHECK_THROWS_AS(parse_rules("(DEFAULT bad (PRE (CAT ?x n) (MISSING NUMBER ?y))"
                              " (BODY (ENTITY ?x (NUMBER sg))) (CERTAINTY 0.5))"),
                  ParseError);
}
