#include "doctest.h"
#include "helpers.hpp"
#include "increvise/increment.hpp"

using namespace increvise;

TEST_CASE("parses entity increments") {
  Scenario s = parse_scenario("(AT 0 (ENTITY o1 (CAT n) (LEMMA visitor) (FUNCTION agent)))");
  REQUIRE(s.increments.size() == 1);
  const Increment& inc = s.increments[0];
  CHECK(inc.t == 0);
  CHECK(inc.kind() == IncrementKind::Entity);
  CHECK(inc.entity().obj == "o1");
  CHECK(inc.entity().features.get(Feature::Cat) == "n");
  CHECK(inc.entity().features.get(Feature::Lemma) == "visitor");
  CHECK(inc.entity().features.get(Feature::Function) == "agent");
  CHECK(inc.provenance.kind == Provenance::Kind::Input);
}

TEST_CASE("parses relation increments") {
  Scenario s = parse_scenario("(AT 150 (RELATION r1 (HEAD o2) (MODIFIER o1)))");
  REQUIRE(s.increments.size() == 1);
  CHECK(s.increments[0].kind() == IncrementKind::Relation);
  CHECK(s.increments[0].relation().head == "o2");
  CHECK(s.increments[0].relation().modifier == "o1");
  CHECK(s.end_time == 150);
}

TEST_CASE("rejects values outside the closed sets") {
  CHECK_THROWS_AS(parse_scenario("(AT 10 (ENTITY o1 (NUMBER both)))"), ParseError);
  CHECK_THROWS_AS(parse_scenario("(AT 10 (ENTITY o1 (SIZE big)))"), ParseError);
}

TEST_CASE("rejects malformed input with a line number") {
  try {
    parse_scenario("(AT 0 (ENTITY o1 (CAT n)))\n(AT -5 (ENTITY o2 (CAT n)))");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_scenario("(AT 0 (RELATION r1 (HEAD o1) (MODIFIER o1)))"), ParseError);
  CHECK_THROWS_AS(parse_scenario("(AT 0 (ENTITY o1 (CAT n)))\n(END 0)\n(END 1)"), ParseError);
  CHECK_THROWS_AS(parse_scenario("(AT 9 (ENTITY o1 (CAT n)))\n(END 3)"), ParseError);
}

TEST_CASE("feature names are case-insensitive, comments are skipped") {
  Scenario s = parse_scenario("; remark\n(AT 2 (ENTITY o1 (cat n) (Number pl)))\n(END 7)");
  CHECK(s.increments[0].entity().features.get(Feature::Cat) == "n");
  CHECK(s.increments[0].entity().features.get(Feature::Number) == "pl");
  CHECK(s.end_time == 7);
}

TEST_CASE("equal timestamps keep file order") {
  Scenario s = parse_scenario(
      "(AT 5 (ENTITY b (CAT n)))\n(AT 5 (ENTITY a (CAT n)))\n(AT 1 (ENTITY z (CAT v)))");
  REQUIRE(s.increments.size() == 3);
  CHECK(s.increments[0].entity().obj == "z");
  CHECK(s.increments[1].entity().obj == "b");
  CHECK(s.increments[2].entity().obj == "a");
}

TEST_CASE("default provenance always carries rule and application ids") {
  CHECK_THROWS_AS(Provenance::from_default("", 1), EngineError);
  CHECK_THROWS_AS(Provenance::from_default("number-sg", 0), EngineError);
  Provenance p = Provenance::from_default("number-sg", 3);
  CHECK(p.is_default());
}

TEST_CASE("render/parse round-trips random scenarios") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> count(0, 8);
  std::uniform_int_distribution<int> gap(0, 30);
  std::uniform_int_distribution<int> kind(0, 2);
  for (int trial = 0; trial < 100; ++trial) {
    Scenario s;
    Tick t = 0;
    int n = count(rng);
    for (int i = 0; i < n; ++i) {
      t += gap(rng);
      Increment inc;
      inc.t = t;
      switch (kind(rng)) {
        case 0: {
          EntityPayload p;
          p.obj = "o" + std::to_string(i);
          p.features = testutil::random_features(rng);
          inc.payload = p;
          break;
        }
        case 1: {
          RelationPayload p;
          p.rel = "r" + std::to_string(i);
          p.head = "h" + std::to_string(i);
          p.modifier = "m" + std::to_string(i);
          inc.payload = p;
          break;
        }
        default: {
          inc.op = IncrementOp::Delete;
          inc.payload = DeletePayload{"o" + std::to_string(i)};
          break;
        }
      }
      s.increments.push_back(std::move(inc));
    }
    s.end_time = t + gap(rng);
    CHECK(parse_scenario(render_scenario(s)) == s);
  }
}
