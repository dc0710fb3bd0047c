#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "increvise/engine.hpp"
#include "increvise/runner.hpp"

using namespace increvise;
using testutil::config;

namespace {

Increment entity(Tick t, const std::string& obj, FeatureMap features,
                 Provenance prov = Provenance::input()) {
  Increment inc;
  inc.t = t;
  inc.payload = EntityPayload{obj, std::move(features)};
  inc.provenance = std::move(prov);
  return inc;
}

int count_events(const std::vector<TraceEvent>& trace, const std::string& type) {
  return static_cast<int>(
      std::count_if(trace.begin(), trace.end(),
                    [&](const TraceEvent& e) { return e.type == type; }));
}

// No feature value, slot fill or head link may reference a retracted
// application.
void assert_no_dangling(const EngineState& st) {
  std::set<int> retracted;
  for (const auto& entry : st.ledger) {
    if (entry.state == AppState::Retracted) retracted.insert(entry.id);
  }
  for (const auto& [id, obj] : st.objects) {
    if (!obj.alive) continue;
    for (const auto& [f, cell] : obj.features) {
      for (int app : cell.deps) {
        INFO("object ", id, " feature ", feature_name(f));
        CHECK(retracted.count(app) == 0);
      }
    }
    if (obj.head) {
      for (int app : obj.head->deps) CHECK(retracted.count(app) == 0);
    }
    if (obj.structure) {
      for (const auto& [sem, fill] : obj.structure->fills) {
        for (int app : fill.deps) CHECK(retracted.count(app) == 0);
      }
    }
    for (int app : obj.created_by) CHECK(retracted.count(app) == 0);
  }
  for (const auto& [rid, rel] : st.relations) {
    for (int app : rel.deps) CHECK(retracted.count(app) == 0);
  }
}

Engine number_default_engine(Tick advance_to = 250) {
  Engine eng(testutil::lexicon_en(), testutil::core_rules(), config("en"));
  eng.start(parse_scenario("(AT 0 (ENTITY o1 (CAT n) (LEMMA man)))\n(END 1000)"));
  eng.advance_clock(advance_to);
  return eng;
}

}  // namespace

TEST_CASE("check_consistency: matching input confirms the assumption") {
  Engine eng = number_default_engine();
  auto res = eng.check_consistency("o1", Feature::Number, "sg");
  CHECK(res.outcome == Consistency::Coincide);

  size_t tokens_before = count_events(eng.state().trace, "token");
  eng.consume(entity(250, "o1", FeatureMap{{Feature::Number, "sg"}}));
  const ValueCell& cell = eng.state().find("o1")->features.at(Feature::Number);
  CHECK(cell.deps.empty());  // provenance upgraded to input
  CHECK(cell.value == "sg");
  CHECK(eng.state().ledger[0].state == AppState::Confirmed);
  // confirmation changes no surface form and emits no utterance events
  CHECK(count_events(eng.state().trace, "token") == static_cast<int>(tokens_before));
  CHECK(count_events(eng.state().trace, "repair") == 0);
}

TEST_CASE("check_consistency: differing input is a contradiction") {
  Engine eng = number_default_engine();
  auto res = eng.check_consistency("o1", Feature::Number, "pl");
  REQUIRE(res.outcome == Consistency::Contradicts);
  CHECK(res.contradiction.obj == "o1");
  CHECK(res.contradiction.feature == Feature::Number);
  CHECK(res.contradiction.default_value == "sg");
  CHECK(res.contradiction.input_value == "pl");
  CHECK(res.contradiction.application_id == eng.state().ledger[0].id);
}

TEST_CASE("check_consistency: input-licensed values are not the repair module's business") {
  Engine eng(testutil::lexicon_en(), testutil::core_rules(), config("en"));
  eng.consume(entity(0, "o1", FeatureMap{{Feature::Cat, "n"}, {Feature::Number, "sg"},
                                         {Feature::Lemma, "man"}}));
  CHECK(eng.check_consistency("o1", Feature::Number, "pl").outcome ==
        Consistency::NotApplicable);
  CHECK(eng.check_consistency("o1", Feature::Person, "1").outcome ==
        Consistency::NotApplicable);
}

TEST_CASE("retract removes the assumed value so input can recompose") {
  Engine eng = number_default_engine();
  int app = eng.state().ledger[0].id;
  auto affected = eng.retract(app);
  CHECK(std::find(affected.begin(), affected.end(), "o1") != affected.end());
  CHECK_FALSE(eng.state().find("o1")->features.count(Feature::Number));
  assert_no_dangling(eng.state());

  eng.consume(entity(250, "o1", FeatureMap{{Feature::Number, "pl"}}));
  CHECK(eng.state().find("o1")->value_of(Feature::Number) == "pl");
}

TEST_CASE("retract with no dependents only removes the injected value") {
  Engine eng(testutil::lexicon_en(), testutil::core_rules(), config("en", 0.7, 100));
  eng.start(parse_scenario(
      "(AT 0 (ENTITY o1 (CAT pron) (LEMMA i) (FUNCTION agent) (NUMBER sg) (PERSON 1)))\n"
      "(AT 0 (ENTITY o2 (CAT v) (LEMMA meet) (TENSE fut)))\n"
      "(AT 0 (RELATION r1 (HEAD o2) (MODIFIER o1)))\n(END 1000)"));
  eng.advance_clock(120);  // polarity-pos fires at t=100
  REQUIRE(eng.state().ledger.size() == 1);
  REQUIRE(eng.state().find("o2")->value_of(Feature::Polarity) == "pos");
  eng.retract(eng.state().ledger[0].id);
  CHECK_FALSE(eng.state().find("o2")->features.count(Feature::Polarity));
  CHECK(eng.state().find("o2")->value_of(Feature::Tense) == "fut");  // untouched
  assert_no_dangling(eng.state());
}

TEST_CASE("retracting the provisional frame strips case, fill and scaffold") {
  Engine eng(testutil::lexicon_de(), testutil::core_rules(), config("de"));
  eng.start(parse_scenario(
      "(AT 0 (ENTITY o1 (CAT n) (LEMMA Besucher) (NUMBER sg) (FUNCTION agent)))\n(END 1000)"));
  eng.advance_clock(250);
  const GenObject* o1 = eng.state().find("o1");
  REQUIRE(o1->head);
  std::string dummy_id = o1->head->head;
  REQUIRE(eng.state().find(dummy_id));
  int app = eng.state().ledger[0].id;

  eng.retract(app);
  o1 = eng.state().find("o1");
  CHECK_FALSE(o1->features.count(Feature::Case));
  CHECK_FALSE(o1->head);
  CHECK(eng.state().find(dummy_id) == nullptr);  // scaffold collected
  assert_no_dangling(eng.state());
}

TEST_CASE("passive input remaps the agent after the provisional frame is withdrawn") {
  Scenario sc =
      parse_scenario(testutil::slurp(testutil::assets_path("scenarios/dummy-verb-de-passive.scn")));
  Engine eng(testutil::lexicon_de(), testutil::core_rules(), config("de"));
  int exit_code = eng.run(sc);
  CHECK(exit_code == 0);
  const GenObject* o1 = eng.state().find("o1");
  REQUIRE(o1);
  CHECK(o1->value_of(Feature::Case) == "dat");
  const GenObject* verb = eng.state().find("o2");
  REQUIRE(verb);
  REQUIRE(verb->structure);
  CHECK(verb->structure->fills.at("agent").filler == "o1");
  CHECK(verb->structure->fills.at("patient").filler == "o3");
  CHECK(eng.state().find("o3")->value_of(Feature::Case) == "nom");
  assert_no_dangling(eng.state());
}

TEST_CASE("plan_repair: nothing spoken means silent revision") {
  Engine eng = number_default_engine(150);  // before the rule fires
  // Nothing was assumed or spoken yet; a plan over o1 stays empty.
  RepairPlan plan = eng.plan_repair({"o1"});
  CHECK_FALSE(plan.uttered_affected);
  CHECK(plan.events.empty());
}

TEST_CASE("plan_repair: spoken and changed means marker plus corrected span") {
  Engine eng = number_default_engine(250);  // "the man" spoken under sg
  eng.consume(entity(250, "o1", FeatureMap{{Feature::Number, "pl"}}));
  RepairPlan plan = eng.plan_repair({"o1"});
  CHECK(plan.uttered_affected);
  CHECK(plan.anchor == "o1");
  REQUIRE_FALSE(plan.events.empty());
  const auto& trace = eng.state().trace;
  CHECK(trace[plan.events[0]].type == "repair");
  CHECK(trace[plan.events[0]].text == "oops");
  std::vector<std::string> corrected;
  for (size_t i = 1; i < plan.events.size(); ++i) corrected.push_back(trace[plan.events[i]].text);
  CHECK(corrected == std::vector<std::string>{"the", "men"});
  CHECK(eng.effective_tokens() == std::vector<std::string>{"the", "men"});
}

TEST_CASE("silent revision end to end: correction lands before utterance") {
  Scenario sc = parse_scenario(
      "(AT 0 (ENTITY o1 (CAT n) (LEMMA man)))\n"
      "(AT 201 (ENTITY o1 (NUMBER pl)))\n(END 300)");
  RunArtifacts run =
      run_incremental(sc, testutil::core_rules(), testutil::lexicon_en(), config("en"));
  CHECK(run.metrics.defaults_applied == 1);
  CHECK(run.metrics.repair_count == 0);
  CHECK(run.effective == std::vector<std::string>{"the", "men"});
}

TEST_CASE("the corrected span appears strictly after the marker; nothing is deleted") {
  Scenario sc = parse_scenario(testutil::slurp(testutil::assets_path("scenarios/number-en.scn")));
  RunArtifacts run =
      run_incremental(sc, testutil::core_rules(), testutil::lexicon_en(), config("en"));
  REQUIRE(run.metrics.repair_count == 1);
  size_t marker = 0;
  for (size_t i = 0; i < run.trace.size(); ++i) {
    if (run.trace[i].type == "repair") marker = i;
  }
  for (size_t i = 0; i < run.trace.size(); ++i) {
    if (run.trace[i].type != "token") continue;
    if (i < marker) {
      CHECK(run.trace[i].retracted);  // the old span is flagged, never removed
    } else {
      CHECK_FALSE(run.trace[i].retracted);
    }
  }
}

TEST_CASE("after retraction and reconsume the state matches a fresh input-only run") {
  // Incrementally: sg assumed, spoken, contradicted by pl, repaired.
  Scenario late = parse_scenario(testutil::slurp(testutil::assets_path("scenarios/number-en.scn")));
  Engine incremental(testutil::lexicon_en(), testutil::core_rules(), config("en"));
  incremental.run(late);

  // Fresh run with the input-licensed value from the start.
  Scenario fresh = parse_scenario(
      "(AT 0 (ENTITY o1 (CAT n) (LEMMA man) (NUMBER pl)))\n(END 600)");
  Engine direct(testutil::lexicon_en(), testutil::core_rules(), config("en"));
  direct.run(fresh);

  const GenObject* a = incremental.state().find("o1");
  const GenObject* b = direct.state().find("o1");
  REQUIRE(a);
  REQUIRE(b);
  CHECK(a->feature_view() == b->feature_view());
  CHECK(incremental.effective_tokens() == direct.effective_tokens());
}
