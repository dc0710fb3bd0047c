#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "increvise/increment.hpp"
#include "increvise/lexicon.hpp"
#include "increvise/rules.hpp"
#include "increvise/syntax.hpp"
#include "increvise/trace.hpp"
#include "increvise/types.hpp"

namespace increvise {

struct EngineConfig {
  double threshold = 0.7;   // a rule fires only when certainty > threshold
  Tick time_limit = 200;    // base delay before an assumption may fire
  int max_defaults = 3;     // cap on live assumptions per sentence
  double fluency = 0.0;     // 1 fires immediately, 0 waits the full limit
  std::string lang = "en";
  std::string repair_marker;  // resolved from lang when empty ("oops"/"äh")

  Tick effective_time_limit() const;
  std::string marker() const;
};

// One feature value of an object, with enough provenance to confirm or
// withdraw it. deps lists the assumption applications the value rests on;
// an empty set means the value is input-licensed.
struct ValueCell {
  std::string value;
  std::set<int> deps;
  Tick lic = 0;
  bool derived = false;  // inherited through the structure, not set directly
  std::string rule_id;   // rule that set the value directly, if any

  bool is_default() const { return !deps.empty(); }
};

struct HeadLink {
  std::string head;
  std::string rel;
  std::set<int> deps;
  Tick lic = 0;
};

enum class ObjState { Waiting, Verbalizable, PartiallyUttered, Uttered };

struct GenObject {
  std::string id;
  int seq = 0;  // creation order
  Tick created_t = 0;
  bool alive = true;
  bool default_created = false;
  std::set<int> created_by;  // applications that license this object's existence

  std::map<Feature, ValueCell> features;
  std::optional<HeadLink> head;
  std::optional<SyntaxStructure> structure;

  ObjState state = ObjState::Waiting;
  // Emitted tokens per linear rank: rank -> indices into the trace.
  std::map<int, std::vector<size_t>> emitted;
  long version = 0;

  FeatureMap feature_view() const;
  std::optional<std::string_view> value_of(Feature f) const;
  bool has_uttered_tokens(const std::vector<TraceEvent>& trace) const;
};

struct RelationRec {
  std::string rel;
  std::string head;
  std::string modifier;
  std::set<int> deps;
  bool alive = true;
};

// Things a retraction must be able to undo.
struct DepTarget {
  enum class Kind { Cell, Fill, Head, Relation, Object, Token };
  Kind kind = Kind::Cell;
  std::string a;  // object / relation id
  std::string b;  // fill: sem function
  Feature feature = Feature::Cat;
  size_t token_index = 0;

  bool operator==(const DepTarget&) const = default;
};

enum class AppState { Live, Confirmed, Retracted };

struct AppliedDefault {
  int id = 0;
  std::string rule_id;
  double certainty = 0.0;
  std::map<std::string, std::string> binding;  // variable -> object/relation id
  Tick t_applied = 0;
  AppState state = AppState::Live;
  std::vector<Increment> injected;
  std::vector<DepTarget> dependents;
  std::set<std::pair<std::string, Feature>> claims;  // directly asserted cells

  bool live() const { return state == AppState::Live; }
};

struct StallReport {
  std::string obj;
  std::set<Feature> missing;
  bool structural_no_head = false;
  Tick since = 0;
};

struct Candidate {
  const DefaultDescription* rule = nullptr;
  std::string obj;
  double certainty = 0.0;
  int order = 0;
};

struct Contradiction {
  std::string obj;
  Feature feature = Feature::Cat;
  std::string default_value;
  std::string input_value;
  int application_id = 0;
};

enum class Consistency { Coincide, Contradicts, NotApplicable };

struct ConsistencyResult {
  Consistency outcome = Consistency::NotApplicable;
  Contradiction contradiction;
};

struct RepairPlan {
  std::set<int> retracted_applications;
  std::vector<std::string> affected_objects;
  bool uttered_affected = false;
  std::string anchor;  // uppermost object engaged in uttering
  std::vector<size_t> events;  // indices of the marker + re-uttered tokens
};

struct EngineState {
  std::map<std::string, GenObject> objects;
  std::map<std::string, RelationRec> relations;
  Tick clock = 0;
  std::deque<Increment> pending;
  std::vector<TraceEvent> trace;
  std::vector<AppliedDefault> ledger;
  EngineConfig config;
  std::map<std::string, Tick> stalled_since;
  int next_app = 1;
  int next_obj_seq = 0;
  int next_fresh = 1;
  // (rule, obj) candidates discarded against an object version; retried only
  // after the object changes.
  std::map<std::pair<std::string, std::string>, long> discarded;
  std::vector<int> recent_retractions;  // feeds the next repair plan

  GenObject* find(const std::string& id);
  const GenObject* find(const std::string& id) const;
};

struct BatchResult {
  bool ok = false;
  std::vector<std::string> tokens;
  std::vector<TraceEvent> trace;
  std::vector<StallReport> missing;  // set when !ok
};

// The incremental generation loop. One engine owns one sentence; distinct
// runs are independent.
class Engine {
 public:
  Engine(const Lexicon& lexicon, const RuleRegistry& rules, EngineConfig config);

  EngineState& state() { return st_; }
  const EngineState& state() const { return st_; }

  // --- input side -----------------------------------------------------
  void consume(const Increment& inc);
  std::vector<TraceEvent> advance_clock(Tick until);

  // --- introspection --------------------------------------------------
  std::vector<StallReport> detect_default_situation() const;
  std::vector<size_t> try_utter();

  // --- default handler ------------------------------------------------
  std::vector<Candidate> match_defaults() const;
  static std::optional<Candidate> select_default(const std::vector<Candidate>& candidates);
  bool should_fire(const Candidate& cand) const;
  bool apply_default(const Candidate& cand);
  double global_certainty() const;

  // --- repair ----------------------------------------------------------
  ConsistencyResult check_consistency(const std::string& obj, Feature feature,
                                      const std::string& input_value) const;
  std::vector<std::string> retract(int application_id);
  RepairPlan plan_repair(const std::vector<std::string>& affected);

  // --- whole runs -------------------------------------------------------
  // Replays the scenario; returns 0 on a finished utterance, 2 when the run
  // dead-ends (unfinished output, no applicable assumption).
  int run(const Scenario& scenario);

  // Queues the scenario and processes the t=0 quiescent point; lets callers
  // drive the clock themselves with advance_clock.
  void start(const Scenario& scenario);

  // Earliest tick at which some gated assumption could fire, given current
  // stalls. nullopt when nothing can ever fire.
  std::optional<Tick> next_fire_time() const;

  // Current spoken sequence (tokens and markers, in order).
  std::string transcript_line() const;
  // Final effective content: retracted tokens and markers dropped.
  std::vector<std::string> effective_tokens() const;

  bool utterance_complete() const;
  BatchResult batch_result() const;

 private:
  struct YieldInfo {
    std::vector<std::string> tokens;
    Tick lic = 0;
    std::set<int> deps;
    std::set<Feature> missing;
    bool determinable = false;
  };
  struct SpanItem {
    int rank = 0;
    std::string obj;
    bool is_verb_chunk = false;
    bool is_final_chunk = false;
    YieldInfo yield;
  };

  void tick_steps();
  void deliver_due();
  void consume_entity(const Increment& inc);
  void consume_relation(const Increment& inc);
  void consume_delete(const Increment& inc);
  GenObject& get_or_create(const std::string& id, const Provenance& prov);
  void release_claim(const std::string& obj, Feature f, const std::set<int>& apps);
  void handle_contradiction(const std::string& obj, Feature f, const ValueCell& cell,
                            const std::string& input_value);

  void recompute_derived();
  void ensure_structure(GenObject& verb);
  bool integrate(GenObject& modifier, bool from_default_injection);
  std::optional<std::string> voice_of(const GenObject& verb) const;
  const LexEntry* entry_for(const GenObject& obj) const;

  YieldInfo np_yield(const GenObject& obj) const;
  YieldInfo verb_chunk_yield(const GenObject& verb, bool final_chunk) const;
  std::vector<SpanItem> span_items(const GenObject& root) const;
  std::vector<std::string> tree_members(const GenObject& root) const;
  std::vector<const GenObject*> roots() const;
  const GenObject* root_of(const GenObject& obj) const;
  bool tree_divergent(const GenObject& root) const;
  bool span_ready(const GenObject& root) const;
  bool tree_fully_uttered(const GenObject& root) const;
  void do_repair(const GenObject& root, RepairPlan& plan);
  void refresh_stalls();
  void run_default_gate();
  void register_dep(const std::set<int>& deps, const DepTarget& target);
  size_t emit_token(const std::string& text, const std::string& obj, int rank, Tick lic,
                    bool repeat, const std::set<int>& deps);
  void delete_object_effects(const std::string& id);

  EngineState st_;
  const Lexicon* lexicon_;
  const RuleRegistry* rules_;
  bool in_default_injection_ = false;
};

// Consumes every increment at t=0 with assumptions disabled, then utters.
// Serves as the content oracle for incremental runs.
BatchResult batch_generate(const Scenario& scenario, const Lexicon& lexicon,
                           EngineConfig config);

}  // namespace increvise
