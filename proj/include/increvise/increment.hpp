#pragma once

#include <string>
#include <variant>
#include <vector>

#include "increvise/feature_map.hpp"
#include "increvise/types.hpp"

namespace increvise {

// Where a piece of information came from. Every assumption-injected increment
// carries the rule that produced it and the id of that particular
// application, so it can be confirmed or withdrawn later.
struct Provenance {
  enum class Kind { Input, Default };
  Kind kind = Kind::Input;
  std::string rule_id;      // set for Default
  int application_id = 0;   // set for Default

  static Provenance input() { return {}; }
  static Provenance from_default(std::string rule, int app);
  bool is_default() const { return kind == Kind::Default; }
  bool operator==(const Provenance&) const = default;
};

struct EntityPayload {
  std::string obj;
  FeatureMap features;
  bool operator==(const EntityPayload&) const = default;
};

struct RelationPayload {
  std::string rel;
  std::string head;
  std::string modifier;
  bool operator==(const RelationPayload&) const = default;
};

struct DeletePayload {
  std::string target;  // object or relation id
  bool operator==(const DeletePayload&) const = default;
};

enum class IncrementKind { Entity, Relation, Erasure };
enum class IncrementOp { Add, Modify, Delete };

// One timed package of input: feature assignments for an object, a
// head/modifier link, or a deletion. Assumption bodies are expressed as
// increments of exactly the same shape.
struct Increment {
  Tick t = 0;
  IncrementOp op = IncrementOp::Add;
  std::variant<EntityPayload, RelationPayload, DeletePayload> payload;
  Provenance provenance;

  IncrementKind kind() const;
  const EntityPayload& entity() const { return std::get<EntityPayload>(payload); }
  const RelationPayload& relation() const { return std::get<RelationPayload>(payload); }
  const DeletePayload& erasure() const { return std::get<DeletePayload>(payload); }
  bool operator==(const Increment&) const = default;
};

struct Scenario {
  std::vector<Increment> increments;  // non-decreasing timestamps
  Tick end_time = 0;
  bool operator==(const Scenario&) const = default;
};

// Parses the line-oriented scenario format:
//   (AT <ticks> (ENTITY <obj> (<FEATURE> <value>)...))
//   (AT <ticks> (RELATION <rel> (HEAD <obj>) (MODIFIER <obj>)))
//   (AT <ticks> (DELETE <id>))
//   (END <ticks>)
// Comment lines start with ';'. Feature names are case-insensitive.
Scenario parse_scenario(const std::string& text);

// Canonical rendering; parse_scenario(render_scenario(s)) == s.
std::string render_scenario(const Scenario& scenario);

}  // namespace increvise
