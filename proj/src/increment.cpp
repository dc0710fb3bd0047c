#include "increvise/increment.hpp"

#include <algorithm>
#include <sstream>

#include "increvise/sexpr.hpp"

namespace increvise {

Provenance Provenance::from_default(std::string rule, int app) {
  if (rule.empty() || app <= 0) {
    throw EngineError("default provenance requires a rule id and an application id");
  }
  Provenance p;
  p.kind = Kind::Default;
  p.rule_id = std::move(rule);
  p.application_id = app;
  return p;
}

IncrementKind Increment::kind() const {
  if (std::holds_alternative<EntityPayload>(payload)) return IncrementKind::Entity;
  if (std::holds_alternative<RelationPayload>(payload)) return IncrementKind::Relation;
  return IncrementKind::Erasure;
}

namespace {

Tick parse_ticks(const std::string& text, int line) {
  try {
    size_t used = 0;
    long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    if (v < 0) throw ParseError("negative timestamp `" + text + "`", line);
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("expected a tick count, got `" + text + "`", line);
  }
}

FeatureMap parse_feature_pairs(const Sexpr& node, size_t from) {
  FeatureMap features;
  for (size_t i = from; i < node.size(); ++i) {
    const Sexpr& pair = node.at(i);
    if (!pair.is_list() || pair.size() != 2) {
      throw ParseError("expected (FEATURE value)", pair.line);
    }
    const std::string& fname = pair.atom_at(0, "feature name");
    auto feature = feature_from_name(fname);
    if (!feature) throw ParseError("unknown feature `" + fname + "`", pair.line);
    if (features.contains(*feature)) {
      throw ParseError("duplicate feature `" + fname + "`", pair.line);
    }
    const std::string& value = pair.atom_at(1, "feature value");
    try {
      features.set(*feature, value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), pair.line);
    }
  }
  return features;
}

Increment parse_at(const Sexpr& node) {
  Increment inc;
  inc.t = parse_ticks(node.atom_at(1, "timestamp"), node.line);
  const Sexpr& body = node.at(2);
  if (!body.is_list() || body.size() < 1) {
    throw ParseError("expected (ENTITY ...), (RELATION ...) or (DELETE ...)", node.line);
  }
  const std::string& tag = body.atom_at(0, "increment kind");
  if (tag == "ENTITY") {
    EntityPayload p;
    p.obj = body.atom_at(1, "object id");
    p.features = parse_feature_pairs(body, 2);
    inc.payload = std::move(p);
  } else if (tag == "RELATION") {
    RelationPayload p;
    p.rel = body.atom_at(1, "relation id");
    for (size_t i = 2; i < body.size(); ++i) {
      const Sexpr& part = body.at(i);
      if (!part.is_list() || part.size() != 2) {
        throw ParseError("expected (HEAD id) or (MODIFIER id)", part.line);
      }
      const std::string& role = part.atom_at(0, "relation role");
      if (role == "HEAD") {
        p.head = part.atom_at(1, "head id");
      } else if (role == "MODIFIER") {
        p.modifier = part.atom_at(1, "modifier id");
      } else {
        throw ParseError("unknown relation role `" + role + "`", part.line);
      }
    }
    if (p.head.empty() || p.modifier.empty()) {
      throw ParseError("relation needs both HEAD and MODIFIER", body.line);
    }
    if (p.head == p.modifier) {
      throw ParseError("relation head and modifier must differ", body.line);
    }
    inc.payload = std::move(p);
  } else if (tag == "DELETE") {
    DeletePayload p;
    p.target = body.atom_at(1, "target id");
    inc.op = IncrementOp::Delete;
    inc.payload = std::move(p);
  } else {
    throw ParseError("unknown increment kind `" + tag + "`", body.line);
  }
  return inc;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Scenario scenario;
  bool saw_end = false;
  for (const Sexpr& node : parse_sexprs(text)) {
    if (!node.is_list() || node.size() < 2) {
      throw ParseError("expected (AT ...) or (END ticks)", node.line);
    }
    const std::string& head = node.atom_at(0, "line head");
    if (head == "AT") {
      if (node.size() != 3) throw ParseError("expected (AT ticks (...))", node.line);
      scenario.increments.push_back(parse_at(node));
    } else if (head == "END") {
      if (saw_end) throw ParseError("duplicate END marker", node.line);
      scenario.end_time = parse_ticks(node.atom_at(1, "end time"), node.line);
      saw_end = true;
    } else {
      throw ParseError("unknown form `" + head + "`", node.line);
    }
  }
  std::stable_sort(scenario.increments.begin(), scenario.increments.end(),
                   [](const Increment& a, const Increment& b) { return a.t < b.t; });
  Tick last = scenario.increments.empty() ? 0 : scenario.increments.back().t;
  if (!saw_end) scenario.end_time = last;
  if (scenario.end_time < last) {
    throw ParseError("END precedes the last increment");
  }
  return scenario;
}

namespace {

void render_increment(std::ostringstream& out, const Increment& inc) {
  out << "(AT " << inc.t << " ";
  switch (inc.kind()) {
    case IncrementKind::Entity: {
      const auto& p = inc.entity();
      out << "(ENTITY " << p.obj;
      for (const auto& [f, v] : p.features) {
        out << " (" << feature_name(f) << " " << v << ")";
      }
      out << ")";
      break;
    }
    case IncrementKind::Relation: {
      const auto& p = inc.relation();
      out << "(RELATION " << p.rel << " (HEAD " << p.head << ") (MODIFIER " << p.modifier
          << "))";
      break;
    }
    case IncrementKind::Erasure:
      out << "(DELETE " << inc.erasure().target << ")";
      break;
  }
  out << ")\n";
}

}  // namespace

std::string render_scenario(const Scenario& scenario) {
  std::ostringstream out;
  for (const Increment& inc : scenario.increments) render_increment(out, inc);
  out << "(END " << scenario.end_time << ")\n";
  return out.str();
}

}  // namespace increvise
