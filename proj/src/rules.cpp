#include "increvise/rules.hpp"

#include <set>

#include "increvise/sexpr.hpp"

namespace increvise {

void RuleRegistry::add(DefaultDescription rule) {
  rule.order = static_cast<int>(rules_.size());
  rules_.push_back(std::move(rule));
}

namespace {

bool is_var(const std::string& s) { return !s.empty() && s[0] == '?'; }

RuleTest parse_test(const Sexpr& node) {
  if (!node.is_list() || node.size() < 2) {
    throw ParseError("expected a precondition test", node.line);
  }
  const std::string& head = node.atom_at(0, "test");
  RuleTest test;
  if (head == "MISSING") {
    test.kind = RuleTest::Kind::Missing;
    const std::string& fname = node.atom_at(1, "feature");
    auto feature = feature_from_name(fname);
    if (!feature) throw ParseError("unknown feature `" + fname + "`", node.line);
    test.feature = *feature;
    test.var = node.atom_at(2, "variable");
  } else if (head == "NO-HEAD-LEMMA") {
    test.kind = RuleTest::Kind::NoHeadLemma;
    test.var = node.atom_at(1, "variable");
  } else if (head == "HAS-HEAD") {
    test.kind = RuleTest::Kind::HasHead;
    test.var = node.atom_at(1, "variable");
  } else if (head == "IS-UTTERED") {
    test.kind = RuleTest::Kind::IsUttered;
    test.var = node.atom_at(1, "variable");
  } else {
    auto feature = feature_from_name(head);
    if (!feature) throw ParseError("unknown test `" + head + "`", node.line);
    test.kind = RuleTest::Kind::FeatureEq;
    test.feature = *feature;
    test.var = node.atom_at(1, "variable");
    test.value = node.atom_at(2, "value");
    if (!value_allowed(*feature, test.value)) {
      throw ParseError("unknown value `" + test.value + "` for " + head, node.line);
    }
  }
  if (!is_var(test.var)) throw ParseError("expected a ?variable", node.line);
  return test;
}

BodyTemplate parse_body_item(const Sexpr& node, std::set<std::string>& bound) {
  if (!node.is_list() || node.size() < 2) throw ParseError("expected a body template", node.line);
  const std::string& head = node.atom_at(0, "template");
  if (head == "ENTITY") {
    BodyEntity e;
    e.var = node.atom_at(1, "variable");
    if (!is_var(e.var)) throw ParseError("expected a ?variable", node.line);
    bound.insert(e.var);  // first body use declares a fresh variable
    for (size_t i = 2; i < node.size(); ++i) {
      const Sexpr& pair = node.at(i);
      if (!pair.is_list() || pair.size() != 2) {
        throw ParseError("expected (FEATURE value)", pair.line);
      }
      const std::string& fname = pair.atom_at(0, "feature");
      auto feature = feature_from_name(fname);
      if (!feature) throw ParseError("unknown feature `" + fname + "`", pair.line);
      try {
        e.features.set(*feature, pair.atom_at(1, "value"));
      } catch (const std::invalid_argument& err) {
        throw ParseError(err.what(), pair.line);
      }
    }
    return e;
  }
  if (head == "RELATION") {
    BodyRelation r;
    r.rel_var = node.atom_at(1, "relation variable");
    for (size_t i = 2; i < node.size(); ++i) {
      const Sexpr& part = node.at(i);
      const std::string& role = part.atom_at(0, "relation role");
      if (role == "HEAD") {
        r.head_var = part.atom_at(1, "head variable");
      } else if (role == "MODIFIER") {
        r.mod_var = part.atom_at(1, "modifier variable");
      } else {
        throw ParseError("unknown relation role `" + role + "`", part.line);
      }
    }
    if (!is_var(r.rel_var) || !is_var(r.head_var) || !is_var(r.mod_var)) {
      throw ParseError("relation template needs ?variables", node.line);
    }
    if (!bound.count(r.head_var) || !bound.count(r.mod_var)) {
      throw ParseError("relation refers to an unbound variable", node.line);
    }
    bound.insert(r.rel_var);
    return r;
  }
  throw ParseError("unknown body template `" + head + "`", node.line);
}

DefaultDescription parse_rule(const Sexpr& node) {
  DefaultDescription rule;
  rule.rule_id = node.atom_at(1, "rule id");
  bool saw_certainty = false;
  std::set<std::string> bound;
  for (size_t i = 2; i < node.size(); ++i) {
    const Sexpr& part = node.at(i);
    if (!part.is_list() || part.size() < 1) throw ParseError("expected (TAG ...)", part.line);
    const std::string& tag = part.atom_at(0, "rule field");
    if (tag == "LANG") {
      rule.lang = part.atom_at(1, "language");
    } else if (tag == "PRE") {
      for (size_t t = 1; t < part.size(); ++t) {
        RuleTest test = parse_test(part.at(t));
        bound.insert(test.var);
        rule.preconditions.push_back(std::move(test));
      }
    } else if (tag == "BODY") {
      for (size_t b = 1; b < part.size(); ++b) {
        rule.body.push_back(parse_body_item(part.at(b), bound));
      }
    } else if (tag == "CERTAINTY") {
      rule.certainty = std::stod(part.atom_at(1, "certainty"));
      saw_certainty = true;
    } else {
      throw ParseError("unknown rule field `" + tag + "`", part.line);
    }
  }
  if (rule.preconditions.empty()) throw ParseError("rule lacks (PRE ...)", node.line);
  if (rule.body.empty()) throw ParseError("rule lacks (BODY ...)", node.line);
  if (!saw_certainty) throw ParseError("rule lacks (CERTAINTY ...)", node.line);
  if (rule.certainty < 0.0 || rule.certainty > 1.0) {
    throw ParseError("certainty must lie in [0,1]", node.line);
  }
  // All precondition tests must target the same subject variable.
  for (const auto& test : rule.preconditions) {
    if (test.var != rule.preconditions.front().var) {
      throw ParseError("preconditions must share one subject variable", node.line);
    }
  }
  return rule;
}

}  // namespace

RuleRegistry parse_rules(const std::string& text) {
  RuleRegistry registry;
  for (const Sexpr& node : parse_sexprs(text)) {
    if (!node.is_list() || node.size() < 2 || node.atom_at(0, "rule") != "DEFAULT") {
      throw ParseError("expected (DEFAULT ...)", node.line);
    }
    registry.add(parse_rule(node));
  }
  return registry;
}

}  // namespace increvise
