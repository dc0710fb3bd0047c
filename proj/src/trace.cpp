#include "increvise/trace.hpp"

#include <sstream>

#include "json.hpp"

namespace increvise {

namespace {

using json = nlohmann::ordered_json;

json event_to_json(const TraceEvent& e) {
  json j;
  j["t"] = e.t;
  j["type"] = e.type;
  if (e.type == "token") {
    j["text"] = e.text;
    j["obj"] = e.obj;
    j["lic"] = e.lic;
    j["repeat"] = e.repeat;
    j["retracted"] = e.retracted;
  } else if (e.type == "repair") {
    j["text"] = e.text;
    j["obj"] = e.obj;
  } else if (e.type == "default_applied") {
    j["rule"] = e.rule;
    j["certainty"] = e.certainty;
    j["app"] = e.app;
    j["obj"] = e.obj;
  } else if (e.type == "default_retracted") {
    j["rule"] = e.rule;
    j["app"] = e.app;
    j["objs"] = e.objs;
  } else if (e.type == "default_discarded") {
    j["rule"] = e.rule;
    j["obj"] = e.obj;
    j["reason"] = e.reason;
  } else if (e.type == "coincide") {
    j["rule"] = e.rule;
    j["app"] = e.app;
    j["obj"] = e.obj;
    j["feature"] = e.feature;
    j["confirmed"] = e.confirmed;
  } else if (e.type == "stall") {
    j["obj"] = e.obj;
    j["missing"] = e.missing;
  } else if (e.type == "consume") {
    j["kind"] = e.kind;
    j["obj"] = e.obj;
    j["provenance"] = e.provenance;
  } else if (e.type == "end") {
    j["exit"] = e.exit_code;
    j["global_certainty"] = e.global_certainty;
    j["live_defaults"] = e.live_defaults;
  }
  return j;
}

TraceEvent event_from_json(const json& j) {
  TraceEvent e;
  e.t = j.value("t", 0LL);
  e.type = j.value("type", "");
  e.text = j.value("text", "");
  e.obj = j.value("obj", "");
  e.retracted = j.value("retracted", false);
  e.repeat = j.value("repeat", false);
  e.lic = j.value("lic", -1LL);
  e.rule = j.value("rule", "");
  e.certainty = j.value("certainty", -1.0);
  e.app = j.value("app", -1);
  if (j.contains("objs")) e.objs = j["objs"].get<std::vector<std::string>>();
  e.feature = j.value("feature", "");
  e.confirmed = j.value("confirmed", false);
  e.reason = j.value("reason", "");
  if (j.contains("missing")) e.missing = j["missing"].get<std::vector<std::string>>();
  e.kind = j.value("kind", "");
  e.provenance = j.value("provenance", "");
  e.exit_code = j.value("exit", -1);
  e.global_certainty = j.value("global_certainty", -1.0);
  e.live_defaults = j.value("live_defaults", -1);
  return e;
}

}  // namespace

std::string trace_to_jsonl(const std::vector<TraceEvent>& events) {
  std::ostringstream out;
  for (const auto& e : events) out << event_to_json(e).dump() << "\n";
  return out.str();
}

std::vector<TraceEvent> trace_from_jsonl(const std::string& text) {
  std::vector<TraceEvent> events;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed trace line", lineno);
    events.push_back(event_from_json(j));
  }
  return events;
}

}  // namespace increvise
