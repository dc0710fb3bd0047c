#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "increvise/runner.hpp"
#include "increvise/trace.hpp"

namespace py = pybind11;
using namespace increvise;

namespace {

EngineConfig make_config(const std::string& lang, double threshold, long long time_limit,
                         int max_defaults, double fluency) {
  EngineConfig config;
  config.lang = lang;
  config.threshold = threshold;
  config.time_limit = time_limit;
  config.max_defaults = max_defaults;
  config.fluency = fluency;
  return config;
}

py::dict artifacts_to_dict(const RunArtifacts& run) {
  py::dict out;
  out["exit_code"] = run.exit_code;
  out["transcript"] = run.transcript;
  out["effective"] = run.effective;
  out["trace_jsonl"] = trace_to_jsonl(run.trace);
  py::dict metrics;
  metrics["mean_token_delay"] = run.metrics.mean_token_delay;
  metrics["max_gap"] = run.metrics.max_gap;
  metrics["repair_count"] = run.metrics.repair_count;
  metrics["retracted_token_count"] = run.metrics.retracted_token_count;
  metrics["defaults_applied"] = run.metrics.defaults_applied;
  metrics["defaults_coincided"] = run.metrics.defaults_coincided;
  metrics["final_global_certainty"] = run.metrics.final_global_certainty;
  out["metrics"] = metrics;
  if (!run.error.empty()) out["error"] = run.error;
  return out;
}

}  // namespace

PYBIND11_MODULE(_increvise, m) {
  m.doc() = "incremental sentence generation with certainty-gated assumptions";

  m.def(
      "generate",
      [](const std::string& scenario_text, const std::string& rules_text,
         const std::string& lexicon_text, const std::string& lang, double threshold,
         long long time_limit, int max_defaults, double fluency) {
        Scenario scenario = parse_scenario(scenario_text);
        RuleRegistry rules = parse_rules(rules_text);
        Lexicon lexicon = load_lexicon(lexicon_text);
        return artifacts_to_dict(run_incremental(
            scenario, rules, lexicon,
            make_config(lang, threshold, time_limit, max_defaults, fluency)));
      },
      py::arg("scenario"), py::arg("rules"), py::arg("lexicon"), py::arg("lang") = "en",
      py::arg("threshold") = 0.7, py::arg("time_limit") = 200, py::arg("max_defaults") = 3,
      py::arg("fluency") = 0.0,
      "Incremental run over scenario text; returns transcript, trace and metrics.");

  m.def(
      "batch",
      [](const std::string& scenario_text, const std::string& lexicon_text,
         const std::string& lang) {
        Scenario scenario = parse_scenario(scenario_text);
        Lexicon lexicon = load_lexicon(lexicon_text);
        return artifacts_to_dict(
            run_batch(scenario, lexicon, make_config(lang, 0.7, 200, 3, 0.0)));
      },
      py::arg("scenario"), py::arg("lexicon"), py::arg("lang") = "en",
      "Everything consumed at t=0 with assumptions disabled; the content oracle.");

  m.def(
      "equivalent_content",
      [](const std::string& trace_a, const std::string& trace_b) {
        return equivalent_content(trace_from_jsonl(trace_a), trace_from_jsonl(trace_b));
      },
      py::arg("trace_a"), py::arg("trace_b"),
      "Compare the final effective token sequences of two JSONL traces.");

  m.def(
      "compute_metrics",
      [](const std::string& trace_jsonl) {
        RunMetrics m2 = compute_metrics(trace_from_jsonl(trace_jsonl));
        py::dict out;
        out["mean_token_delay"] = m2.mean_token_delay;
        out["max_gap"] = m2.max_gap;
        out["repair_count"] = m2.repair_count;
        out["retracted_token_count"] = m2.retracted_token_count;
        out["defaults_applied"] = m2.defaults_applied;
        out["defaults_coincided"] = m2.defaults_coincided;
        out["final_global_certainty"] = m2.final_global_certainty;
        return out;
      },
      py::arg("trace_jsonl"), "Metrics record for a JSONL trace.");

  m.def(
      "effective_content",
      [](const std::string& trace_jsonl) {
        return effective_content(trace_from_jsonl(trace_jsonl));
      },
      py::arg("trace_jsonl"), "Final effective token sequence of a JSONL trace.");
}
