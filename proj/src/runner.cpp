#include "increvise/runner.hpp"

#include <sstream>

namespace increvise {

RunArtifacts run_incremental(const Scenario& scenario, const RuleRegistry& rules,
                             const Lexicon& lexicon, EngineConfig config) {
  Engine engine(lexicon, rules, std::move(config));
  RunArtifacts out;
  out.exit_code = engine.run(scenario);
  out.trace = engine.state().trace;
  out.transcript = engine.transcript_line();
  out.effective = effective_content(out.trace);
  out.metrics = compute_metrics(out.trace);
  return out;
}

RunArtifacts run_batch(const Scenario& scenario, const Lexicon& lexicon, EngineConfig config) {
  BatchResult res = batch_generate(scenario, lexicon, std::move(config));
  RunArtifacts out;
  out.exit_code = res.ok ? 0 : 2;
  out.trace = res.trace;
  out.effective = effective_content(out.trace);
  out.metrics = compute_metrics(out.trace);
  std::ostringstream line;
  for (size_t i = 0; i < out.effective.size(); ++i) {
    if (i) line << " ";
    line << out.effective[i];
  }
  out.transcript = line.str();
  if (!res.ok) {
    std::ostringstream err;
    err << "underspecified scenario:";
    for (const auto& report : res.missing) {
      err << " " << report.obj << "{";
      bool first = true;
      for (Feature f : report.missing) {
        if (!first) err << ",";
        err << feature_name(f);
        first = false;
      }
      if (report.structural_no_head) err << (report.missing.empty() ? "" : ",") << "no-head";
      err << "}";
    }
    out.error = err.str();
  }
  return out;
}

}  // namespace increvise
