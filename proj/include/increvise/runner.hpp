#pragma once

#include <string>
#include <vector>

#include "increvise/engine.hpp"
#include "increvise/metrics.hpp"

namespace increvise {

struct RunArtifacts {
  int exit_code = 0;
  std::vector<TraceEvent> trace;
  std::string transcript;             // spoken sequence including markers
  std::vector<std::string> effective; // content after dropping withdrawn parts
  RunMetrics metrics;
  std::string error;                  // batch mode: missing-feature report
};

RunArtifacts run_incremental(const Scenario& scenario, const RuleRegistry& rules,
                             const Lexicon& lexicon, EngineConfig config);

RunArtifacts run_batch(const Scenario& scenario, const Lexicon& lexicon, EngineConfig config);

}  // namespace increvise
