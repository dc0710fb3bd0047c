#pragma once

#include <string>
#include <vector>

#include "increvise/trace.hpp"
#include "increvise/types.hpp"

namespace increvise {

// Quantifies the fluency/reliability trade-off of one run.
struct RunMetrics {
  double mean_token_delay = 0.0;  // emission t - licensing t, final tokens only
  Tick max_gap = 0;               // longest silence before the last spoken word
  int repair_count = 0;
  int retracted_token_count = 0;
  int defaults_applied = 0;
  int defaults_coincided = 0;  // applications fully confirmed by later input
  double final_global_certainty = 1.0;

  bool operator==(const RunMetrics&) const = default;
};

RunMetrics compute_metrics(const std::vector<TraceEvent>& trace);

// Final effective token sequence: retracted tokens and repair markers
// dropped, re-spoken material collapsed onto its final occurrence.
std::vector<std::string> effective_content(const std::vector<TraceEvent>& trace);

bool equivalent_content(const std::vector<TraceEvent>& trace_a,
                        const std::vector<TraceEvent>& trace_b);

std::string metrics_to_json(const RunMetrics& metrics);

}  // namespace increvise
