#pragma once

#include <string>
#include <vector>

#include "increvise/types.hpp"

namespace increvise {

// One line of the run trace. The transcript is the subsequence of kinds
// token|repair; everything else is bookkeeping for metrics and debugging.
struct TraceEvent {
  Tick t = 0;
  std::string type;  // token, repair, default_applied, default_retracted,
                     // default_discarded, coincide, stall, consume, end

  // token / repair
  std::string text;
  std::string obj;
  bool retracted = false;
  bool repeat = false;
  Tick lic = -1;

  // rule bookkeeping
  std::string rule;
  double certainty = -1.0;
  int app = -1;
  std::vector<std::string> objs;
  std::string feature;
  bool confirmed = false;
  std::string reason;

  // stall / consume
  std::vector<std::string> missing;
  std::string kind;
  std::string provenance;

  // end
  int exit_code = -1;
  double global_certainty = -1.0;
  int live_defaults = -1;

  bool is_token() const { return type == "token"; }
  bool is_speech() const { return type == "token" || type == "repair"; }
};

std::string trace_to_jsonl(const std::vector<TraceEvent>& events);
std::vector<TraceEvent> trace_from_jsonl(const std::string& text);

}  // namespace increvise
