#include "increvise/metrics.hpp"

#include <algorithm>

#include "json.hpp"

namespace increvise {

RunMetrics compute_metrics(const std::vector<TraceEvent>& trace) {
  RunMetrics m;
  long long delay_sum = 0;
  int delay_count = 0;
  Tick prev_speech = 0;
  Tick last_speech = 0;
  for (const auto& e : trace) {
    if (e.type == "token") {
      if (e.retracted) {
        m.retracted_token_count++;
      } else {
        if (e.lic >= 0) {
          delay_sum += (e.t - e.lic);
          delay_count++;
        }
      }
    }
    if (e.is_speech()) {
      m.max_gap = std::max(m.max_gap, e.t - prev_speech);
      prev_speech = e.t;
      last_speech = e.t;
    }
    if (e.type == "repair") m.repair_count++;
    if (e.type == "default_applied") m.defaults_applied++;
    if (e.type == "coincide" && e.confirmed) m.defaults_coincided++;
    if (e.type == "end") m.final_global_certainty = e.global_certainty;
  }
  (void)last_speech;
  if (delay_count > 0) {
    m.mean_token_delay = static_cast<double>(delay_sum) / delay_count;
  }
  return m;
}

std::vector<std::string> effective_content(const std::vector<TraceEvent>& trace) {
  // Tokens carry their final retracted flag; a repeat additionally supersedes
  // the most recent live occurrence of the same text from the same object.
  struct Item {
    std::string text;
    std::string obj;
  };
  std::vector<Item> items;
  for (const auto& e : trace) {
    if (e.type != "token" || e.retracted) continue;
    if (e.repeat) {
      for (auto it = items.rbegin(); it != items.rend(); ++it) {
        if (it->obj == e.obj && it->text == e.text) {
          items.erase(std::next(it).base());
          break;
        }
      }
    }
    items.push_back({e.text, e.obj});
  }
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.text);
  return out;
}

bool equivalent_content(const std::vector<TraceEvent>& trace_a,
                        const std::vector<TraceEvent>& trace_b) {
  return effective_content(trace_a) == effective_content(trace_b);
}

std::string metrics_to_json(const RunMetrics& m) {
  nlohmann::ordered_json j;
  j["mean_token_delay"] = m.mean_token_delay;
  j["max_gap"] = m.max_gap;
  j["repair_count"] = m.repair_count;
  j["retracted_token_count"] = m.retracted_token_count;
  j["defaults_applied"] = m.defaults_applied;
  j["defaults_coincided"] = m.defaults_coincided;
  j["final_global_certainty"] = m.final_global_certainty;
  return j.dump();
}

}  // namespace increvise
