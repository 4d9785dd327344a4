#pragma once

// Where the time went. A summary splits a run's wall time into the four
// phases (simulate, debug, score, transform), reports each phase's share of
// the total, and, when a manual-debugging baseline is known, the speedup the
// automated loop achieved over it.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "meic/common.hpp"
#include "meic/metrics/fixrate.hpp"

namespace meic::metrics {

struct PhaseBreakdown {
  double simulate_s = 0.0;
  double debug_s = 0.0;
  double score_s = 0.0;
  double transform_s = 0.0;

  double total() const { return simulate_s + debug_s + score_s + transform_s; }
};

struct PhaseShare {
  std::string phase;
  double seconds = 0.0;
  double percent = 0.0;  // of the phase total, so shares always sum to 100
};

struct TimingSummary {
  PhaseBreakdown phases;
  double total_s = 0.0;
  std::vector<PhaseShare> shares;  // simulate, debug, score, transform order
  double baseline_s = 0.0;         // 0 means no baseline known
  double speedup = 0.0;            // baseline over total, 0 without a baseline
};

inline TimingSummary timing_summary(const PhaseBreakdown& phases, double baseline_s = 0.0) {
  if (phases.simulate_s < 0 || phases.debug_s < 0 || phases.score_s < 0 ||
      phases.transform_s < 0)
    throw Error("phase durations cannot be negative");
  if (baseline_s < 0) throw Error("baseline seconds cannot be negative");
  double total = phases.total();
  if (total <= 0) throw Error("timing summary needs a positive total");

  TimingSummary s;
  s.phases = phases;
  s.total_s = total;
  s.shares = {{"Simulate", phases.simulate_s, 100.0 * phases.simulate_s / total},
              {"Debug", phases.debug_s, 100.0 * phases.debug_s / total},
              {"Score", phases.score_s, 100.0 * phases.score_s / total},
              {"Transform", phases.transform_s, 100.0 * phases.transform_s / total}};
  s.baseline_s = baseline_s;
  if (baseline_s > 0) s.speedup = baseline_s / total;
  return s;
}

// Aligned phase table; shares print with one decimal, the speedup with two.
inline std::string render_timing_summary(const TimingSummary& s) {
  using metrics_detail::format_fixed;

  size_t name_w = std::string("Transform").size();
  size_t sec_w = 0;
  for (const PhaseShare& row : s.shares)
    sec_w = std::max(sec_w, format_fixed(row.seconds, 1).size());
  sec_w = std::max(sec_w, format_fixed(s.total_s, 1).size()) + 1;  // trailing 's'

  auto pad_left = [](const std::string& v, size_t w) {
    return std::string(w > v.size() ? w - v.size() : 0, ' ') + v;
  };
  auto pad_right = [](const std::string& v, size_t w) {
    return v + std::string(w > v.size() ? w - v.size() : 0, ' ');
  };

  std::string out = pad_right("Phase", name_w) + "  " + pad_left("Time", sec_w) + "   Share\n";
  for (const PhaseShare& row : s.shares) {
    out += pad_right(row.phase, name_w) + "  " + pad_left(format_fixed(row.seconds, 1) + "s", sec_w) +
           "  " + pad_left(format_fixed(row.percent, 1) + "%", 6) + "\n";
  }
  out += pad_right("Total", name_w) + "  " + pad_left(format_fixed(s.total_s, 1) + "s", sec_w) +
         "  " + pad_left("100.0%", 6) + "\n";
  if (s.baseline_s > 0) {
    out += "Speedup: " + format_fixed(s.speedup, 2) + "x against a " +
           format_fixed(s.baseline_s, 1) + "s baseline\n";
  }
  return out;
}

inline nlohmann::ordered_json timing_json(const TimingSummary& s) {
  nlohmann::ordered_json j;
  j["record"] = "timing-summary";
  j["total_s"] = s.total_s;
  j["phases"] = nlohmann::ordered_json::array();
  for (const PhaseShare& row : s.shares)
    j["phases"].push_back(
        {{"phase", row.phase}, {"seconds", row.seconds}, {"percent", row.percent}});
  j["baseline_s"] = s.baseline_s;
  j["speedup"] = s.speedup;
  return j;
}

// Optional manual-debugging baselines, keyed by (module, kind):
//   { "adder8": { "syntax": 380.0, "function": 421.5 }, ... }
inline std::map<std::pair<std::string, std::string>, double> load_baselines(
    const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error("baseline document must be a JSON object");
  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& [module, kinds] : doc.items()) {
    if (!kinds.is_object())
      throw Error("baseline entry for '" + module + "' must map kinds to seconds");
    for (const auto& [kind, seconds] : kinds.items()) {
      if (!seconds.is_number() || seconds.get<double>() <= 0)
        throw Error("baseline for " + module + "/" + kind + " must be positive seconds");
      out[{module, kind}] = seconds.get<double>();
    }
  }
  if (out.empty()) throw Error("baseline document holds no entries");
  return out;
}

}  // namespace meic::metrics
