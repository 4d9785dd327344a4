#pragma once

// Fix-rate accounting. An instance counts as fixed only when every one of
// its test vectors passes on the final landed code, and the rate over a set
// is the percentage of fixed instances. Aggregation averages per-cell rates
// across repeated batches and lays them out as a module-by-kind grid.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "meic/common.hpp"
#include "meic/tool/toolchain.hpp"

namespace meic::metrics {

struct VectorResult {
  std::string vector_id;
  bool pass = false;
};

struct FixOutcome {
  std::string instance_id;
  std::string category;   // taxonomy id; may stay empty for ad-hoc runs
  std::string kind;       // "syntax" or "function"
  std::string module_id;
  bool fixed = false;     // conjunction over every vector result
  std::vector<VectorResult> vectors;
};

inline FixOutcome make_fix_outcome(std::string instance_id, std::string category,
                                   std::string kind, std::string module_id,
                                   std::vector<VectorResult> vectors) {
  if (vectors.empty())
    throw Error("fix outcome for '" + instance_id + "' needs at least one vector result");
  FixOutcome o;
  o.instance_id = std::move(instance_id);
  o.category = std::move(category);
  o.kind = std::move(kind);
  o.module_id = std::move(module_id);
  o.vectors = std::move(vectors);
  o.fixed = std::all_of(o.vectors.begin(), o.vectors.end(),
                        [](const VectorResult& v) { return v.pass; });
  return o;
}

// Per-vector results for one finished run, from an independent re-check of
// the landed code: a pass clears every vector, a behavioral failure clears
// everything off the failing list, and anything that never simulated cleanly
// (syntax error, hang, tool failure) demonstrates nothing.
inline FixOutcome outcome_from_verdict(std::string instance_id, std::string category,
                                       std::string kind, std::string module_id,
                                       const std::vector<std::string>& vector_ids,
                                       const tool::Verdict& verdict) {
  std::set<std::string> failing(verdict.failing_checks.begin(), verdict.failing_checks.end());
  std::vector<VectorResult> vs;
  vs.reserve(vector_ids.size());
  for (const std::string& id : vector_ids) {
    bool pass = false;
    if (verdict.status == tool::VerdictStatus::Pass)
      pass = true;
    else if (verdict.status == tool::VerdictStatus::FunctionError)
      pass = failing.count(id) == 0;
    vs.push_back({id, pass});
  }
  return make_fix_outcome(std::move(instance_id), std::move(category), std::move(kind),
                          std::move(module_id), std::move(vs));
}

// FR = 100 * (instances with every vector passing) / (instances), in percent.
inline double fix_rate(const std::vector<FixOutcome>& outcomes) {
  if (outcomes.empty()) throw Error("fix rate over an empty set is undefined");
  size_t fixed = 0;
  for (const FixOutcome& o : outcomes)
    if (o.fixed) ++fixed;
  return 100.0 * static_cast<double>(fixed) / static_cast<double>(outcomes.size());
}

struct FixRateCell {
  double fix_rate = 0.0;  // averaged across repeats
  int instances = 0;      // per repeat, from the first one
};

struct FixRateTable {
  std::vector<std::string> modules;  // row order, sorted
  std::vector<std::string> kinds;    // column order: syntax before function
  int repeats = 0;
  std::map<std::pair<std::string, std::string>, FixRateCell> cells;
};

namespace metrics_detail {

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string title_kind(const std::string& kind) {
  std::string out = kind;
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

}  // namespace metrics_detail

// Averages per-cell fix rates across repeated batches. Every repeat must
// cover the same module/kind cells; a repeat with holes is reported with the
// full list of what it is missing.
inline FixRateTable aggregate(const std::vector<std::vector<FixOutcome>>& per_repeat) {
  if (per_repeat.empty()) throw Error("aggregation needs at least one repeat");

  using Key = std::pair<std::string, std::string>;
  std::vector<std::map<Key, std::vector<FixOutcome>>> grouped;
  for (const auto& repeat : per_repeat) {
    if (repeat.empty()) throw Error("aggregation got an empty repeat");
    std::map<Key, std::vector<FixOutcome>> cells;
    for (const FixOutcome& o : repeat) cells[{o.module_id, o.kind}].push_back(o);
    grouped.push_back(std::move(cells));
  }

  const auto& base = grouped.front();
  for (size_t r = 1; r < grouped.size(); ++r) {
    std::vector<std::string> missing;
    for (const auto& [key, _] : base)
      if (!grouped[r].count(key)) missing.push_back(key.first + "/" + key.second);
    for (const auto& [key, _] : grouped[r])
      if (!base.count(key)) missing.push_back(key.first + "/" + key.second);
    if (!missing.empty())
      throw Error("inconsistent repeats: repeat " + std::to_string(r + 1) +
                  " disagrees on cells: " + join(missing, ", "));
  }

  FixRateTable table;
  table.repeats = static_cast<int>(per_repeat.size());
  std::set<std::string> modules, kinds;
  for (const auto& [key, outcomes] : base) {
    modules.insert(key.first);
    kinds.insert(key.second);
    FixRateCell cell;
    cell.instances = static_cast<int>(outcomes.size());
    double sum = 0.0;
    for (const auto& cells : grouped) sum += fix_rate(cells.at(key));
    cell.fix_rate = sum / static_cast<double>(grouped.size());
    table.cells[key] = cell;
  }
  table.modules.assign(modules.begin(), modules.end());
  for (const char* k : {"syntax", "function"})
    if (kinds.count(k)) table.kinds.push_back(k);
  for (const std::string& k : kinds)
    if (k != "syntax" && k != "function") table.kinds.push_back(k);
  return table;
}

// Module-by-kind grid with two-decimal percentages and an unweighted average
// row. Cells a batch never exercised print as a dash.
inline std::string render_fix_rate_table(const FixRateTable& table) {
  using metrics_detail::format_fixed;

  size_t name_w = std::string("Average").size();
  for (const std::string& m : table.modules) name_w = std::max(name_w, m.size());

  std::vector<std::string> headers;
  size_t col_w = 0;
  for (const std::string& k : table.kinds) {
    headers.push_back(metrics_detail::title_kind(k) + " FR%");
    col_w = std::max(col_w, headers.back().size());
  }
  col_w = std::max(col_w, std::string("100.00").size());

  auto pad_left = [](const std::string& s, size_t w) {
    return std::string(w > s.size() ? w - s.size() : 0, ' ') + s;
  };
  auto pad_right = [](const std::string& s, size_t w) {
    return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
  };

  std::string out = pad_right("Module", name_w);
  for (const std::string& h : headers) out += "  " + pad_left(h, col_w);
  out += "\n";

  std::vector<double> col_sum(table.kinds.size(), 0.0);
  std::vector<int> col_count(table.kinds.size(), 0);
  for (const std::string& m : table.modules) {
    out += pad_right(m, name_w);
    for (size_t c = 0; c < table.kinds.size(); ++c) {
      auto it = table.cells.find({m, table.kinds[c]});
      if (it == table.cells.end()) {
        out += "  " + pad_left("-", col_w);
        continue;
      }
      out += "  " + pad_left(format_fixed(it->second.fix_rate, 2), col_w);
      col_sum[c] += it->second.fix_rate;
      ++col_count[c];
    }
    out += "\n";
  }

  out += pad_right("Average", name_w);
  for (size_t c = 0; c < table.kinds.size(); ++c) {
    if (col_count[c] == 0) {
      out += "  " + pad_left("-", col_w);
      continue;
    }
    out += "  " + pad_left(format_fixed(col_sum[c] / col_count[c], 2), col_w);
  }
  out += "\n";
  return out;
}

inline nlohmann::ordered_json fix_rate_json(const FixRateTable& table) {
  nlohmann::ordered_json j;
  j["record"] = "fix-rate-table";
  j["repeats"] = table.repeats;
  j["modules"] = table.modules;
  j["kinds"] = table.kinds;
  j["cells"] = nlohmann::ordered_json::array();
  for (const auto& [key, cell] : table.cells) {
    j["cells"].push_back({{"module", key.first},
                          {"kind", key.second},
                          {"fix_rate", cell.fix_rate},
                          {"instances", cell.instances}});
  }
  return j;
}

}  // namespace meic::metrics
