#pragma once

// Labeled error-dataset construction. Takes clean design bundles, a
// per-category target count, and a seed; emits one directory per generated
// error instance plus a line-delimited manifest. The whole build is a pure
// function of (designs, plan, seed): file bytes and manifest order never
// depend on wall clock or directory layout.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "meic/bundle.hpp"
#include "meic/common.hpp"
#include "meic/inject/category.hpp"
#include "meic/inject/inject.hpp"
#include "meic/inject/sites.hpp"
#include "meic/rng.hpp"
#include "meic/tool/toolchain.hpp"

namespace meic::inject {

constexpr int kDatasetSchemaVersion = 1;

struct DatasetDesign {
  DesignMeta meta;
  DesignBundle bundle;
};

struct DatasetEntry {
  ErrorInstance instance;
  ModuleType module_type = ModuleType::Logic;
  std::string dir;  // instance directory, relative to the dataset root
};

// A requested category that a particular design cannot express (no sites).
struct SkipRecord {
  std::string design_id;
  ErrorCategory category = ErrorCategory::PrematureTermination;
};

struct DatasetCounts {
  int arithmetic_syntax = 0;
  int arithmetic_function = 0;
  int logic_syntax = 0;
  int logic_function = 0;

  int total() const {
    return arithmetic_syntax + arithmetic_function + logic_syntax + logic_function;
  }
  bool operator==(const DatasetCounts&) const = default;
};

struct DatasetManifest {
  std::string dataset_id;
  uint64_t generator_seed = 0;
  std::vector<DatasetEntry> entries;
  std::vector<SkipRecord> skips;
  DatasetCounts counts;
};

inline DatasetCounts tally_entries(const std::vector<DatasetEntry>& entries) {
  DatasetCounts c;
  for (const auto& e : entries) {
    bool arith = e.module_type == ModuleType::Arithmetic;
    bool syntax = kind_of(e.instance.category) == ErrorKind::Syntax;
    int& slot = arith ? (syntax ? c.arithmetic_syntax : c.arithmetic_function)
                      : (syntax ? c.logic_syntax : c.logic_function);
    ++slot;
  }
  return c;
}

namespace dataset_detail {

using Json = nlohmann::ordered_json;

inline std::string pad3(int n) {
  std::string s = std::to_string(n);
  while (s.size() < 3) s.insert(s.begin(), '0');
  return s;
}

inline Json site_json(const InjectionSite& site) {
  Json j;
  j["span"] = {site.span.begin, site.span.end};
  j["original_text"] = site.original_text;
  j["mutated_text"] = site.mutated_text;
  j["description"] = site.description;
  return j;
}

inline Json entry_json(const DatasetEntry& e) {
  Json j;
  j["record"] = "instance";
  j["instance_id"] = e.instance.instance_id;
  j["design_id"] = e.instance.design_id;
  j["module_type"] = to_string(e.module_type);
  j["category"] = to_string(e.instance.category);
  j["kind"] = to_string(kind_of(e.instance.category));
  j["seed"] = e.instance.seed;
  j["dir"] = e.dir;
  j["site"] = site_json(e.instance.site);
  return j;
}

inline Json header_json(const DatasetManifest& m) {
  Json j;
  j["record"] = "dataset";
  j["schema_version"] = kDatasetSchemaVersion;
  j["dataset_id"] = m.dataset_id;
  j["generator_seed"] = m.generator_seed;
  Json counts;
  counts["arithmetic"] = {{"syntax", m.counts.arithmetic_syntax},
                          {"function", m.counts.arithmetic_function}};
  counts["logic"] = {{"syntax", m.counts.logic_syntax},
                     {"function", m.counts.logic_function}};
  counts["total"] = m.counts.total();
  j["counts"] = counts;
  Json skips = Json::array();
  for (const auto& s : m.skips)
    skips.push_back({{"design_id", s.design_id}, {"category", to_string(s.category)}});
  j["skips"] = skips;
  return j;
}

}  // namespace dataset_detail

// The manifest file content: one dataset header line, then one line per
// instance in (design, category, ordinal) order.
inline std::string manifest_to_jsonl(const DatasetManifest& m) {
  std::string out = dataset_detail::header_json(m).dump();
  out += '\n';
  for (const auto& e : m.entries) {
    out += dataset_detail::entry_json(e).dump();
    out += '\n';
  }
  return out;
}

// Default plan construction: ask for `per_category` instances of every
// category, capped by what the designs can actually express so the plan is
// always satisfiable. Categories with no sites anywhere get a zero target
// (sparse coverage is normal: a loop-free corpus has no infinite-loop rows).
inline std::map<ErrorCategory, int> feasible_plan(const std::vector<DatasetDesign>& designs,
                                                  int per_category) {
  std::map<ErrorCategory, int> plan;
  for (ErrorCategory cat : all_categories()) {
    size_t available = 0;
    for (const auto& d : designs) available += list_sites(d.bundle.rtl_source, cat).size();
    int target = std::min<int>(per_category, static_cast<int>(available));
    if (target > 0) plan[cat] = target;
  }
  return plan;
}

// Generates the dataset under out_dir. Every design must pass the configured
// toolchain first (the ground truth has to be error-free). Categories a
// design cannot express are recorded as skips; a category whose total site
// supply is smaller than its target is an error before anything is written.
inline DatasetManifest build_dataset(const std::vector<DatasetDesign>& designs,
                                     const std::map<ErrorCategory, int>& plan,
                                     uint64_t seed,
                                     const std::filesystem::path& out_dir,
                                     std::string dataset_id = "",
                                     const tool::ToolchainConfig& toolchain = {}) {
  namespace fs = std::filesystem;
  using dataset_detail::pad3;

  DatasetManifest manifest;
  manifest.generator_seed = seed;
  manifest.dataset_id =
      dataset_id.empty() ? "ds-" + inject_detail::hex64(seed) : std::move(dataset_id);

  // deterministic design order, independent of caller ordering
  std::vector<const DatasetDesign*> order;
  order.reserve(designs.size());
  for (const auto& d : designs) {
    if (d.meta.design_id.empty()) throw Error("dataset design with empty design_id");
    order.push_back(&d);
  }
  std::sort(order.begin(), order.end(), [](const DatasetDesign* a, const DatasetDesign* b) {
    return a->meta.design_id < b->meta.design_id;
  });
  for (size_t i = 1; i < order.size(); ++i) {
    if (order[i - 1]->meta.design_id == order[i]->meta.design_id)
      throw Error("duplicate design_id '" + order[i]->meta.design_id + "' in dataset input");
  }

  for (const auto* d : order) {
    tool::Verdict v = tool::check(d->bundle, toolchain);
    if (v.status != tool::VerdictStatus::Pass)
      throw Error("design '" + d->meta.design_id + "' is not clean: reference classifies as " +
                  tool::to_string(v.status));
  }

  for (const auto& [cat, target] : plan) {
    if (target < 0)
      throw Error("negative target for category '" + to_string(cat) + "'");
  }

  // site discovery + feasibility, before any file is touched
  std::map<ErrorCategory, std::vector<std::vector<InjectionSite>>> sites_by_cat;
  std::vector<std::string> shortfalls;
  for (ErrorCategory cat : all_categories()) {
    auto it = plan.find(cat);
    if (it == plan.end() || it->second == 0) continue;
    auto& per_design = sites_by_cat[cat];
    size_t available = 0;
    for (const auto* d : order) {
      per_design.push_back(list_sites(d->bundle.rtl_source, cat));
      available += per_design.back().size();
    }
    if (available > 0 && available < static_cast<size_t>(it->second)) {
      shortfalls.push_back("'" + to_string(cat) + "' wants " + std::to_string(it->second) +
                           " but only " + std::to_string(available) + " sites exist");
    }
  }
  if (!shortfalls.empty())
    throw Error("dataset plan unsatisfiable: " + join(shortfalls, "; "));

  SplitMix64 master(seed);
  for (ErrorCategory cat : all_categories()) {
    auto it = plan.find(cat);
    if (it == plan.end() || it->second == 0) continue;
    const auto& per_design = sites_by_cat[cat];

    // one child stream per (category, design), minted in canonical order
    std::vector<uint64_t> child_seeds;
    for (size_t i = 0; i < order.size(); ++i) child_seeds.push_back(master.fork());

    size_t available = 0;
    for (size_t i = 0; i < order.size(); ++i) {
      available += per_design[i].size();
      if (per_design[i].empty())
        manifest.skips.push_back({order[i]->meta.design_id, cat});
    }
    if (available == 0) continue;  // sparse coverage: recorded, not fatal

    // round-robin the target across the designs that have sites
    std::vector<int> quota(order.size(), 0);
    int remaining = it->second;
    while (remaining > 0) {
      for (size_t i = 0; i < order.size() && remaining > 0; ++i) {
        if (quota[i] < static_cast<int>(per_design[i].size())) {
          ++quota[i];
          --remaining;
        }
      }
    }

    for (size_t i = 0; i < order.size(); ++i) {
      if (quota[i] == 0) continue;
      const auto* d = order[i];
      SplitMix64 rng(child_seeds[i]);
      std::vector<size_t> picks =
          rng.sample_indices(per_design[i].size(), static_cast<size_t>(quota[i]));
      for (int k = 0; k < quota[i]; ++k) {
        uint64_t inst_seed = rng.fork();
        std::string instance_id =
            d->meta.design_id + "__" + to_string(cat) + "__" + pad3(k);
        DatasetEntry entry;
        entry.module_type = d->meta.module_type;
        entry.dir = "instances/" + instance_id;
        entry.instance = inject_detail::make_instance(
            d->bundle.rtl_source, cat, per_design[i][picks[static_cast<size_t>(k)]],
            inst_seed, d->meta.design_id, instance_id);
        manifest.entries.push_back(std::move(entry));
      }
    }
  }

  // manifest order: design, then category, then ordinal
  std::map<std::string, int> cat_index;
  for (size_t i = 0; i < all_categories().size(); ++i)
    cat_index[to_string(all_categories()[i])] = static_cast<int>(i);
  std::sort(manifest.entries.begin(), manifest.entries.end(),
            [&](const DatasetEntry& a, const DatasetEntry& b) {
              if (a.instance.design_id != b.instance.design_id)
                return a.instance.design_id < b.instance.design_id;
              int ca = cat_index[to_string(a.instance.category)];
              int cb = cat_index[to_string(b.instance.category)];
              if (ca != cb) return ca < cb;
              return a.instance.instance_id < b.instance.instance_id;
            });
  std::sort(manifest.skips.begin(), manifest.skips.end(),
            [&](const SkipRecord& a, const SkipRecord& b) {
              if (a.design_id != b.design_id) return a.design_id < b.design_id;
              return cat_index[to_string(a.category)] < cat_index[to_string(b.category)];
            });
  manifest.counts = tally_entries(manifest.entries);

  fs::create_directories(out_dir);
  for (const auto& e : manifest.entries) {
    const DatasetDesign* d = nullptr;
    for (const auto* cand : order)
      if (cand->meta.design_id == e.instance.design_id) { d = cand; break; }
    fs::path dir = out_dir / e.dir;
    write_file(dir / "reference.v", e.instance.reference_source);
    write_file(dir / "mutated.v", e.instance.mutated_source);
    write_file(dir / "spec.md", d->bundle.spec_text);
    write_file(dir / "testbench.v", d->bundle.testbench_source);
    dataset_detail::Json meta = dataset_detail::entry_json(e);
    meta["dataset_id"] = manifest.dataset_id;
    meta["schema_version"] = kDatasetSchemaVersion;
    write_file(dir / "instance.json", meta.dump(2) + "\n");
  }
  write_file(out_dir / "manifest.jsonl", manifest_to_jsonl(manifest));
  return manifest;
}

// Reads a generated instance directory back into memory as a work bundle:
// the mutated source plus the design's spec and testbench.
inline DesignBundle load_instance_bundle(const std::filesystem::path& dir) {
  DesignBundle b;
  b.rtl_source = read_file(dir / "mutated.v");
  b.spec_text = read_file(dir / "spec.md");
  b.testbench_source = read_file(dir / "testbench.v");
  return b;
}

}  // namespace meic::inject
