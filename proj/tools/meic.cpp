// Command line driver: dataset generation, single repair runs, batch
// evaluation, and report rendering on top of the library. Option values
// merge as defaults, then the config file, then MEIC_* environment
// variables, then flags; the winning configuration is echoed into every
// run directory as config.json.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "meic/agent/client.hpp"
#include "meic/inject/dataset.hpp"
#include "meic/inject/inject.hpp"
#include "meic/metrics/fixrate.hpp"
#include "meic/metrics/timing.hpp"
#include "meic/pipeline/run.hpp"
#include "meic/repo/store.hpp"
#include "meic/tool/testbench.hpp"
#include "meic/tool/toolchain.hpp"
#include "meic/tool/vectors.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Options {
  uint64_t seed = 1;
  int max_iters = 10;
  double temperature_debug = 0.7;
  double temperature_score = 0.1;
  int rollback_min_score = 60;
  double rollback_min_completeness = 0.70;
  std::string backend = "builtin-mock";
  std::string agent_backend = "scripted:oracle";
  std::string scorer_backend = "auto";  // derived from agent_backend by default
  std::string endpoint;
  std::string credential_env = "MEIC_API_KEY";
  std::string compile_cmd;
  std::string simulate_cmd;
  int parallel = 1;
  int repeats = 1;
  std::string out = "meic-out";
};

// The scorer follows the debug agent's transport unless overridden: over
// HTTP both talk to the same endpoint, for scripted debuggers a fixed
// accepting score keeps the loop moving.
std::string effective_scorer_backend(const Options& o) {
  if (o.scorer_backend != "auto") return o.scorer_backend;
  if (o.agent_backend == "http") return "http";
  return "scripted:score:85";
}

meic::pipeline::PipelineConfig make_pipeline_config(const Options& o) {
  meic::pipeline::PipelineConfig cfg;
  cfg.max_iterations = o.max_iters;
  cfg.toolchain.backend = meic::tool::tool_backend_from_string(o.backend);
  cfg.toolchain.compile_command_template = o.compile_cmd;
  cfg.toolchain.simulate_command_template = o.simulate_cmd;
  cfg.debug_agent = meic::agent::debug_defaults();
  cfg.debug_agent.backend = o.agent_backend;
  cfg.debug_agent.temperature = o.temperature_debug;
  cfg.debug_agent.endpoint = o.endpoint;
  cfg.debug_agent.credential_env = o.credential_env;
  cfg.scorer_agent = meic::agent::scorer_defaults();
  cfg.scorer_agent.backend = effective_scorer_backend(o);
  cfg.scorer_agent.temperature = o.temperature_score;
  cfg.scorer_agent.endpoint = o.endpoint;
  cfg.scorer_agent.credential_env = o.credential_env;
  cfg.rollback.min_score = o.rollback_min_score;
  cfg.rollback.min_completeness = o.rollback_min_completeness;
  return cfg;
}

// ---- design and dataset loading ----

meic::inject::DatasetDesign load_design_dir(const fs::path& dir) {
  auto meta_doc = nlohmann::json::parse(meic::read_file(dir / "design.json"));
  meic::inject::DatasetDesign d;
  d.meta.design_id = meta_doc.at("design_id").get<std::string>();
  d.meta.module_type =
      meic::module_type_from_string(meta_doc.at("module_type").get<std::string>());
  d.bundle.rtl_source = meic::read_file(dir / "design.v");
  d.bundle.spec_text = meic::read_file(dir / "spec.md");
  auto table = meic::tool::vector_table_from_json(
      meic::tool::Json::parse(meic::read_file(dir / "vectors.json")));
  d.bundle.testbench_source = meic::tool::generate_testbench(table);
  return d;
}

std::vector<meic::inject::DatasetDesign> load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw meic::Error("corpus directory '" + dir.string() + "' does not exist");
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory() && fs::exists(entry.path() / "design.json"))
      subdirs.push_back(entry.path());
  std::sort(subdirs.begin(), subdirs.end());
  if (subdirs.empty()) throw meic::Error("no designs found under '" + dir.string() + "'");
  std::vector<meic::inject::DatasetDesign> designs;
  designs.reserve(subdirs.size());
  for (const fs::path& p : subdirs) designs.push_back(load_design_dir(p));
  return designs;
}

std::map<meic::inject::ErrorCategory, int> load_plan(const fs::path& file) {
  auto doc = nlohmann::json::parse(meic::read_file(file));
  if (!doc.is_object()) throw meic::Error("plan file must be a JSON object of category counts");
  std::map<meic::inject::ErrorCategory, int> plan;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_number_integer())
      throw meic::Error("plan count for '" + key + "' must be an integer");
    plan[meic::inject::category_from_string(key)] = value.get<int>();
  }
  if (plan.empty()) throw meic::Error("plan file holds no categories");
  return plan;
}

struct ManifestEntry {
  std::string instance_id;
  std::string design_id;
  std::string module_type;
  std::string category;
  std::string kind;
  std::string dir;
};

struct LoadedManifest {
  ordered_json header;
  std::vector<ManifestEntry> entries;
};

LoadedManifest load_manifest(const fs::path& dataset_dir) {
  fs::path manifest = dataset_dir / "manifest.jsonl";
  if (!fs::exists(manifest))
    throw meic::Error("no manifest.jsonl under '" + dataset_dir.string() + "'");
  auto lines = meic::split_lines(meic::read_file(manifest));
  if (lines.empty()) throw meic::Error("manifest is empty");

  LoadedManifest out;
  out.header = ordered_json::parse(lines[0]);
  if (out.header.value("record", "") != "dataset")
    throw meic::Error("manifest does not start with a dataset header");
  int schema = out.header.value("schema_version", -1);
  if (schema != meic::inject::kDatasetSchemaVersion)
    throw meic::Error("manifest schema version " + std::to_string(schema) +
                      " does not match the supported version " +
                      std::to_string(meic::inject::kDatasetSchemaVersion));

  for (size_t i = 1; i < lines.size(); ++i) {
    if (meic::trim(lines[i]).empty()) continue;
    auto j = nlohmann::json::parse(lines[i]);
    ManifestEntry e;
    e.instance_id = j.at("instance_id").get<std::string>();
    e.design_id = j.at("design_id").get<std::string>();
    e.module_type = j.at("module_type").get<std::string>();
    e.category = j.at("category").get<std::string>();
    e.kind = j.at("kind").get<std::string>();
    e.dir = j.at("dir").get<std::string>();
    out.entries.push_back(std::move(e));
  }
  if (out.entries.empty()) throw meic::Error("manifest lists no instances");
  return out;
}

// ---- rendering ----

std::string render_timeline(const ordered_json& report) {
  std::string out = "iter  prompt    score  complete  decision              verdict\n";
  for (const auto& rec : report.at("records")) {
    std::string decision = rec.at("accepted").get<bool>()
                               ? std::string("accept")
                               : "rollback(" + rec.at("rollback_reason").get<std::string>() + ")";
    std::string verdict = rec.at("verdict").get<std::string>();
    if (verdict.empty()) verdict = "-";
    char line[160];
    std::snprintf(line, sizeof line, "%4d  %-8s  %5d  %8.2f  %-20s  %s\n",
                  rec.at("iteration").get<int>(),
                  rec.at("prompt_kind").get<std::string>().c_str(),
                  rec.at("score").get<int>(), rec.at("completeness").get<double>(),
                  decision.c_str(), verdict.c_str());
    out += line;
    std::string failure = rec.value("failure", "");
    if (!failure.empty()) out += "      note: " + failure + "\n";
  }
  if (report.at("records").empty()) out += "(no iterations were needed)\n";
  return out;
}

std::string status_line(const ordered_json& report) {
  int iters = report.at("iterations").get<int>();
  std::string s = report.at("status").get<std::string>() + " (" + std::to_string(iters) +
                  (iters == 1 ? " iteration)" : " iterations)");
  std::string abort_reason = report.value("abort_reason", "");
  if (!abort_reason.empty()) s += " - " + abort_reason;
  return s;
}

// ---- subcommand state ----

struct InjectArgs {
  std::string corpus = "corpus";
  std::string plan_file;
  int per_category = 3;
  std::string dataset_id;
};

struct RunArgs {
  std::string path;
};

struct BatchArgs {
  std::string dataset;
  std::string baselines_file;
};

struct ReportArgs {
  std::string path;
};

int cmd_inject(const Options& opt, const InjectArgs& args) {
  using meic::inject::ErrorCategory;

  std::vector<meic::inject::DatasetDesign> designs = load_corpus(args.corpus);
  std::map<ErrorCategory, int> plan =
      args.plan_file.empty() ? meic::inject::feasible_plan(designs, args.per_category)
                             : load_plan(args.plan_file);

  meic::inject::DatasetManifest manifest =
      meic::inject::build_dataset(designs, plan, opt.seed, opt.out, args.dataset_id);

  std::map<ErrorCategory, int> by_category;
  for (const auto& entry : manifest.entries) ++by_category[entry.instance.category];

  std::cout << "dataset " << manifest.dataset_id << " written to " << opt.out << "\n\n";
  std::cout << "instances per category\n";
  for (ErrorCategory cat : meic::inject::all_categories()) {
    auto it = by_category.find(cat);
    if (it == by_category.end()) continue;
    std::string name = meic::inject::to_string(cat);
    std::cout << "  " << name << std::string(name.size() < 36 ? 36 - name.size() : 1, ' ')
              << it->second << "\n";
  }
  std::cout << "\ncounts by module type and kind\n";
  std::cout << "  arithmetic  syntax " << manifest.counts.arithmetic_syntax << "  function "
            << manifest.counts.arithmetic_function << "\n";
  std::cout << "  logic       syntax " << manifest.counts.logic_syntax << "  function "
            << manifest.counts.logic_function << "\n";
  std::cout << "  total       " << manifest.counts.total() << "\n";
  if (!manifest.skips.empty()) {
    std::cout << "\nskipped (no applicable sites)\n";
    for (const auto& s : manifest.skips)
      std::cout << "  " << s.design_id << ": " << meic::inject::to_string(s.category) << "\n";
  }
  std::cout << "\nmanifest: " << (fs::path(opt.out) / "manifest.jsonl").string() << "\n";
  return 0;
}

// A runnable path is either a dataset instance directory (mutated design,
// spec, bench, plus the reference it was derived from) or a clean design
// directory in the corpus layout.
meic::pipeline::RunInputs load_run_inputs(const fs::path& path) {
  meic::pipeline::RunInputs in;
  if (fs::exists(path / "instance.json")) {
    auto meta = nlohmann::json::parse(meic::read_file(path / "instance.json"));
    in.run_id = meta.at("instance_id").get<std::string>();
    in.bundle = meic::inject::load_instance_bundle(path);
    in.reference_source = meic::read_file(path / "reference.v");
    return in;
  }
  if (fs::exists(path / "design.json")) {
    meic::inject::DatasetDesign d = load_design_dir(path);
    in.run_id = d.meta.design_id;
    in.bundle = d.bundle;
    in.reference_source = d.bundle.rtl_source;
    return in;
  }
  throw meic::Error("'" + path.string() + "' is neither an instance nor a design directory");
}

int cmd_run(const Options& opt, const RunArgs& args) {
  meic::pipeline::RunInputs in = load_run_inputs(args.path);
  meic::pipeline::PipelineConfig cfg = make_pipeline_config(opt);

  fs::path run_dir = fs::path(opt.out) / in.run_id;
  meic::pipeline::RunReport report = meic::pipeline::run(in, cfg, run_dir);
  ordered_json j = meic::pipeline::report_json(report, true);
  meic::write_file(run_dir / "report.json", j.dump(2) + "\n");

  std::cout << in.run_id << ": " << status_line(j) << "\n";
  std::cout << render_timeline(j);
  std::cout << "landed on version v" << report.final_version_id << " ("
            << report.final_verdict << "), store: " << run_dir.string() << "\n";
  return report.status == meic::pipeline::RunStatus::Fixed ? 0 : 1;
}

int cmd_batch(const Options& opt, const BatchArgs& args) {
  LoadedManifest manifest = load_manifest(args.dataset);
  if (opt.repeats < 1) throw meic::Error("repeats must be >= 1");

  std::vector<meic::pipeline::RunInputs> items;
  items.reserve(manifest.entries.size());
  std::vector<std::vector<std::string>> vector_ids;
  for (const ManifestEntry& e : manifest.entries) {
    fs::path dir = fs::path(args.dataset) / e.dir;
    meic::pipeline::RunInputs in;
    in.run_id = e.instance_id;
    in.bundle = meic::inject::load_instance_bundle(dir);
    in.reference_source = meic::read_file(dir / "reference.v");
    std::vector<std::string> ids;
    if (auto table = meic::tool::parse_vector_annotations(in.bundle.testbench_source))
      for (const auto& row : table->rows) ids.push_back(row.id);
    if (ids.empty()) ids.push_back("bench");
    vector_ids.push_back(std::move(ids));
    items.push_back(std::move(in));
  }

  meic::pipeline::PipelineConfig cfg = make_pipeline_config(opt);
  fs::path out_dir(opt.out);

  std::map<std::pair<std::string, std::string>, double> baselines;
  if (!args.baselines_file.empty())
    baselines = meic::metrics::load_baselines(
        nlohmann::json::parse(meic::read_file(args.baselines_file)));

  std::string report_lines;
  {
    ordered_json head;
    head["record"] = "batch";
    head["dataset_id"] = manifest.header.value("dataset_id", "");
    head["runs"] = items.size();
    head["repeats"] = opt.repeats;
    report_lines += head.dump() + "\n";
  }

  std::vector<std::vector<meic::metrics::FixOutcome>> per_repeat;
  meic::metrics::PhaseBreakdown phases;
  double baseline_total = 0.0;
  int fixed = 0, unfixed = 0, aborted = 0;

  for (int r = 1; r <= opt.repeats; ++r) {
    fs::path repeat_dir = out_dir / ("r" + std::to_string(r));
    std::vector<meic::pipeline::RunReport> reports =
        meic::pipeline::run_batch(items, cfg, repeat_dir, opt.parallel);

    std::vector<meic::metrics::FixOutcome> outcomes;
    for (size_t i = 0; i < reports.size(); ++i) {
      const meic::pipeline::RunReport& rep = reports[i];
      const ManifestEntry& entry = manifest.entries[i];
      switch (rep.status) {
        case meic::pipeline::RunStatus::Fixed: ++fixed; break;
        case meic::pipeline::RunStatus::Unfixed: ++unfixed; break;
        case meic::pipeline::RunStatus::Aborted: ++aborted; break;
      }
      phases.simulate_s += rep.phases.simulate_s;
      phases.debug_s += rep.phases.debug_s;
      phases.score_s += rep.phases.score_s;
      phases.transform_s += rep.phases.transform_s;

      ordered_json line = meic::pipeline::report_json(rep, false);
      line["repeat"] = r;
      report_lines += line.dump() + "\n";

      // the fix flag comes from a fresh check of the landed code, not from
      // the run's own bookkeeping
      meic::tool::Verdict final_verdict;  // defaults are never read: status set below
      final_verdict.status = meic::tool::VerdictStatus::ToolFailure;
      if (rep.final_version_id >= 0) {
        fs::path code = repeat_dir / rep.run_id / ("v" + std::to_string(rep.final_version_id)) /
                        "code.v";
        meic::DesignBundle landed = items[i].bundle;
        landed.rtl_source = meic::read_file(code);
        final_verdict = meic::tool::check(landed, cfg.toolchain);
      }
      outcomes.push_back(meic::metrics::outcome_from_verdict(
          entry.instance_id, entry.category, entry.kind, entry.design_id, vector_ids[i],
          final_verdict));

      if (!baselines.empty()) {
        auto it = baselines.find({entry.design_id, entry.kind});
        if (it == baselines.end())
          throw meic::Error("no baseline for " + entry.design_id + "/" + entry.kind);
        baseline_total += it->second;
      }
    }
    per_repeat.push_back(std::move(outcomes));
  }

  meic::write_file(out_dir / "reports.jsonl", report_lines);

  meic::metrics::FixRateTable table = meic::metrics::aggregate(per_repeat);
  std::string grid = meic::metrics::render_fix_rate_table(table);
  meic::write_file(out_dir / "fixrate.txt", grid);
  meic::write_file(out_dir / "fixrate.json",
                   meic::metrics::fix_rate_json(table).dump(2) + "\n");

  meic::metrics::TimingSummary timing = meic::metrics::timing_summary(phases, baseline_total);
  std::string timing_text = meic::metrics::render_timing_summary(timing);
  meic::write_file(out_dir / "timing.txt", timing_text);
  meic::write_file(out_dir / "timing.json",
                   meic::metrics::timing_json(timing).dump(2) + "\n");

  std::cout << "batch of " << items.size() << " instance" << (items.size() == 1 ? "" : "s")
            << " x " << opt.repeats << " repeat" << (opt.repeats == 1 ? "" : "s") << ": "
            << fixed << " fixed, " << unfixed << " unfixed, " << aborted << " aborted\n\n";
  std::cout << grid << "\n" << timing_text;
  std::cout << "store: " << out_dir.string() << "\n";
  return aborted == 0 ? 0 : 1;
}

int cmd_report(const ReportArgs& args) {
  fs::path path(args.path);
  if (fs::exists(path / "report.json")) {
    auto j = ordered_json::parse(meic::read_file(path / "report.json"));
    std::cout << j.at("run_id").get<std::string>() << ": " << status_line(j) << "\n";
    std::cout << render_timeline(j);
    if (j.contains("phases")) {
      const auto& p = j.at("phases");
      meic::metrics::PhaseBreakdown phases;
      phases.simulate_s = p.at("simulate_s").get<double>();
      phases.debug_s = p.at("debug_s").get<double>();
      phases.score_s = p.at("score_s").get<double>();
      phases.transform_s = p.at("transform_s").get<double>();
      if (phases.total() > 0)
        std::cout << "\n" << meic::metrics::render_timing_summary(
                                 meic::metrics::timing_summary(phases));
    }
    return 0;
  }
  if (fs::exists(path / "reports.jsonl")) {
    auto lines = meic::split_lines(meic::read_file(path / "reports.jsonl"));
    int fixed = 0, unfixed = 0, aborted = 0, runs = 0;
    for (size_t i = 1; i < lines.size(); ++i) {
      if (meic::trim(lines[i]).empty()) continue;
      auto j = nlohmann::json::parse(lines[i]);
      ++runs;
      std::string status = j.at("status").get<std::string>();
      if (status == "Fixed") ++fixed;
      else if (status == "Unfixed") ++unfixed;
      else ++aborted;
    }
    std::cout << runs << " runs: " << fixed << " fixed, " << unfixed << " unfixed, " << aborted
              << " aborted\n\n";
    if (fs::exists(path / "fixrate.txt")) std::cout << meic::read_file(path / "fixrate.txt") << "\n";
    if (fs::exists(path / "timing.txt")) std::cout << meic::read_file(path / "timing.txt");
    return 0;
  }
  throw meic::Error("no run or batch store at '" + path.string() + "'");
}

// CLI11 applies a config file before it looks at the environment, which
// would let the file shadow MEIC_* variables. The required layering is
// defaults, then config file, then environment, then flags, so set
// environment values are turned into synthetic leading flags here; a flag
// the user actually typed suppresses the injection and therefore wins.
void inject_env_flags(std::vector<std::string>& args) {
  static constexpr std::pair<const char*, const char*> kEnvFlags[] = {
      {"MEIC_SEED", "--seed"},
      {"MEIC_MAX_ITERS", "--max-iters"},
      {"MEIC_TEMPERATURE_DEBUG", "--temperature-debug"},
      {"MEIC_TEMPERATURE_SCORE", "--temperature-score"},
      {"MEIC_ROLLBACK_MIN_SCORE", "--rollback-min-score"},
      {"MEIC_ROLLBACK_MIN_COMPLETENESS", "--rollback-min-completeness"},
      {"MEIC_BACKEND", "--backend"},
      {"MEIC_AGENT_BACKEND", "--agent-backend"},
      {"MEIC_SCORER_BACKEND", "--scorer-backend"},
      {"MEIC_ENDPOINT", "--endpoint"},
      {"MEIC_CREDENTIAL_ENV", "--credential-env"},
      {"MEIC_COMPILE_CMD", "--compile-cmd"},
      {"MEIC_SIMULATE_CMD", "--simulate-cmd"},
      {"MEIC_PARALLEL", "--parallel"},
      {"MEIC_REPEATS", "--repeats"},
      {"MEIC_OUT", "--out"},
  };
  for (const auto& [env, flag] : kEnvFlags) {
    const char* value = std::getenv(env);
    if (value == nullptr || *value == '\0') continue;
    std::string name(flag);
    bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == name || a.rfind(name + "=", 0) == 0;
    });
    if (!given) args.insert(args.begin(), name + "=" + value);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative repair of buggy Verilog designs"};
  app.set_version_flag("--version", "meic 1.0");
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "configuration file (TOML key = value)")
      ->envname("MEIC_CONFIG");

  Options opt;
  app.add_option("--seed", opt.seed, "master seed for dataset generation")
      ->envname("MEIC_SEED");
  app.add_option("--max-iters", opt.max_iters, "iteration budget per run")
      ->envname("MEIC_MAX_ITERS");
  app.add_option("--temperature-debug", opt.temperature_debug, "debug agent temperature")
      ->envname("MEIC_TEMPERATURE_DEBUG");
  app.add_option("--temperature-score", opt.temperature_score, "scorer agent temperature")
      ->envname("MEIC_TEMPERATURE_SCORE");
  app.add_option("--rollback-min-score", opt.rollback_min_score,
                 "reject candidates scoring below this")
      ->envname("MEIC_ROLLBACK_MIN_SCORE");
  app.add_option("--rollback-min-completeness", opt.rollback_min_completeness,
                 "reject candidates shrinking below this ratio")
      ->envname("MEIC_ROLLBACK_MIN_COMPLETENESS");
  app.add_option("--backend", opt.backend, "toolchain backend: builtin-mock or external")
      ->envname("MEIC_BACKEND");
  app.add_option("--agent-backend", opt.agent_backend,
                 "debug agent backend: http or scripted:<name>")
      ->envname("MEIC_AGENT_BACKEND");
  app.add_option("--scorer-backend", opt.scorer_backend,
                 "scorer backend override (default: derived from --agent-backend)")
      ->envname("MEIC_SCORER_BACKEND");
  app.add_option("--endpoint", opt.endpoint, "chat completion endpoint for the http backend")
      ->envname("MEIC_ENDPOINT");
  app.add_option("--credential-env", opt.credential_env,
                 "environment variable holding the API key")
      ->envname("MEIC_CREDENTIAL_ENV");
  app.add_option("--compile-cmd", opt.compile_cmd, "external toolchain compile command")
      ->envname("MEIC_COMPILE_CMD");
  app.add_option("--simulate-cmd", opt.simulate_cmd, "external toolchain simulate command")
      ->envname("MEIC_SIMULATE_CMD");
  app.add_option("--parallel", opt.parallel, "batch worker threads")->envname("MEIC_PARALLEL");
  app.add_option("--repeats", opt.repeats, "batch repetitions to average over")
      ->envname("MEIC_REPEATS");
  app.add_option("--out", opt.out, "output directory")->envname("MEIC_OUT");

  InjectArgs inject_args;
  CLI::App* inject_cmd =
      app.add_subcommand("inject", "generate a dataset of buggy instances from clean designs");
  inject_cmd->add_option("corpus", inject_args.corpus, "directory of clean design directories");
  inject_cmd->add_option("--plan", inject_args.plan_file,
                         "JSON file mapping category ids to instance counts");
  inject_cmd->add_option("--per-category", inject_args.per_category,
                         "instances per category when no plan file is given");
  inject_cmd->add_option("--dataset-id", inject_args.dataset_id, "overrides the derived id");

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "repair one design or dataset instance");
  run_cmd->add_option("path", run_args.path, "instance or design directory")->required();

  BatchArgs batch_args;
  CLI::App* batch_cmd = app.add_subcommand("batch", "run every instance of a dataset");
  batch_cmd->add_option("dataset", batch_args.dataset, "dataset directory with manifest.jsonl")
      ->required();
  batch_cmd->add_option("--baselines", batch_args.baselines_file,
                        "JSON file of manual-debugging seconds keyed by module and kind");

  ReportArgs report_args;
  CLI::App* report_cmd = app.add_subcommand("report", "render a stored run or batch");
  report_cmd->add_option("path", report_args.path, "run or batch output directory")->required();

  std::vector<std::string> args(argv + 1, argv + argc);
  inject_env_flags(args);
  std::reverse(args.begin(), args.end());  // the vector overload parses back to front
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(inject_cmd)) return cmd_inject(opt, inject_args);
    if (app.got_subcommand(run_cmd)) return cmd_run(opt, run_args);
    if (app.got_subcommand(batch_cmd)) return cmd_batch(opt, batch_args);
    return cmd_report(report_args);
  } catch (const std::exception& e) {
    std::cerr << "meic: " << e.what() << "\n";
    return 2;
  }
}
