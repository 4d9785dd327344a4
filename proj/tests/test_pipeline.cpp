#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include <stdlib.h>
#include <unistd.h>

#include "meic/inject/inject.hpp"
#include "meic/pipeline/run.hpp"
#include "test_util.hpp"

using meic::DesignBundle;
using meic::inject::ErrorCategory;
using meic::pipeline::DetectionMode;
using meic::pipeline::PipelineConfig;
using meic::pipeline::report_json;
using meic::pipeline::run;
using meic::pipeline::run_batch;
using meic::pipeline::RunInputs;
using meic::pipeline::RunReport;
using meic::pipeline::RunStatus;
using meic::tool::VerdictStatus;

namespace fs = std::filesystem;

namespace {

fs::path unique_dir(const std::string& tag) {
  static int counter = 0;
  auto dir = fs::temp_directory_path() /
             ("meic_pipe_" + tag + "_" + std::to_string(::getpid()) + "_" +
              std::to_string(counter++));
  fs::remove_all(dir);
  return dir;
}

PipelineConfig scripted_config(const std::string& debug_backend,
                               const std::string& scorer_backend = "scripted:score:85") {
  PipelineConfig cfg;
  cfg.debug_agent.backend = debug_backend;
  cfg.scorer_agent.backend = scorer_backend;
  return cfg;
}

// A corpus design with one injected defect, packaged as pipeline input.
RunInputs broken_input(const std::string& design, ErrorCategory category, uint64_t seed = 7) {
  DesignBundle bundle = meic_test::corpus_bundle(design);
  auto instance = meic::inject::inject(bundle.rtl_source, category, seed, design);
  RunInputs in;
  in.run_id = instance.instance_id;
  in.reference_source = instance.reference_source;
  in.bundle = bundle;
  in.bundle.rtl_source = instance.mutated_source;
  return in;
}

RunInputs clean_input(const std::string& design) {
  RunInputs in;
  in.run_id = design + "-clean";
  in.bundle = meic_test::corpus_bundle(design);
  in.reference_source = in.bundle.rtl_source;
  return in;
}

}  // namespace

TEST_CASE("a design that already passes is Fixed before any iteration") {
  fs::path dir = unique_dir("clean");
  RunReport r = run(clean_input("mux2"), scripted_config("scripted:oracle"), dir);

  CHECK(r.status == RunStatus::Fixed);
  CHECK(r.iterations == 0);
  CHECK(r.records.empty());
  CHECK(r.initial_verdict == "Pass");
  CHECK(r.final_verdict == "Pass");
  CHECK(r.final_version_id == 0);

  // the run directory holds the echoed config and the initial version
  CHECK(fs::exists(dir / "config.json"));
  CHECK(meic::read_file(dir / "v0" / "code.v") == meic_test::corpus_source("mux2"));
  CHECK_FALSE(fs::exists(dir / "v1"));
  fs::remove_all(dir);
}

TEST_CASE("the oracle repairs a syntax break in exactly one iteration") {
  fs::path dir = unique_dir("syntax");
  RunInputs in = broken_input("mux2", ErrorCategory::PrematureTermination);
  RunReport r = run(in, scripted_config("scripted:oracle"), dir);

  CHECK(r.status == RunStatus::Fixed);
  CHECK(r.iterations == 1);
  CHECK(r.initial_verdict == "SyntaxError");
  CHECK(r.final_verdict == "Pass");
  CHECK(r.final_version_id == 1);
  REQUIRE(r.records.size() == 1);
  const auto& rec = r.records[0];
  CHECK(rec.prompt_kind == "syntax");
  CHECK(rec.scorer_called);
  CHECK(rec.score == 85);
  CHECK(rec.accepted);
  CHECK(rec.rollback_reason == "none");
  CHECK(rec.verdict == "Pass");
  CHECK(rec.version_id == 1);
  CHECK(rec.failure.empty());

  // independent re-check of the landed code
  DesignBundle landed = in.bundle;
  landed.rtl_source = meic::read_file(dir / "v1" / "code.v");
  CHECK(meic::tool::check(landed, PipelineConfig{}.toolchain).status == VerdictStatus::Pass);
  fs::remove_all(dir);
}

TEST_CASE("the oracle repairs a function break in exactly one iteration") {
  fs::path dir = unique_dir("function");
  RunInputs in = broken_input("adder8", ErrorCategory::LogicalErrorInExpression);
  RunReport r = run(in, scripted_config("scripted:oracle"), dir);

  CHECK(r.status == RunStatus::Fixed);
  CHECK(r.iterations == 1);
  CHECK(r.initial_verdict == "FunctionError");
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].prompt_kind == "function");
  CHECK(r.records[0].verdict == "Pass");
  fs::remove_all(dir);
}

TEST_CASE("a hanging design is presented as a function error and still gets fixed") {
  fs::path dir = unique_dir("hang");
  RunInputs in = broken_input("popcount8", ErrorCategory::InfiniteLoopConstruct);
  RunReport r = run(in, scripted_config("scripted:oracle"), dir);

  CHECK(r.initial_verdict == "Timeout");
  CHECK(r.status == RunStatus::Fixed);
  CHECK(r.iterations == 1);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].prompt_kind == "function");
  fs::remove_all(dir);
}

TEST_CASE("the corruptor is rolled back every round and the initial version stays best") {
  fs::path dir = unique_dir("corrupt");
  RunInputs in = broken_input("rca4", ErrorCategory::UndefinedVariable);
  PipelineConfig cfg = scripted_config("scripted:corruptor");
  RunReport r = run(in, cfg, dir);

  CHECK(r.status == RunStatus::Unfixed);
  CHECK(r.iterations == cfg.max_iterations);
  REQUIRE(r.records.size() == 10);
  for (const auto& rec : r.records) {
    CHECK_FALSE(rec.accepted);
    CHECK(rec.rollback_reason == "incomplete");
    CHECK_FALSE(rec.scorer_called);  // completeness gate fires before the scorer
    CHECK(rec.score == 0);
    CHECK(rec.completeness < 0.7);
    CHECK(rec.verdict.empty());  // rolled-back candidates are never simulated
  }
  CHECK(r.final_version_id == 0);
  CHECK(r.final_verdict == "SyntaxError");

  // all ten rejected candidates are still on disk, after the initial version
  CHECK(fs::exists(dir / "v10" / "code.v"));
  CHECK_FALSE(fs::exists(dir / "v11"));
  CHECK(meic::read_file(dir / "v0" / "code.v") == in.bundle.rtl_source);
  fs::remove_all(dir);
}

TEST_CASE("the staged agent lands exactly at its stage") {
  RunInputs in = broken_input("comparator", ErrorCategory::OperatorMisuse);

  fs::path d3 = unique_dir("staged3");
  RunReport r3 = run(in, scripted_config("scripted:staged:3"), d3);
  CHECK(r3.status == RunStatus::Fixed);
  CHECK(r3.iterations == 3);
  CHECK(r3.records[0].rollback_reason == "incomplete");
  CHECK(r3.records[1].rollback_reason == "incomplete");
  CHECK(r3.records[2].accepted);
  fs::remove_all(d3);

  // a stage past the iteration cap never lands
  fs::path d11 = unique_dir("staged11");
  RunReport r11 = run(in, scripted_config("scripted:staged:11"), d11);
  CHECK(r11.status == RunStatus::Unfixed);
  CHECK(r11.iterations == 10);
  CHECK(r11.final_version_id == 0);
  fs::remove_all(d11);
}

TEST_CASE("a low scorer verdict rolls the candidate back without simulating it") {
  fs::path dir = unique_dir("lowscore");
  RunInputs in = broken_input("mux2", ErrorCategory::IncorrectDataTypeAssignment);
  PipelineConfig cfg = scripted_config("scripted:parrot", "scripted:score:40");
  cfg.max_iterations = 2;
  RunReport r = run(in, cfg, dir);

  CHECK(r.status == RunStatus::Unfixed);
  REQUIRE(r.records.size() == 2);
  for (const auto& rec : r.records) {
    CHECK(rec.scorer_called);
    CHECK(rec.score == 40);
    CHECK(rec.completeness >= 0.99);  // the parrot echoes the full design
    CHECK_FALSE(rec.accepted);
    CHECK(rec.rollback_reason == "low-score");
    CHECK(rec.verdict.empty());
  }
  CHECK(r.final_version_id == 0);
  fs::remove_all(dir);
}

TEST_CASE("an unparseable scorer reply is recorded as a zero score") {
  fs::path dir = unique_dir("noscore");
  RunInputs in = broken_input("mux2", ErrorCategory::IncorrectDataTypeAssignment);
  PipelineConfig cfg = scripted_config("scripted:parrot", "scripted:silent");
  cfg.max_iterations = 1;
  RunReport r = run(in, cfg, dir);

  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].scorer_called);
  CHECK(r.records[0].score == 0);
  CHECK(r.records[0].rollback_reason == "low-score");
  CHECK(r.status == RunStatus::Unfixed);
  fs::remove_all(dir);
}

TEST_CASE("an accepted but still failing candidate becomes the next working base") {
  fs::path dir = unique_dir("accepted");
  RunInputs in = broken_input("adder8", ErrorCategory::LogicalErrorInExpression);
  PipelineConfig cfg = scripted_config("scripted:parrot", "scripted:score:85");
  cfg.max_iterations = 2;
  RunReport r = run(in, cfg, dir);

  CHECK(r.status == RunStatus::Unfixed);
  REQUIRE(r.records.size() == 2);
  for (const auto& rec : r.records) {
    CHECK(rec.accepted);
    CHECK(rec.verdict == "FunctionError");  // parroting the bug keeps it failing
    CHECK(rec.score == 85);
  }
  // the run lands on the accepted candidate, not the lower-scored initial code
  CHECK(r.final_version_id == 2);
  CHECK(r.final_verdict == "FunctionError");
  fs::remove_all(dir);
}

TEST_CASE("agent transport trouble consumes the iteration as a rollback") {
  ::setenv("MEIC_PIPE_KEY", "k", 1);
  fs::path dir = unique_dir("transport");
  RunInputs in = broken_input("mux2", ErrorCategory::PrematureTermination);
  PipelineConfig cfg = scripted_config("scripted:oracle");
  cfg.debug_agent.backend = "http";
  cfg.debug_agent.endpoint = "http://127.0.0.1:1";  // nothing listens here
  cfg.debug_agent.credential_env = "MEIC_PIPE_KEY";
  cfg.debug_agent.retry.count = 0;
  cfg.max_iterations = 2;
  RunReport r = run(in, cfg, dir);

  CHECK(r.status == RunStatus::Unfixed);
  CHECK(r.iterations == 2);
  REQUIRE(r.records.size() == 2);
  for (const auto& rec : r.records) {
    CHECK_FALSE(rec.failure.empty());
    CHECK(rec.rollback_reason == "incomplete");
    CHECK_FALSE(rec.scorer_called);
  }
  CHECK(r.final_version_id == 0);
  ::unsetenv("MEIC_PIPE_KEY");
  fs::remove_all(dir);
}

TEST_CASE("phase totals stay within the wall clock") {
  fs::path dir = unique_dir("phases");
  RunReport r = run(broken_input("alu8", ErrorCategory::InsufficientBitWidth),
                    scripted_config("scripted:oracle"), dir);
  CHECK(r.phases.sum() <= r.wall_s + 0.05);
  CHECK(r.phases.simulate_s > 0.0);  // step 0 plus the acceptance re-check
  fs::remove_all(dir);
}

TEST_CASE("scripted runs serialize byte-identically once timing is excluded") {
  RunInputs in = broken_input("shifter", ErrorCategory::ConcurrentVariableUse, 3);
  PipelineConfig cfg = scripted_config("scripted:staged:2");

  fs::path d1 = unique_dir("det1"), d2 = unique_dir("det2");
  RunReport a = run(in, cfg, d1);
  RunReport b = run(in, cfg, d2);

  CHECK(report_json(a, false).dump() == report_json(b, false).dump());
  CHECK(meic::read_file(d1 / "config.json") == meic::read_file(d2 / "config.json"));
  for (int v = 0;; ++v) {
    fs::path p1 = d1 / ("v" + std::to_string(v));
    fs::path p2 = d2 / ("v" + std::to_string(v));
    REQUIRE(fs::exists(p1) == fs::exists(p2));
    if (!fs::exists(p1)) break;
    CHECK(meic::read_file(p1 / "code.v") == meic::read_file(p2 / "code.v"));
    CHECK(meic::read_file(p1 / "meta.json") == meic::read_file(p2 / "meta.json"));
  }
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("batches keep input order and parallel workers change nothing but timing") {
  std::vector<RunInputs> items = {
      broken_input("mux2", ErrorCategory::PrematureTermination, 1),
      broken_input("adder8", ErrorCategory::LogicalErrorInExpression, 2),
      broken_input("parity", ErrorCategory::UndefinedVariable, 3),
      broken_input("comparator", ErrorCategory::MismatchedAssignmentValues, 4),
      broken_input("rca4", ErrorCategory::IncorrectModuleInstantiation, 5),
  };
  PipelineConfig cfg = scripted_config("scripted:oracle");

  fs::path d1 = unique_dir("batch1"), d4 = unique_dir("batch4");
  std::vector<RunReport> serial = run_batch(items, cfg, d1, 1);
  std::vector<RunReport> parallel = run_batch(items, cfg, d4, 4);

  REQUIRE(serial.size() == items.size());
  REQUIRE(parallel.size() == items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    CHECK(serial[i].run_id == items[i].run_id);
    CHECK(serial[i].status == RunStatus::Fixed);
    CHECK(report_json(serial[i], false).dump() == report_json(parallel[i], false).dump());
    CHECK(fs::exists(d1 / items[i].run_id / "v1" / "code.v"));
    CHECK(fs::exists(d4 / items[i].run_id / "v1" / "code.v"));
  }
  fs::remove_all(d1);
  fs::remove_all(d4);
}

TEST_CASE("one undriveable instance aborts its own record, never the batch") {
  std::vector<RunInputs> items = {
      broken_input("mux2", ErrorCategory::PrematureTermination, 1),
      clean_input("parity"),
  };
  items[1].run_id = "broken-bench";
  items[1].bundle.testbench_source = "module tb; endmodule\n";  // no vector annotations

  fs::path dir = unique_dir("abort");
  std::vector<RunReport> reports = run_batch(items, scripted_config("scripted:oracle"), dir, 2);

  REQUIRE(reports.size() == 2);
  CHECK(reports[0].status == RunStatus::Fixed);
  CHECK(reports[1].status == RunStatus::Aborted);
  CHECK(reports[1].iterations == 0);
  CHECK(reports[1].abort_reason.find("annotation") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("batch input validation refuses empties and duplicates") {
  PipelineConfig cfg = scripted_config("scripted:oracle");
  fs::path dir = unique_dir("batchval");

  CHECK_THROWS_WITH(run_batch({}, cfg, dir, 1),
                    Catch::Matchers::ContainsSubstring("at least one run"));

  std::vector<RunInputs> dup = {clean_input("mux2"), clean_input("mux2")};
  CHECK_THROWS_WITH(run_batch(dup, cfg, dir, 1),
                    Catch::Matchers::ContainsSubstring("duplicate run id"));

  std::vector<RunInputs> ok = {clean_input("mux2")};
  CHECK_THROWS_WITH(run_batch(ok, cfg, dir, 0),
                    Catch::Matchers::ContainsSubstring("parallel"));
  fs::remove_all(dir);
}

TEST_CASE("pipeline configuration validation") {
  PipelineConfig cfg = scripted_config("scripted:oracle");
  CHECK_NOTHROW(meic::pipeline::validate(cfg));

  cfg.max_iterations = 0;
  CHECK_THROWS_WITH(meic::pipeline::validate(cfg),
                    Catch::Matchers::ContainsSubstring("iteration"));

  cfg = scripted_config("scripted:oracle");
  cfg.detection = DetectionMode::Assertions;
  CHECK_THROWS_WITH(meic::pipeline::validate(cfg),
                    Catch::Matchers::ContainsSubstring("testbench vectors"));

  cfg = scripted_config("scripted:oracle");
  cfg.scorer_agent.temperature = 9.0;
  CHECK_THROWS(meic::pipeline::validate(cfg));

  for (const char* name : {"testbench", "assertions", "both"}) {
    CHECK(meic::pipeline::to_string(meic::pipeline::detection_mode_from_string(name)) == name);
  }
  CHECK_THROWS(meic::pipeline::detection_mode_from_string("psychic"));

  for (const char* name : {"Fixed", "Unfixed", "Aborted"}) {
    CHECK(meic::pipeline::to_string(meic::pipeline::run_status_from_string(name)) == name);
  }
  CHECK_THROWS(meic::pipeline::run_status_from_string("Maybe"));
}

TEST_CASE("run reports and configs serialize with a stable shape") {
  fs::path dir = unique_dir("shape");
  PipelineConfig cfg = scripted_config("scripted:oracle");
  RunReport r = run(broken_input("mux2", ErrorCategory::PrematureTermination), cfg, dir);

  auto stable = report_json(r, false);
  CHECK(stable.at("record") == "run");
  CHECK(stable.at("status") == "Fixed");
  CHECK(stable.at("iterations") == 1);
  CHECK_FALSE(stable.contains("phases"));
  CHECK_FALSE(stable.at("records")[0].contains("debug_ms"));

  auto timed = report_json(r, true);
  CHECK(timed.contains("phases"));
  CHECK(timed.at("records")[0].contains("debug_ms"));
  CHECK(timed.at("wall_s").get<double>() >= 0.0);

  auto conf = nlohmann::json::parse(meic::read_file(dir / "config.json"));
  CHECK(conf.at("max_iterations") == 10);
  CHECK(conf.at("debug_agent").at("temperature").get<double>() == 0.7);
  CHECK(conf.at("scorer_agent").at("temperature").get<double>() == 0.1);
  CHECK(conf.at("rollback").at("min_completeness").get<double>() == 0.70);
  CHECK(conf.at("rollback").at("min_score") == 60);
  CHECK(conf.at("detection") == "testbench");
  fs::remove_all(dir);
}
