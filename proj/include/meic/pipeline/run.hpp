#pragma once

// The repair loop. One run takes a failing design through up to
// max_iterations rounds of debug agent -> scorer -> keep-or-revert, with the
// toolchain as the referee, and lands on the best committed version. A batch
// drives many such runs in isolated directories, optionally in parallel, and
// never aborts wholesale because one instance misbehaved.

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "meic/agent/client.hpp"
#include "meic/agent/prompts.hpp"
#include "meic/bundle.hpp"
#include "meic/common.hpp"
#include "meic/repo/store.hpp"
#include "meic/rtl/extract.hpp"
#include "meic/tool/toolchain.hpp"

namespace meic::pipeline {

// How failures are detected: self-checking testbench vectors, inline
// assertions, or both. The builtin simulator understands vectors only; the
// other modes are meaningful with an external toolchain.
enum class DetectionMode { Testbench, Assertions, Both };

inline std::string to_string(DetectionMode m) {
  switch (m) {
    case DetectionMode::Testbench: return "testbench";
    case DetectionMode::Assertions: return "assertions";
    case DetectionMode::Both: return "both";
  }
  return "testbench";
}

inline DetectionMode detection_mode_from_string(std::string_view s) {
  if (s == "testbench") return DetectionMode::Testbench;
  if (s == "assertions") return DetectionMode::Assertions;
  if (s == "both") return DetectionMode::Both;
  throw Error("unknown detection mode '" + std::string(s) +
              "' (expected testbench|assertions|both)");
}

struct PipelineConfig {
  int max_iterations = 10;
  tool::ToolchainConfig toolchain;
  agent::AgentConfig debug_agent = agent::debug_defaults();
  agent::AgentConfig scorer_agent = agent::scorer_defaults();
  repo::RollbackPolicy rollback;
  DetectionMode detection = DetectionMode::Testbench;
  bool scorer_sees_spec = true;
  // Checking completeness before calling the scorer saves an agent call on
  // obviously truncated candidates; flip this to score them anyway.
  bool completeness_before_scorer = true;
};

inline void validate(const PipelineConfig& cfg) {
  if (cfg.max_iterations < 1) throw Error("pipeline needs at least one iteration");
  agent::validate(cfg.debug_agent);
  agent::validate(cfg.scorer_agent);
  repo::validate(cfg.rollback);
  tool::validate(cfg.toolchain);
  if (cfg.detection != DetectionMode::Testbench &&
      cfg.toolchain.backend == tool::ToolBackend::BuiltinMock)
    throw Error("the builtin simulator detects errors through testbench vectors only");
}

enum class RunStatus { Fixed, Unfixed, Aborted };

inline std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Fixed: return "Fixed";
    case RunStatus::Unfixed: return "Unfixed";
    case RunStatus::Aborted: return "Aborted";
  }
  return "Aborted";
}

inline RunStatus run_status_from_string(std::string_view s) {
  if (s == "Fixed") return RunStatus::Fixed;
  if (s == "Unfixed") return RunStatus::Unfixed;
  if (s == "Aborted") return RunStatus::Aborted;
  throw Error("unknown run status '" + std::string(s) + "'");
}

struct IterationRecord {
  int iteration = 0;            // 1-based
  std::string prompt_kind;      // "syntax" or "function" as shown to the debug agent
  std::string verdict;          // toolchain verdict on the candidate; empty if never checked
  int score = 0;
  double completeness = 0.0;
  bool scorer_called = false;
  bool accepted = false;
  std::string rollback_reason = "none";
  int version_id = -1;
  std::string failure;          // agent or toolchain trouble; empty on a clean round
  double debug_ms = 0.0;
  double score_ms = 0.0;
  double simulate_ms = 0.0;
  double transform_ms = 0.0;
};

struct PhaseTotals {
  double simulate_s = 0.0;
  double debug_s = 0.0;
  double score_s = 0.0;
  double transform_s = 0.0;

  double sum() const { return simulate_s + debug_s + score_s + transform_s; }
};

struct RunReport {
  std::string run_id;
  RunStatus status = RunStatus::Aborted;
  std::string abort_reason;
  int iterations = 0;            // debug-agent invocations, attempted or completed
  std::string initial_verdict;   // classification of the design as handed in
  std::string final_verdict;     // verdict of the version the run lands on
  int final_version_id = -1;
  std::vector<IterationRecord> records;
  PhaseTotals phases;
  double wall_s = 0.0;
};

// One unit of batch work: where to run, what to repair, and the known-good
// source scripted agents may need (ignored by the http backend).
struct RunInputs {
  std::string run_id;
  DesignBundle bundle;
  std::string reference_source;
};

namespace pipeline_detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

inline std::string append_note(std::string existing, const std::string& note) {
  if (existing.empty()) return note;
  return existing + "; " + note;
}

}  // namespace pipeline_detail

inline nlohmann::ordered_json config_json(const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  j["max_iterations"] = cfg.max_iterations;
  j["detection"] = to_string(cfg.detection);
  j["scorer_sees_spec"] = cfg.scorer_sees_spec;
  j["completeness_before_scorer"] = cfg.completeness_before_scorer;
  j["toolchain"] = {{"backend", tool::to_string(cfg.toolchain.backend)},
                    {"compile_command", cfg.toolchain.compile_command_template},
                    {"simulate_command", cfg.toolchain.simulate_command_template},
                    {"phase_timeout_s", cfg.toolchain.phase_timeout_s},
                    {"log_cap_bytes", cfg.toolchain.log_cap_bytes}};
  auto agent_json = [](const agent::AgentConfig& a) {
    return nlohmann::ordered_json{{"role", agent::to_string(a.role)},
                                  {"backend", a.backend},
                                  {"model", a.model},
                                  {"temperature", a.temperature},
                                  {"max_reply_tokens", a.max_reply_tokens},
                                  {"retry_count", a.retry.count},
                                  {"retry_backoff_ms", a.retry.backoff_ms},
                                  {"prompt_pack", a.prompt_pack},
                                  {"endpoint", a.endpoint},
                                  {"credential_env", a.credential_env}};
  };
  j["debug_agent"] = agent_json(cfg.debug_agent);
  j["scorer_agent"] = agent_json(cfg.scorer_agent);
  j["rollback"] = {{"min_completeness", cfg.rollback.min_completeness},
                   {"min_score", cfg.rollback.min_score},
                   {"enabled", cfg.rollback.enabled}};
  return j;
}

// Serializes a report. Timing numbers vary run to run, so everything
// wall-clock lives behind include_timing; with it off, scripted runs
// serialize byte-identically no matter the machine or worker count.
inline nlohmann::ordered_json report_json(const RunReport& r, bool include_timing = true) {
  nlohmann::ordered_json j;
  j["record"] = "run";
  j["run_id"] = r.run_id;
  j["status"] = to_string(r.status);
  j["abort_reason"] = r.abort_reason;
  j["iterations"] = r.iterations;
  j["initial_verdict"] = r.initial_verdict;
  j["final_verdict"] = r.final_verdict;
  j["final_version_id"] = r.final_version_id;
  j["records"] = nlohmann::ordered_json::array();
  for (const IterationRecord& rec : r.records) {
    nlohmann::ordered_json e;
    e["iteration"] = rec.iteration;
    e["prompt_kind"] = rec.prompt_kind;
    e["verdict"] = rec.verdict;
    e["score"] = rec.score;
    e["completeness"] = rec.completeness;
    e["scorer_called"] = rec.scorer_called;
    e["accepted"] = rec.accepted;
    e["rollback_reason"] = rec.rollback_reason;
    e["version_id"] = rec.version_id;
    e["failure"] = rec.failure;
    if (include_timing) {
      e["debug_ms"] = rec.debug_ms;
      e["score_ms"] = rec.score_ms;
      e["simulate_ms"] = rec.simulate_ms;
      e["transform_ms"] = rec.transform_ms;
    }
    j["records"].push_back(std::move(e));
  }
  if (include_timing) {
    j["phases"] = {{"simulate_s", r.phases.simulate_s},
                   {"debug_s", r.phases.debug_s},
                   {"score_s", r.phases.score_s},
                   {"transform_s", r.phases.transform_s}};
    j["wall_s"] = r.wall_s;
  }
  return j;
}

// Runs the repair loop on one design. Step 0 classifies the input: already
// passing means Fixed with zero iterations, an unusable toolchain means
// Aborted. Every iteration after that is one debug-agent invocation whose
// outcome is either an accepted (and re-checked) candidate or a rollback;
// agent trouble and malformed replies consume the iteration the same way.
inline RunReport run(const RunInputs& in, const PipelineConfig& cfg,
                     const std::filesystem::path& run_dir) {
  using pipeline_detail::Clock;
  using pipeline_detail::ms_since;
  using tool::VerdictStatus;

  validate(cfg);
  Clock::time_point wall_start = Clock::now();

  RunReport report;
  report.run_id = in.run_id;

  std::filesystem::create_directories(run_dir);
  write_file(run_dir / "config.json", config_json(cfg).dump(2) + "\n");

  repo::RunStore store(run_dir, in.run_id);
  // Full verdicts by version id: the store keeps only the status string and
  // logs, but prompts for function errors also want the failing check list.
  std::vector<tool::Verdict> verdicts;

  agent::ScriptContext ctx{in.reference_source};
  agent::AgentClient debugger(cfg.debug_agent, ctx);
  agent::AgentClient scorer(cfg.scorer_agent, ctx);
  agent::PromptPack debug_pack = agent::resolve_prompt_pack(cfg.debug_agent.prompt_pack);
  agent::PromptPack score_pack = agent::resolve_prompt_pack(cfg.scorer_agent.prompt_pack);

  tool::ToolchainConfig tc = cfg.toolchain;
  if (tc.backend == tool::ToolBackend::External && tc.workdir.empty())
    tc.workdir = (run_dir / "work").string();

  auto timed_check = [&](const std::string& source, double& ms_out) {
    DesignBundle b = in.bundle;
    b.rtl_source = source;
    Clock::time_point t0 = Clock::now();
    tool::Verdict v = tool::check(b, tc);
    ms_out = ms_since(t0);
    return v;
  };

  auto finish = [&](RunStatus status) {
    report.status = status;
    report.wall_s = ms_since(wall_start) / 1000.0;
    return report;
  };

  // Step 0: classify the design as handed in.
  double step0_ms = 0.0;
  tool::Verdict v0 = timed_check(in.bundle.rtl_source, step0_ms);
  report.phases.simulate_s += step0_ms / 1000.0;
  report.initial_verdict = tool::to_string(v0.status);

  repo::CodeCandidate init;
  init.iteration = 0;
  init.source = in.bundle.rtl_source;
  init.score = 50;  // neutral baseline so later candidates compete against it
  init.completeness_ratio = 1.0;
  init.verdict = tool::to_string(v0.status);
  init.compile_log = v0.compile_log;
  init.sim_log = v0.sim_log;
  init.origin = repo::CandidateOrigin::Initial;
  store.commit(init);
  verdicts.push_back(v0);
  report.final_version_id = 0;
  report.final_verdict = report.initial_verdict;

  if (v0.status == VerdictStatus::Pass) return finish(RunStatus::Fixed);
  if (v0.status == VerdictStatus::ToolFailure) {
    report.abort_reason = pipeline_detail::append_note(
        trim(v0.compile_log), trim(v0.sim_log).empty() ? "toolchain failure" : trim(v0.sim_log));
    return finish(RunStatus::Aborted);
  }

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    IterationRecord rec;
    rec.iteration = iter;

    // Work from the best committed version; rollbacks never land here.
    const repo::CodeCandidate base = store.best();
    const tool::Verdict base_verdict = verdicts[static_cast<size_t>(base.version_id)];

    DesignBundle working = in.bundle;
    working.rtl_source = base.source;

    Clock::time_point t_tr = Clock::now();
    agent::PromptSet prompt = agent::build_debug_prompt(working, base_verdict, debug_pack);
    rec.prompt_kind =
        base_verdict.status == VerdictStatus::SyntaxError ? "syntax" : "function";
    rec.transform_ms += ms_since(t_tr);

    report.iterations = iter;  // the invocation below consumes this iteration

    std::string reply;
    bool agent_ok = true;
    Clock::time_point t_dbg = Clock::now();
    try {
      reply = debugger.invoke(prompt);
    } catch (const std::exception& e) {
      agent_ok = false;
      rec.failure = e.what();
    }
    rec.debug_ms = ms_since(t_dbg);

    repo::CodeCandidate cand;
    cand.iteration = iter;
    if (agent_ok) {
      t_tr = Clock::now();
      if (auto extracted = rtl::extract_code(reply)) {
        cand.source = extracted->code;
        cand.completeness_ratio = rtl::completeness_ratio(cand.source, base.source);
      } else {
        cand.completeness_ratio = 0.0;
        rec.failure = "debug reply carried no usable code";
      }
      rec.transform_ms += ms_since(t_tr);
    } else {
      cand.completeness_ratio = 0.0;
    }
    rec.completeness = cand.completeness_ratio;

    bool skip_scorer =
        cand.source.empty() || (cfg.completeness_before_scorer && cfg.rollback.enabled &&
                                cand.completeness_ratio < cfg.rollback.min_completeness);
    if (!skip_scorer) {
      t_tr = Clock::now();
      agent::PromptSet score_prompt = agent::build_score_prompt(
          base.source, cand.source, cfg.scorer_sees_spec ? in.bundle.spec_text : std::string(),
          score_pack);
      rec.transform_ms += ms_since(t_tr);

      rec.scorer_called = true;
      Clock::time_point t_sc = Clock::now();
      try {
        std::string score_reply = scorer.invoke(score_prompt);
        rec.score_ms = ms_since(t_sc);
        t_tr = Clock::now();
        // an unparseable reply is recorded as a zero score, not an error
        auto parsed = agent::parse_score(score_reply);
        cand.score = parsed ? parsed->score : 0;
        rec.transform_ms += ms_since(t_tr);
      } catch (const std::exception& e) {
        rec.score_ms = ms_since(t_sc);
        cand.score = 0;
        rec.failure = pipeline_detail::append_note(rec.failure, e.what());
      }
    }
    rec.score = cand.score;

    repo::Decision decision = repo::decide(cand, base, cfg.rollback);

    if (decision.accept) {
      tool::Verdict cv = timed_check(cand.source, rec.simulate_ms);
      cand.verdict = tool::to_string(cv.status);
      cand.compile_log = cv.compile_log;
      cand.sim_log = cv.sim_log;
      if (cv.status == VerdictStatus::ToolFailure) {
        // the candidate cannot even be evaluated; revert rather than land on it
        decision = {false, repo::RollbackReason::Incomplete};
        rec.failure = pipeline_detail::append_note(
            rec.failure, "toolchain could not evaluate the candidate");
      }
      if (decision.accept) {
        cand.origin = repo::CandidateOrigin::DebugAgent;
        rec.accepted = true;
        rec.version_id = store.commit(cand);
        verdicts.push_back(cv);
        rec.verdict = cand.verdict;
        report.phases.simulate_s += rec.simulate_ms / 1000.0;
        report.phases.debug_s += rec.debug_ms / 1000.0;
        report.phases.score_s += rec.score_ms / 1000.0;
        report.phases.transform_s += rec.transform_ms / 1000.0;
        report.records.push_back(rec);
        if (cv.status == VerdictStatus::Pass) {
          report.final_version_id = rec.version_id;
          report.final_verdict = "Pass";
          return finish(RunStatus::Fixed);
        }
        continue;
      }
      // fall through to the rollback commit below with the verdict attached
      cand.origin = repo::CandidateOrigin::Rollback;
      rec.version_id = store.commit(cand);
      verdicts.push_back(cv);
      rec.verdict = cand.verdict;
    } else {
      cand.origin = repo::CandidateOrigin::Rollback;
      rec.version_id = store.commit(cand);
      verdicts.emplace_back();  // keeps ids aligned; never consulted for rollbacks
    }
    rec.rollback_reason = to_string(decision.reason);
    report.phases.simulate_s += rec.simulate_ms / 1000.0;
    report.phases.debug_s += rec.debug_ms / 1000.0;
    report.phases.score_s += rec.score_ms / 1000.0;
    report.phases.transform_s += rec.transform_ms / 1000.0;
    report.records.push_back(rec);
  }

  const repo::CodeCandidate& landed = store.best();
  report.final_version_id = landed.version_id;
  report.final_verdict = landed.verdict;
  return finish(RunStatus::Unfixed);
}

// Drives one run per input under out_dir/<run_id>, with up to `parallel`
// worker threads. Reports come back in input order; a run that dies with an
// exception becomes an Aborted record instead of sinking the batch.
inline std::vector<RunReport> run_batch(const std::vector<RunInputs>& items,
                                        const PipelineConfig& cfg,
                                        const std::filesystem::path& out_dir,
                                        int parallel = 1) {
  validate(cfg);
  if (items.empty()) throw Error("batch needs at least one run");
  if (parallel < 1) throw Error("parallel worker count must be >= 1");
  std::set<std::string> ids;
  for (const RunInputs& item : items) {
    if (item.run_id.empty()) throw Error("batch run with an empty run id");
    if (!ids.insert(item.run_id).second)
      throw Error("duplicate run id '" + item.run_id + "' in batch");
  }

  std::vector<RunReport> reports(items.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      try {
        reports[i] = run(items[i], cfg, out_dir / items[i].run_id);
      } catch (const std::exception& e) {
        RunReport r;
        r.run_id = items[i].run_id;
        r.status = RunStatus::Aborted;
        r.abort_reason = e.what();
        reports[i] = r;
      }
    }
  };

  size_t workers = std::min<size_t>(static_cast<size_t>(parallel), items.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return reports;
}

}  // namespace meic::pipeline
