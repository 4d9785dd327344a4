#pragma once

// Step 0 of the debug loop: compile the candidate, simulate it against its
// check bench, and fold the logs into a Verdict. Two backends: `external`
// shells out to real tools through argv templates; `builtin-mock` runs the
// bundled rule checker and combinational evaluator so the whole loop works
// without a simulator installed.

#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "meic/bundle.hpp"
#include "meic/common.hpp"
#include "meic/proc.hpp"
#include "meic/tool/evaluator.hpp"
#include "meic/tool/syntax_rules.hpp"
#include "meic/tool/testbench.hpp"
#include "meic/tool/vectors.hpp"

namespace meic::tool {

enum class ToolBackend { BuiltinMock, External };

inline std::string to_string(ToolBackend b) {
  return b == ToolBackend::BuiltinMock ? "builtin-mock" : "external";
}

inline ToolBackend tool_backend_from_string(std::string_view s) {
  if (s == "builtin-mock") return ToolBackend::BuiltinMock;
  if (s == "external") return ToolBackend::External;
  throw Error("unknown toolchain backend '" + std::string(s) +
              "' (expected builtin-mock or external)");
}

struct ToolchainConfig {
  ToolBackend backend = ToolBackend::BuiltinMock;
  // whitespace-separated argv templates; {design} {testbench} {workdir}
  // expand per token after splitting, so substituted paths stay single args
  std::string compile_command_template;
  std::string simulate_command_template;
  double phase_timeout_s = 60.0;
  size_t log_cap_bytes = 64 * 1024;
  std::vector<std::string> error_patterns = {"Error:", "error:"};
  std::string workdir;  // external backend: exclusive per check() call
};

inline void validate(const ToolchainConfig& cfg) {
  if (cfg.phase_timeout_s <= 0) throw Error("toolchain: phase timeout must be positive");
  if (cfg.log_cap_bytes == 0) throw Error("toolchain: log cap must be positive");
  if (cfg.backend == ToolBackend::External) {
    if (cfg.compile_command_template.empty() || cfg.simulate_command_template.empty())
      throw Error("toolchain: external backend requires compile and simulate commands");
  }
}

enum class VerdictStatus { Pass, SyntaxError, FunctionError, Timeout, ToolFailure };

inline std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Pass: return "Pass";
    case VerdictStatus::SyntaxError: return "SyntaxError";
    case VerdictStatus::FunctionError: return "FunctionError";
    case VerdictStatus::Timeout: return "Timeout";
    case VerdictStatus::ToolFailure: return "ToolFailure";
  }
  return "ToolFailure";
}

inline VerdictStatus verdict_status_from_string(std::string_view s) {
  if (s == "Pass") return VerdictStatus::Pass;
  if (s == "SyntaxError") return VerdictStatus::SyntaxError;
  if (s == "FunctionError") return VerdictStatus::FunctionError;
  if (s == "Timeout") return VerdictStatus::Timeout;
  if (s == "ToolFailure") return VerdictStatus::ToolFailure;
  throw Error("unknown verdict status '" + std::string(s) + "'");
}

struct Verdict {
  VerdictStatus status = VerdictStatus::ToolFailure;
  std::string compile_log;
  std::string sim_log;
  std::vector<std::string> failing_checks;
};

// Keeps head and tail, cutting the middle with an explicit marker.
inline std::string truncate_log(std::string log, size_t cap) {
  if (log.size() <= cap) return log;
  size_t omitted = log.size() - cap;
  std::string marker = "\n... [log truncated: " + std::to_string(omitted) +
                       " bytes omitted] ...\n";
  size_t head = cap / 2;
  size_t tail = cap - head;
  return log.substr(0, head) + marker + log.substr(log.size() - tail);
}

// ---- MEIC line protocol ----

struct SimProtocol {
  std::vector<std::string> failing;   // row ids with FAIL + "assert:<msg>" entries
  std::vector<std::string> passing;
  std::vector<std::string> asserts;   // raw assertion messages
  bool has_summary = false;
  int summary_pass = 0;
  int summary_fail = 0;
};

inline SimProtocol parse_sim_protocol(std::string_view sim_log) {
  SimProtocol p;
  for (const std::string& raw : split_lines(sim_log)) {
    std::string line = trim(raw);
    if (starts_with(line, "MEIC_CHECK ")) {
      std::istringstream is(line.substr(11));
      std::string id, state;
      is >> id >> state;
      if (id.empty()) continue;
      if (state == "FAIL") p.failing.push_back(id);
      else if (state == "PASS") p.passing.push_back(id);
    } else if (starts_with(line, "MEIC_ASSERT ")) {
      std::string msg = trim(line.substr(12));
      p.asserts.push_back(msg);
      p.failing.push_back("assert:" + msg);
    } else if (starts_with(line, "MEIC_SUMMARY ")) {
      p.has_summary = true;
      std::istringstream is(line.substr(13));
      std::string tok;
      while (is >> tok) {
        if (starts_with(tok, "pass=")) p.summary_pass = std::atoi(tok.c_str() + 5);
        if (starts_with(tok, "fail=")) p.summary_fail = std::atoi(tok.c_str() + 5);
      }
    }
  }
  return p;
}

namespace tc_detail {

inline std::vector<std::string> expand_template(const std::string& tmpl,
                                                const std::map<std::string, std::string>& subs) {
  std::vector<std::string> argv;
  std::istringstream is(tmpl);
  std::string tok;
  while (is >> tok) {
    for (const auto& [key, value] : subs) tok = replace_all(tok, "{" + key + "}", value);
    size_t open = tok.find('{');
    size_t close = tok.find('}', open == std::string::npos ? 0 : open);
    if (open != std::string::npos && close != std::string::npos)
      throw Error("command template has unknown placeholder '" +
                  tok.substr(open, close - open + 1) + "'");
    argv.push_back(tok);
  }
  if (argv.empty()) throw Error("command template expands to an empty command");
  return argv;
}

inline bool matches_any_pattern(std::string_view log,
                                const std::vector<std::string>& patterns) {
  for (const auto& p : patterns) {
    if (!p.empty() && log.find(p) != std::string_view::npos) return true;
  }
  return false;
}

// Renders the mock simulator's rows in the same format the generated bench
// prints under a real simulator.
inline std::string render_mock_sim_log(const VectorTable& table, const SimResult& sim) {
  int out_bits = 0;
  std::vector<const PortSpec*> outs;
  for (const auto& p : table.ports) {
    if (!p.is_input) {
      outs.push_back(&p);
      out_bits += p.width;
    }
  }
  std::ostringstream os;
  int pass = 0, fail = 0;
  for (const auto& row : sim.rows) {
    if (!row.evaluated) continue;
    uint64_t got = tb_detail::concat_value(outs, row.got);
    uint64_t exp = tb_detail::concat_value(outs, row.expected);
    os << "MEIC_CHECK " << row.id << (row.pass ? " PASS" : " FAIL") << " got="
       << tb_detail::padded_hex(got, out_bits) << " exp="
       << tb_detail::padded_hex(exp, out_bits) << "\n";
    if (row.pass) ++pass;
    else ++fail;
  }
  if (sim.completed)
    os << "MEIC_SUMMARY pass=" << pass << " fail=" << fail << "\n";
  return os.str();
}

inline void persist_workdir(const ToolchainConfig& cfg, const DesignBundle& bundle,
                            const Verdict& v) {
  if (cfg.workdir.empty()) return;
  namespace fs = std::filesystem;
  fs::create_directories(cfg.workdir);
  write_file(cfg.workdir + "/design.v", bundle.rtl_source);
  write_file(cfg.workdir + "/tb.v", bundle.testbench_source);
  write_file(cfg.workdir + "/compile.log", v.compile_log);
  write_file(cfg.workdir + "/sim.log", v.sim_log);
}

inline Verdict check_builtin(const DesignBundle& bundle, const ToolchainConfig& cfg) {
  Verdict v;

  // compile stage: rule checker
  std::vector<Diagnostic> diags = check_syntax(bundle.rtl_source);
  if (!diags.empty()) {
    v.status = VerdictStatus::SyntaxError;
    v.compile_log = truncate_log(format_compile_log(diags), cfg.log_cap_bytes);
    v.sim_log.clear();
    return v;
  }

  // simulate stage: vector table evaluation
  std::optional<VectorTable> table = parse_vector_annotations(bundle.testbench_source);
  if (!table) {
    v.status = VerdictStatus::ToolFailure;
    v.sim_log = "builtin simulator: testbench carries no vector annotations";
    return v;
  }
  try {
    validate(*table);
  } catch (const Error& e) {
    v.status = VerdictStatus::ToolFailure;
    v.sim_log = std::string("builtin simulator: invalid vector table: ") + e.what();
    return v;
  }

  SimResult sim = simulate_vectors(bundle.rtl_source, *table);
  std::string log = render_mock_sim_log(*table, sim);

  if (sim.issue) {
    switch (sim.issue->kind) {
      case EvalIssue::Kind::Unsupported:
        v.status = VerdictStatus::ToolFailure;
        v.sim_log = truncate_log(
            log + "builtin simulator: unsupported construct: " + sim.issue->detail + "\n",
            cfg.log_cap_bytes);
        return v;
      case EvalIssue::Kind::Budget:
        v.status = VerdictStatus::Timeout;
        v.sim_log = truncate_log(
            log + "builtin simulator: simulation did not finish: " + sim.issue->detail +
                "\n",
            cfg.log_cap_bytes);
        return v;
      case EvalIssue::Kind::Elaboration: {
        // design compiles per-file but cannot be built into a hierarchy;
        // every check row counts as failed, mirroring a sim-stage error
        std::ostringstream os;
        os << "MEIC_ELAB " << sim.issue->detail << "\n";
        for (const auto& row : table->rows) {
          os << "MEIC_CHECK " << row.id << " FAIL got=x exp=x\n";
          v.failing_checks.push_back(row.id);
        }
        os << "MEIC_SUMMARY pass=0 fail=" << table->rows.size() << "\n";
        v.status = VerdictStatus::FunctionError;
        v.sim_log = truncate_log(os.str(), cfg.log_cap_bytes);
        return v;
      }
    }
  }

  for (const auto& row : sim.rows)
    if (!row.pass) v.failing_checks.push_back(row.id);
  v.sim_log = truncate_log(log, cfg.log_cap_bytes);
  v.status = v.failing_checks.empty() ? VerdictStatus::Pass : VerdictStatus::FunctionError;
  return v;
}

inline Verdict check_external(const DesignBundle& bundle, const ToolchainConfig& cfg) {
  namespace fs = std::filesystem;
  Verdict v;
  if (cfg.workdir.empty()) {
    v.status = VerdictStatus::ToolFailure;
    v.compile_log = "external backend requires a work directory";
    return v;
  }
  fs::create_directories(cfg.workdir);
  std::string design_path = cfg.workdir + "/design.v";
  std::string tb_path = cfg.workdir + "/tb.v";
  write_file(design_path, bundle.rtl_source);
  write_file(tb_path, bundle.testbench_source);

  std::map<std::string, std::string> subs{{"design", design_path},
                                          {"testbench", tb_path},
                                          {"workdir", cfg.workdir}};

  // compile phase
  std::vector<std::string> compile_argv;
  try {
    compile_argv = expand_template(cfg.compile_command_template, subs);
  } catch (const Error& e) {
    v.status = VerdictStatus::ToolFailure;
    v.compile_log = e.what();
    return v;
  }
  ProcResult comp = run_process(compile_argv, cfg.workdir, cfg.phase_timeout_s);
  v.compile_log = truncate_log(comp.output, cfg.log_cap_bytes);
  write_file(cfg.workdir + "/compile.log", v.compile_log);
  if (comp.spawn_failed) {
    v.status = VerdictStatus::ToolFailure;
    if (v.compile_log.empty())
      v.compile_log = "compile command failed to start: " + comp.spawn_error;
    return v;
  }
  if (comp.timed_out) {
    v.status = VerdictStatus::Timeout;
    return v;
  }
  if (comp.exit_code != 0 || matches_any_pattern(comp.output, cfg.error_patterns)) {
    v.status = VerdictStatus::SyntaxError;
    if (v.compile_log.empty())
      v.compile_log = "compiler exited with status " + std::to_string(comp.exit_code);
    v.sim_log.clear();
    return v;
  }

  // simulate phase
  std::vector<std::string> sim_argv;
  try {
    sim_argv = expand_template(cfg.simulate_command_template, subs);
  } catch (const Error& e) {
    v.status = VerdictStatus::ToolFailure;
    v.sim_log = e.what();
    return v;
  }
  ProcResult sim = run_process(sim_argv, cfg.workdir, cfg.phase_timeout_s);
  v.sim_log = truncate_log(sim.output, cfg.log_cap_bytes);
  write_file(cfg.workdir + "/sim.log", v.sim_log);
  if (sim.spawn_failed) {
    v.status = VerdictStatus::ToolFailure;
    if (v.sim_log.empty()) v.sim_log = "simulate command failed to start: " + sim.spawn_error;
    return v;
  }
  if (sim.timed_out) {
    v.status = VerdictStatus::Timeout;
    return v;
  }

  SimProtocol proto = parse_sim_protocol(sim.output);
  if (!proto.failing.empty()) {
    v.status = VerdictStatus::FunctionError;
    v.failing_checks = proto.failing;
    return v;
  }
  if (sim.exit_code != 0 || !proto.has_summary) {
    v.status = VerdictStatus::ToolFailure;
    if (v.sim_log.empty())
      v.sim_log = "simulation ended without a result summary (exit " +
                  std::to_string(sim.exit_code) + ")";
    return v;
  }
  v.status = VerdictStatus::Pass;
  return v;
}

}  // namespace tc_detail

// Compile + simulate + classify. Never throws for tool-side problems; those
// come back as Timeout / ToolFailure verdicts. Throws Error only for an
// invalid config.
inline Verdict check(const DesignBundle& bundle, const ToolchainConfig& cfg) {
  validate(cfg);
  Verdict v = cfg.backend == ToolBackend::BuiltinMock
                  ? tc_detail::check_builtin(bundle, cfg)
                  : tc_detail::check_external(bundle, cfg);
  if (cfg.backend == ToolBackend::BuiltinMock) tc_detail::persist_workdir(cfg, bundle, v);
  return v;
}

}  // namespace meic::tool
