#pragma once

// Versioned candidate store for one repair run. Every candidate the loop
// produces is committed here with its logs, append-only, so the run's full
// history stays traceable. The store also owns the two decisions the loop
// leans on: whether a fresh candidate is kept or rolled back, and which
// committed version is the best landing point.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "meic/common.hpp"

namespace meic::repo {

enum class CandidateOrigin { Initial, DebugAgent, Rollback };

inline std::string to_string(CandidateOrigin o) {
  switch (o) {
    case CandidateOrigin::Initial: return "initial";
    case CandidateOrigin::DebugAgent: return "debug-agent";
    case CandidateOrigin::Rollback: return "rollback";
  }
  return "rollback";
}

inline CandidateOrigin origin_from_string(std::string_view s) {
  if (s == "initial") return CandidateOrigin::Initial;
  if (s == "debug-agent") return CandidateOrigin::DebugAgent;
  if (s == "rollback") return CandidateOrigin::Rollback;
  throw Error("unknown candidate origin '" + std::string(s) + "'");
}

enum class RollbackReason { None, Incomplete, LowScore };

inline std::string to_string(RollbackReason r) {
  switch (r) {
    case RollbackReason::None: return "none";
    case RollbackReason::Incomplete: return "incomplete";
    case RollbackReason::LowScore: return "low-score";
  }
  return "none";
}

struct Decision {
  bool accept = true;
  RollbackReason reason = RollbackReason::None;

  bool operator==(const Decision&) const = default;
};

struct CodeCandidate {
  int version_id = -1;  // assigned at commit time
  int iteration = 0;
  std::string source;
  int score = 0;
  double completeness_ratio = 1.0;
  std::string verdict;  // status snapshot at commit time, may be empty pre-check
  std::string compile_log;
  std::string sim_log;
  CandidateOrigin origin = CandidateOrigin::DebugAgent;
};

struct RollbackPolicy {
  double min_completeness = 0.70;
  int min_score = 60;
  bool enabled = true;
};

inline void validate(const RollbackPolicy& p) {
  if (!(p.min_completeness > 0.0 && p.min_completeness <= 1.0))
    throw Error("rollback min completeness must lie in (0, 1]");
  if (p.min_score < 0 || p.min_score > 100)
    throw Error("rollback min score must lie in [0, 100]");
}

// Pure keep-or-revert call on a fresh candidate. Incompleteness (missing or
// heavily shrunken code) forces a rollback no matter what the scorer said;
// only then does the score threshold get a say. The baseline candidate is the
// landing point a rollback returns to and must already be committed.
inline Decision decide(const CodeCandidate& candidate, const CodeCandidate& baseline,
                       const RollbackPolicy& policy) {
  validate(policy);
  if (baseline.source.empty()) throw Error("rollback decision needs a baseline with code");
  if (!policy.enabled) return {true, RollbackReason::None};
  if (candidate.source.empty() || candidate.completeness_ratio < policy.min_completeness)
    return {false, RollbackReason::Incomplete};
  if (candidate.score < policy.min_score) return {false, RollbackReason::LowScore};
  return {true, RollbackReason::None};
}

// One store per run, single writer, append-only. Versions are persisted as
// v<N>/{code.v, compile.log, sim.log, meta.json} under the run directory,
// with meta.json holding one structured record line like the dataset
// manifest does.
class RunStore {
 public:
  RunStore(std::filesystem::path run_dir, std::string run_id)
      : dir_(std::move(run_dir)), run_id_(std::move(run_id)) {}

  const std::filesystem::path& dir() const { return dir_; }
  const std::string& run_id() const { return run_id_; }
  const std::vector<CodeCandidate>& versions() const { return versions_; }

  int commit(CodeCandidate candidate) {
    if (candidate.origin == CandidateOrigin::Initial) {
      if (!versions_.empty())
        throw Error("initial candidate must be the first commit of a run");
      if (candidate.iteration != 0) throw Error("initial candidate belongs to iteration 0");
    } else if (versions_.empty()) {
      throw Error("first commit of a run must be the initial candidate");
    }
    candidate.version_id = static_cast<int>(versions_.size());

    std::filesystem::path vdir = dir_ / ("v" + std::to_string(candidate.version_id));
    write_file(vdir / "code.v", candidate.source);
    write_file(vdir / "compile.log", candidate.compile_log);
    write_file(vdir / "sim.log", candidate.sim_log);
    nlohmann::ordered_json meta;
    meta["record"] = "version";
    meta["run_id"] = run_id_;
    meta["version_id"] = candidate.version_id;
    meta["iteration"] = candidate.iteration;
    meta["score"] = candidate.score;
    meta["completeness_ratio"] = candidate.completeness_ratio;
    meta["verdict"] = candidate.verdict;
    meta["origin"] = to_string(candidate.origin);
    write_file(vdir / "meta.json", meta.dump() + "\n");

    versions_.push_back(std::move(candidate));
    return versions_.back().version_id;
  }

  // Highest score wins; ties go to the most recent version. Work that was
  // rolled back never wins: it is kept for the record, not as a landing
  // point. The initial version always participates, so a store with any
  // commit has a best.
  const CodeCandidate& best() const {
    if (versions_.empty()) throw Error("empty store has no best candidate");
    const CodeCandidate* winner = nullptr;
    for (const CodeCandidate& v : versions_) {
      if (v.origin == CandidateOrigin::Rollback) continue;
      if (!winner || v.score >= winner->score) winner = &v;
    }
    if (!winner) throw Error("store holds only rolled-back candidates");
    return *winner;
  }

 private:
  std::filesystem::path dir_;
  std::string run_id_;
  std::vector<CodeCandidate> versions_;
};

}  // namespace meic::repo
