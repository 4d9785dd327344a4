#pragma once

// Transport layer for the two agents. One real backend (an OpenAI-style
// chat-completion endpoint over HTTP) and a family of scripted backends that
// make the whole pipeline runnable and testable offline. Scripted replies are
// pure functions of the configuration, the per-client call counter, and the
// prompt, so runs using them are reproducible byte for byte.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "meic/agent/prompts.hpp"
#include "meic/common.hpp"
#include "meic/rtl/extract.hpp"

namespace meic::agent {

// Transport errors are retryable (network weather); protocol errors mean the
// far side answered with something that is not a chat completion.
struct TransportError : Error {
  using Error::Error;
};
struct ProtocolError : Error {
  using Error::Error;
};

enum class AgentRole { Debug, Scorer };

inline std::string to_string(AgentRole r) {
  return r == AgentRole::Debug ? "debug" : "scorer";
}

struct RetryPolicy {
  int count = 2;        // extra attempts after the first
  int backoff_ms = 200; // scaled by the attempt number
};

struct AgentConfig {
  AgentRole role = AgentRole::Debug;
  std::string backend = "scripted:silent";  // "http" or "scripted:<name>"
  std::string model = "meic-agent";
  double temperature = 0.7;
  int max_reply_tokens = 4096;
  RetryPolicy retry;
  std::string prompt_pack = "default";
  std::string endpoint;                       // http: scheme://host[:port][/prefix]
  std::string credential_env = "MEIC_API_KEY";
};

inline AgentConfig debug_defaults() {
  AgentConfig cfg;
  cfg.role = AgentRole::Debug;
  cfg.model = "meic-debug";
  cfg.temperature = 0.7;
  return cfg;
}

inline AgentConfig scorer_defaults() {
  AgentConfig cfg;
  cfg.role = AgentRole::Scorer;
  cfg.model = "meic-scorer";
  cfg.temperature = 0.1;
  return cfg;
}

namespace client_detail {

// Names understood by the scripted dispatcher. staged:<k> and score:<n>
// carry an integer argument.
inline bool valid_scripted_name(const std::string& name) {
  if (name == "oracle" || name == "corruptor" || name == "parrot" || name == "silent")
    return true;
  for (const char* prefixed : {"staged:", "score:"}) {
    if (starts_with(name, prefixed)) {
      std::string arg = name.substr(std::string(prefixed).size());
      if (arg.empty()) return false;
      size_t i = arg[0] == '-' ? 1 : 0;
      if (i == arg.size()) return false;
      for (; i < arg.size(); ++i)
        if (arg[i] < '0' || arg[i] > '9') return false;
      return true;
    }
  }
  return false;
}

}  // namespace client_detail

inline void validate(const AgentConfig& cfg) {
  if (!(cfg.temperature >= 0.0 && cfg.temperature <= 2.0))
    throw Error("agent temperature must lie in [0, 2]");
  if (cfg.retry.count < 0) throw Error("agent retry count must be >= 0");
  if (cfg.retry.backoff_ms < 0) throw Error("agent retry backoff must be >= 0");
  if (cfg.max_reply_tokens <= 0) throw Error("agent max reply tokens must be positive");
  if (cfg.backend == "http") {
    if (cfg.endpoint.empty()) throw Error("http agent backend requires an endpoint");
    return;
  }
  if (starts_with(cfg.backend, "scripted:")) {
    std::string name = cfg.backend.substr(9);
    if (!client_detail::valid_scripted_name(name))
      throw Error("unknown scripted agent '" + name + "'");
    return;
  }
  throw Error("unknown agent backend '" + cfg.backend + "'");
}

struct ScoreReply {
  int score = 0;
  std::string rationale;
  int readability = 0;
  int maintainability = 0;
  int robustness = 0;
  int standards_compliance = 0;
  bool clamped = false;  // a reported value had to be forced into [0, 100]
};

namespace client_detail {

inline std::optional<int> int_after_prefix(const std::string& line, const std::string& prefix) {
  if (!starts_with(line, prefix)) return std::nullopt;
  std::string rest = trim(line.substr(prefix.size()));
  size_t i = 0;
  bool negative = false;
  if (i < rest.size() && (rest[i] == '-' || rest[i] == '+')) {
    negative = rest[i] == '-';
    ++i;
  }
  size_t start = i;
  long value = 0;
  while (i < rest.size() && rest[i] >= '0' && rest[i] <= '9' && i - start < 9) {
    value = value * 10 + (rest[i] - '0');
    ++i;
  }
  if (i == start) return std::nullopt;
  return static_cast<int>(negative ? -value : value);
}

inline int clamp_score(int v, bool& clamped) {
  if (v < 0) {
    clamped = true;
    return 0;
  }
  if (v > 100) {
    clamped = true;
    return 100;
  }
  return v;
}

}  // namespace client_detail

// Total over all strings: either a usable reply or nullopt (the
// unparseable-score case the pipeline records as score 0).
inline std::optional<ScoreReply> parse_score(const std::string& raw) {
  using client_detail::clamp_score;
  using client_detail::int_after_prefix;

  ScoreReply out;
  bool found = false;
  std::optional<int> read, maintain, robust, standards;
  std::vector<std::string> rest;
  for (const std::string& raw_line : split_lines(raw)) {
    std::string line = trim(raw_line);
    if (!found) {
      if (auto v = int_after_prefix(line, "SCORE:")) {
        out.score = clamp_score(*v, out.clamped);
        found = true;
        continue;
      }
    }
    if (auto v = int_after_prefix(line, "READABILITY:")) {
      read = clamp_score(*v, out.clamped);
      continue;
    }
    if (auto v = int_after_prefix(line, "MAINTAINABILITY:")) {
      maintain = clamp_score(*v, out.clamped);
      continue;
    }
    if (auto v = int_after_prefix(line, "ROBUSTNESS:")) {
      robust = clamp_score(*v, out.clamped);
      continue;
    }
    if (auto v = int_after_prefix(line, "STANDARDS:")) {
      standards = clamp_score(*v, out.clamped);
      continue;
    }
    rest.push_back(raw_line);
  }
  if (!found) return std::nullopt;
  out.readability = read.value_or(out.score);
  out.maintainability = maintain.value_or(out.score);
  out.robustness = robust.value_or(out.score);
  out.standards_compliance = standards.value_or(out.score);
  out.rationale = trim(join(rest, "\n"));
  return out;
}

// Material the scripted backends need but a prompt does not carry: the
// known-good source an oracle hands back.
struct ScriptContext {
  std::string reference_source;
};

class AgentClient {
 public:
  explicit AgentClient(AgentConfig cfg, ScriptContext ctx = {})
      : cfg_(std::move(cfg)), ctx_(std::move(ctx)) {
    validate(cfg_);
  }

  const AgentConfig& config() const { return cfg_; }
  int calls() const { return calls_; }

  std::string invoke(const PromptSet& prompt) {
    ++calls_;
    if (cfg_.backend == "http") return invoke_http(prompt);
    return invoke_scripted(cfg_.backend.substr(9), prompt);
  }

 private:
  // ---- scripted backends ----

  std::string shown_code(const PromptSet& prompt) const {
    if (auto code = rtl::extract_code(prompt.user_text)) return code->code;
    return "";
  }

  std::string oracle_reply() const {
    if (ctx_.reference_source.empty())
      throw Error("scripted oracle has no reference source to answer with");
    return "Plan:\n1. Compare the failing design against the specification.\n"
           "2. Rebuild the module in its known-good form.\n\n```verilog\n" +
           ctx_.reference_source + "\n```\n";
  }

  std::string corruptor_reply(const PromptSet& prompt) const {
    std::string code = shown_code(prompt);
    if (code.empty()) code = "module placeholder;\nendmodule\n";
    std::vector<std::string> lines = split_lines(code);
    size_t keep = std::max<size_t>(1, lines.size() * 3 / 10);
    lines.resize(keep);
    return "Plan:\n1. Trim the design to its essence.\n\nOnly the opening of the "
           "module matters:\n\n```verilog\n" +
           join(lines, "\n") + "\n```\n";
  }

  std::string parrot_reply(const PromptSet& prompt) const {
    std::string code = shown_code(prompt);
    if (code.empty()) return "The design already looks right to me.\n";
    return "The design already looks right to me.\n\n```verilog\n" + code + "\n```\n";
  }

  std::string invoke_scripted(const std::string& name, const PromptSet& prompt) {
    if (name == "oracle") return oracle_reply();
    if (name == "corruptor") return corruptor_reply(prompt);
    if (name == "parrot") return parrot_reply(prompt);
    if (name == "silent") return "I cannot improve on this.\n";
    if (starts_with(name, "staged:")) {
      int k = std::stoi(name.substr(7));
      return calls_ == k ? oracle_reply() : corruptor_reply(prompt);
    }
    // score:<n>, validated at construction
    return "SCORE: " + name.substr(6) + "\nRationale: scripted fixed score.\n";
  }

  // ---- http backend ----

  std::string invoke_http(const PromptSet& prompt) const {
    const char* cred = std::getenv(cfg_.credential_env.c_str());
    if (!cred || !*cred)
      throw TransportError("credential environment variable '" + cfg_.credential_env +
                           "' is not set");

    std::string base = cfg_.endpoint;
    std::string prefix;
    size_t scheme = base.find("://");
    size_t slash = scheme == std::string::npos ? base.find('/') : base.find('/', scheme + 3);
    if (slash != std::string::npos) {
      prefix = base.substr(slash);
      base = base.substr(0, slash);
      while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }
    std::string path = prefix + "/chat/completions";

    nlohmann::ordered_json body;
    body["model"] = cfg_.model;
    body["messages"] = {{{"role", "system"}, {"content", prompt.system_text}},
                        {{"role", "user"}, {"content", prompt.user_text}}};
    body["temperature"] = cfg_.temperature;
    body["max_tokens"] = cfg_.max_reply_tokens;
    std::string payload = body.dump();

    httplib::Headers headers = {{"Authorization", "Bearer " + std::string(cred)}};
    std::string last_failure = "no attempt made";
    for (int attempt = 0; attempt <= cfg_.retry.count; ++attempt) {
      if (attempt > 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.retry.backoff_ms * attempt));
      httplib::Client cli(base);
      cli.set_connection_timeout(10, 0);
      cli.set_read_timeout(120, 0);
      auto res = cli.Post(path, headers, payload, "application/json");
      if (!res) {
        last_failure = "transport failure: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_failure = "http status " + std::to_string(res->status);
        continue;
      }
      try {
        auto reply = nlohmann::json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const std::exception& e) {
        throw ProtocolError(std::string("chat reply not in the expected shape: ") + e.what());
      }
    }
    throw TransportError("agent call failed after " + std::to_string(cfg_.retry.count + 1) +
                         " attempts; last failure: " + last_failure);
  }

  AgentConfig cfg_;
  ScriptContext ctx_;
  int calls_ = 0;
};

}  // namespace meic::agent
