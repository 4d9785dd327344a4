#pragma once

// Prompt construction for the two agents. The debug agent gets a role
// preamble, a digest of the error taxonomy and coding guidelines, and a
// self-planning instruction; its user prompt is format-controlled by the
// verdict: compile-only for syntax breaks, compile+simulation for behavioral
// failures. The scorer gets the previous and candidate sources side by side
// and must answer on a fixed "SCORE: n" grammar.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "meic/bundle.hpp"
#include "meic/common.hpp"
#include "meic/inject/category.hpp"
#include "meic/rtl/extract.hpp"
#include "meic/tool/toolchain.hpp"

namespace meic::agent {

struct PromptSet {
  std::string system_text;
  std::string user_text;
  size_t token_estimate = 0;  // rough chars/4 heuristic over both texts

  bool operator==(const PromptSet&) const = default;
};

// The five templates a backend-agnostic conversation needs. User templates
// carry {NAME} placeholders; system templates are shipped fully rendered.
struct PromptPack {
  std::string debug_system;
  std::string debug_user_syntax;    // has no {SIM_LOG} slot by design
  std::string debug_user_function;  // {FAILING_CHECKS}, {SIM_LOG}, {HANG_NOTICE}
  std::string score_system;
  std::string score_user;
};

namespace prompt_detail {

inline std::string render(std::string tpl, const std::map<std::string, std::string>& slots) {
  for (const auto& [key, value] : slots) tpl = replace_all(tpl, "{" + key + "}", value);
  return tpl;
}

inline std::string taxonomy_digest() {
  std::string syntax, function;
  for (inject::ErrorCategory cat : inject::all_categories()) {
    std::string& bucket =
        inject::kind_of(cat) == inject::ErrorKind::Syntax ? syntax : function;
    if (!bucket.empty()) bucket += "; ";
    bucket += inject::title_of(cat);
  }
  return "Common Verilog error categories.\nSyntax errors: " + syntax +
         ".\nFunction errors: " + function + ".";
}

inline std::string guideline_digest() {
  return "Verilog coding guidelines: declare every identifier before use; keep "
         "declared widths consistent across assignments and port connections; use "
         "blocking '=' in combinational always blocks and nonblocking '<=' in clocked "
         "blocks; drive each signal from exactly one block or continuous assign; "
         "connect every port of an instantiated module; terminate statements and "
         "modules completely; keep source files ASCII.";
}

inline std::string spec_or_note(const std::string& spec) {
  return trim(spec).empty() ? std::string("(not provided)") : spec;
}

inline size_t estimate_tokens(const PromptSet& p) {
  return (p.system_text.size() + p.user_text.size()) / 4;
}

}  // namespace prompt_detail

inline PromptPack default_prompt_pack() {
  PromptPack pack;
  pack.debug_system =
      "You are an experienced RTL design engineer debugging Verilog modules.\n\n" +
      prompt_detail::taxonomy_digest() + "\n\n" + prompt_detail::guideline_digest() +
      "\n\n"
      "Before changing anything, write a short numbered plan of the debugging steps "
      "you will take (locate the defect, explain it, fix it, check the fix), then "
      "carry the plan out.\n\n"
      "Reply with your plan and a brief explanation, followed by the complete "
      "corrected source of every module in exactly one fenced code block tagged "
      "verilog. Never split the code across blocks and never omit unchanged lines.";
  pack.debug_user_syntax =
      "The design below fails to compile. Repair it.\n\n"
      "[Specification]\n{SPEC}\n\n"
      "[Current Verilog code]\n```verilog\n{CODE}\n```\n\n"
      "[Compilation log]\n{COMPILE_LOG}\n";
  pack.debug_user_function =
      "The design below compiles but behaves incorrectly. Repair it.\n\n"
      "[Specification]\n{SPEC}\n\n"
      "[Current Verilog code]\n```verilog\n{CODE}\n```\n\n"
      "[Failing checks]\n{FAILING_CHECKS}\n\n"
      "[Compilation log]\n{COMPILE_LOG}\n\n"
      "[Simulation log]\n{SIM_LOG}\n{HANG_NOTICE}";
  pack.score_system =
      "You are a strict Verilog reviewer scoring one debugging step of an automated "
      "repair loop. Rate the candidate revision against the previous version on four "
      "metrics: readability (how clearly the code reads), maintainability (how easily "
      "it can be changed), robustness (how it handles errors and anomalies), and "
      "standards compliance (alignment with established Verilog coding standards). "
      "Penalize unnecessary divergence from the previous version: unrelated rewrites, "
      "renamed signals, or dropped modules lower the score even when the logic looks "
      "plausible.\n\n"
      "Answer with a single line \"SCORE: <integer 0-100>\" first. You may add the "
      "lines \"READABILITY: <0-100>\", \"MAINTAINABILITY: <0-100>\", "
      "\"ROBUSTNESS: <0-100>\" and \"STANDARDS: <0-100>\", then a short rationale.";
  pack.score_user =
      "[Specification]\n{SPEC}\n\n"
      "[Previous version: {PREVIOUS_LINES} code lines]\n```verilog\n{PREVIOUS}\n```\n\n"
      "[Candidate revision: {CANDIDATE_LINES} code lines]\n```verilog\n{CANDIDATE}\n```\n\n"
      "Score the candidate now.\n";
  return pack;
}

// Overrides individual templates from <dir>/<name>.txt when present; anything
// missing keeps its built-in text.
inline PromptPack load_prompt_pack(const std::filesystem::path& dir) {
  PromptPack pack = default_prompt_pack();
  auto maybe = [&](const char* name, std::string& slot) {
    std::filesystem::path p = dir / (std::string(name) + ".txt");
    if (std::filesystem::exists(p)) slot = read_file(p);
  };
  maybe("debug_system", pack.debug_system);
  maybe("debug_user_syntax", pack.debug_user_syntax);
  maybe("debug_user_function", pack.debug_user_function);
  maybe("score_system", pack.score_system);
  maybe("score_user", pack.score_user);
  return pack;
}

// Resolves a pack id: the literal "default" or a directory of template files.
inline PromptPack resolve_prompt_pack(const std::string& id) {
  if (id.empty() || id == "default") return default_prompt_pack();
  if (!std::filesystem::is_directory(id))
    throw Error("prompt pack '" + id + "' is not a template directory");
  return load_prompt_pack(id);
}

// Assembles the debug conversation for a failing design. Syntax breaks get
// the compile log only; behavioral failures also get the failing checks and
// the simulation log; a blown time budget is presented as a behavioral
// failure with an explicit hang notice.
inline PromptSet build_debug_prompt(const DesignBundle& bundle, const tool::Verdict& verdict,
                                    const PromptPack& pack = default_prompt_pack()) {
  using tool::VerdictStatus;
  if (verdict.status != VerdictStatus::SyntaxError &&
      verdict.status != VerdictStatus::FunctionError &&
      verdict.status != VerdictStatus::Timeout)
    throw Error("debug prompt requires an error verdict, got " + tool::to_string(verdict.status));

  PromptSet out;
  out.system_text = pack.debug_system;

  std::map<std::string, std::string> slots = {
      {"SPEC", prompt_detail::spec_or_note(bundle.spec_text)},
      {"CODE", bundle.rtl_source},
      {"COMPILE_LOG", verdict.compile_log.empty() ? std::string("(clean)") : verdict.compile_log},
  };
  if (verdict.status == VerdictStatus::SyntaxError) {
    out.user_text = prompt_detail::render(pack.debug_user_syntax, slots);
  } else {
    std::string checks;
    for (const std::string& c : verdict.failing_checks) checks += "- " + c + "\n";
    if (checks.empty()) checks = "(none recorded)\n";
    slots["FAILING_CHECKS"] = trim(checks);
    slots["SIM_LOG"] = verdict.sim_log.empty() ? std::string("(empty)") : verdict.sim_log;
    slots["HANG_NOTICE"] =
        verdict.status == VerdictStatus::Timeout
            ? "\nNote: the simulation never finished within its time budget. Suspect a "
              "loop whose exit condition can never become true or combinational "
              "feedback.\n"
            : "";
    out.user_text = prompt_detail::render(pack.debug_user_function, slots);
  }
  out.token_estimate = prompt_detail::estimate_tokens(out);
  return out;
}

// Assembles the scorer conversation comparing a candidate against the
// version it is meant to improve. Both sides are labeled with their countable
// line totals so shrinkage is visible at a glance.
inline PromptSet build_score_prompt(const std::string& previous, const std::string& candidate,
                                    const std::string& spec,
                                    const PromptPack& pack = default_prompt_pack()) {
  if (trim(previous).empty()) throw Error("score prompt requires a non-empty previous version");
  if (trim(candidate).empty()) throw Error("score prompt requires a non-empty candidate");

  PromptSet out;
  out.system_text = pack.score_system;
  out.user_text = prompt_detail::render(
      pack.score_user,
      {{"SPEC", prompt_detail::spec_or_note(spec)},
       {"PREVIOUS", previous},
       {"CANDIDATE", candidate},
       {"PREVIOUS_LINES", std::to_string(rtl::countable_lines(previous))},
       {"CANDIDATE_LINES", std::to_string(rtl::countable_lines(candidate))}});
  out.token_estimate = prompt_detail::estimate_tokens(out);
  return out;
}

}  // namespace meic::agent
