#pragma once

// Pulls RTL source out of an agent reply and measures how complete a
// candidate is relative to a baseline, counted in lines that carry code.

#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "meic/common.hpp"
#include "meic/rtl/lexer.hpp"

namespace meic::rtl {

struct ExtractedCode {
  std::string code;
  bool fenced = false;          // came from a ``` block
  bool multiple_blocks = false; // reply had more than one eligible block
};

namespace detail {

inline bool contains_module_keyword(std::string_view text) {
  for (const Token& t : tokenize(text)) {
    if (t.kind == TokenKind::Keyword && t.text == "module") return true;
  }
  return false;
}

// First significant token is `module`, optionally preceded by compiler
// directives (`timescale 1ns/1ps and friends).
inline bool starts_like_rtl(std::string_view text) {
  std::vector<Token> toks = tokenize(text);
  size_t i = 0;
  while (i < toks.size()) {
    const Token& t = toks[i];
    if (!is_significant(t)) {
      ++i;
      continue;
    }
    if (t.kind == TokenKind::Keyword && (t.text == "module" || t.text == "macromodule"))
      return true;
    if (t.kind == TokenKind::Other && !t.text.empty() && t.text[0] == '`') {
      // skip the directive and the rest of its line
      int line = t.line;
      ++i;
      while (i < toks.size() && toks[i].line == line) ++i;
      continue;
    }
    return false;
  }
  return false;
}

struct Fence {
  std::string tag;
  std::string body;
};

inline std::vector<Fence> find_fences(std::string_view reply) {
  std::vector<Fence> fences;
  std::vector<std::string> lines = split_lines(reply);
  bool open = false;
  Fence current;
  for (const std::string& raw : lines) {
    std::string line = trim(raw);
    if (starts_with(line, "```")) {
      if (!open) {
        open = true;
        current = Fence{};
        current.tag = to_lower(trim(line.substr(3)));
      } else {
        open = false;
        if (!current.body.empty() && current.body.back() == '\n') current.body.pop_back();
        fences.push_back(std::move(current));
        current = Fence{};
      }
      continue;
    }
    if (open) {
      current.body += raw;
      current.body += '\n';
    }
  }
  return fences;
}

inline bool eligible_fence(const Fence& f) {
  if (f.tag == "verilog" || f.tag == "systemverilog" || f.tag == "sv" || f.tag == "v")
    return true;
  if (f.tag.empty()) return contains_module_keyword(f.body);
  return false;
}

}  // namespace detail

// Finds RTL in an agent reply. Preference order: first eligible fenced block
// (tagged verilog/systemverilog/sv/v, or untagged but containing a module);
// otherwise the whole reply when it reads as bare RTL. Returns nullopt when
// nothing code-like is present.
inline std::optional<ExtractedCode> extract_code(std::string_view reply) {
  std::vector<detail::Fence> fences = detail::find_fences(reply);
  ExtractedCode out;
  bool found = false;
  for (const auto& f : fences) {
    if (!detail::eligible_fence(f)) continue;
    if (!found) {
      out.code = f.body;
      out.fenced = true;
      found = true;
    } else {
      out.multiple_blocks = true;
    }
  }
  if (found) return out;
  if (fences.empty() && detail::starts_like_rtl(reply)) {
    out.code = std::string(reply);
    out.fenced = false;
    return out;
  }
  return std::nullopt;
}

// Number of lines that still carry code once comments are stripped: a line
// counts when at least one of its tokens is neither whitespace nor comment.
inline size_t countable_lines(std::string_view source) {
  std::set<int> lines;
  for (const Token& t : tokenize(source)) {
    if (!is_significant(t)) continue;
    int line = t.line;
    // multi-line significant tokens count every line they touch
    lines.insert(line);
    for (char c : t.text)
      if (c == '\n') lines.insert(++line);
  }
  return lines.size();
}

// Ratio of candidate countable lines to baseline countable lines. The
// baseline must itself have countable content.
inline double completeness_ratio(std::string_view candidate, std::string_view baseline) {
  size_t base = countable_lines(baseline);
  if (base == 0) throw Error("completeness baseline has no countable lines");
  return static_cast<double>(countable_lines(candidate)) / static_cast<double>(base);
}

}  // namespace meic::rtl
