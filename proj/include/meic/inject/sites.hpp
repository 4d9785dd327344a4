#pragma once

// Site discovery for fault injection. For a given source and error category
// this produces the list of places where that category's bug pattern can be
// planted, each as a single contiguous byte-span replacement. Replacements
// are built so that reverting the span restores the original bytes exactly.
//
// When the input is syntactically clean, every candidate is vetted against
// the static checker: a syntax-category site must make the checker complain
// and a function-category site must leave it quiet. Sites that fail the vet
// are dropped, so callers can rely on the advertised kind.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "meic/common.hpp"
#include "meic/inject/category.hpp"
#include "meic/rtl/lexer.hpp"
#include "meic/rtl/structure.hpp"
#include "meic/tool/syntax_rules.hpp"

namespace meic::inject {

struct InjectionSite {
  ErrorCategory category = ErrorCategory::PrematureTermination;
  rtl::Span span;             // byte range in the source to replace
  std::string original_text;  // bytes currently occupying the span
  std::string mutated_text;   // replacement bytes (may insert: span may be empty)
  std::string description;

  bool operator==(const InjectionSite&) const = default;
};

inline std::string apply_site(std::string_view source, const InjectionSite& site) {
  if (site.span.begin > site.span.end || site.span.end > source.size())
    throw Error("injection span out of range");
  std::string out;
  out.reserve(source.size() + site.mutated_text.size());
  out.append(source.substr(0, site.span.begin));
  out.append(site.mutated_text);
  out.append(source.substr(site.span.end));
  return out;
}

// Inverse of apply_site: the mutated text sits at span.begin in the mutated
// source; swapping the original bytes back in restores the reference.
inline std::string revert_site(std::string_view mutated, const InjectionSite& site) {
  size_t end = site.span.begin + site.mutated_text.size();
  if (site.span.begin > mutated.size() || end > mutated.size())
    throw Error("injection span out of range for revert");
  std::string out;
  out.append(mutated.substr(0, site.span.begin));
  out.append(site.original_text);
  out.append(mutated.substr(end));
  return out;
}

namespace site_detail {

using rtl::Token;
using rtl::TokenKind;

constexpr std::string_view kFragmentPrefix = "module __fragment__; ";

// Shared scan state. Sources without a module keyword are wrapped in a
// synthetic module (mirroring the static checker) so fragment snippets still
// expose their structure; spans are shifted back afterwards.
struct Scan {
  std::string effective;
  size_t shift = 0;
  std::vector<Token> tokens;
  rtl::StructureIndex idx;
  bool original_clean = false;
};

inline Scan make_scan(std::string_view source) {
  Scan s;
  bool has_module = false;
  for (const Token& t : rtl::tokenize(source)) {
    if (t.kind == TokenKind::Keyword && (t.text == "module" || t.text == "macromodule")) {
      has_module = true;
      break;
    }
  }
  if (has_module) {
    s.effective.assign(source);
  } else {
    s.effective = std::string(kFragmentPrefix);
    s.effective += source;
    s.effective += "\nendmodule\n";
    s.shift = kFragmentPrefix.size();
  }
  s.tokens = rtl::tokenize(s.effective);
  s.idx = rtl::scan_structure(s.effective);
  s.original_clean = tool::check_syntax(source).empty();
  return s;
}

inline size_t next_sig(const std::vector<Token>& toks, size_t i) {
  for (size_t j = i + 1; j < toks.size(); ++j)
    if (rtl::is_significant(toks[j])) return j;
  return toks.size();
}

inline size_t prev_sig(const std::vector<Token>& toks, size_t i) {
  for (size_t j = i; j-- > 0;)
    if (rtl::is_significant(toks[j])) return j;
  return toks.size();
}

inline rtl::Span token_span(const Token& t) {
  return {t.offset, t.offset + t.text.size()};
}

inline std::string slice(const Scan& s, const rtl::Span& sp) {
  return s.effective.substr(sp.begin, sp.end - sp.begin);
}

inline void add_site(const Scan& s, std::vector<InjectionSite>& out, ErrorCategory cat,
                     rtl::Span span, std::string mutated, std::string desc) {
  InjectionSite site;
  site.category = cat;
  site.span = span;
  site.original_text = slice(s, span);
  site.mutated_text = std::move(mutated);
  site.description = std::move(desc);
  out.push_back(std::move(site));
}

inline std::optional<long long> parse_plain_int(const std::string& text) {
  if (text.empty()) return std::nullopt;
  long long v = 0;
  size_t digits = 0;
  for (char ch : text) {
    if (ch == '_') continue;
    if (ch < '0' || ch > '9') return std::nullopt;
    if (++digits > 12) return std::nullopt;
    v = v * 10 + (ch - '0');
  }
  return digits ? std::optional<long long>(v) : std::nullopt;
}

// Decomposes a sized binary literal like 4'b1010. Returns {digits, value}
// with underscores stripped, or nothing when the token is something else.
struct BinaryLiteral {
  std::string digits;
  unsigned long long value = 0;
};

inline std::optional<BinaryLiteral> parse_binary_literal(const std::string& text) {
  size_t q = text.find('\'');
  if (q == std::string::npos || q + 1 >= text.size()) return std::nullopt;
  size_t b = q + 1;
  if (text[b] == 's' || text[b] == 'S') ++b;
  if (b >= text.size() || (text[b] != 'b' && text[b] != 'B')) return std::nullopt;
  BinaryLiteral lit;
  for (size_t i = b + 1; i < text.size(); ++i) {
    char ch = text[i];
    if (ch == '_') continue;
    if (ch != '0' && ch != '1') return std::nullopt;
    if (lit.digits.size() >= 18) return std::nullopt;
    lit.digits += ch;
    lit.value = (lit.value << 1) | static_cast<unsigned>(ch - '0');
  }
  if (lit.digits.empty()) return std::nullopt;
  return lit;
}

// ---- per-category collectors ------------------------------------------------

// Statement terminators: dropping a ';' that ends a header, declaration, or
// assignment leaves the statement running into the next one.
inline void collect_premature(const Scan& s, std::vector<InjectionSite>& out) {
  auto add_end = [&](const rtl::Span& sp, int line) {
    if (!sp.valid() || sp.end > s.effective.size()) return;
    if (s.effective[sp.end - 1] != ';') return;
    add_site(s, out, ErrorCategory::PrematureTermination, {sp.end - 1, sp.end}, "",
             "drop the ';' ending the statement on line " + std::to_string(line));
  };
  for (const auto& m : s.idx.modules) {
    add_end(m.header, m.line);
    for (const auto& d : m.declarations) add_end(d.span, d.line);
    for (const auto& a : m.assigns) add_end(a.span, a.line);
    for (const auto& ab : m.always_blocks)
      for (const auto& pa : ab.assignments) add_end(pa.span, pa.line);
  }
}

// Adjacent-character transpositions of a name, tried from the end inward so
// the word keeps its leading shape (result -> resutl).
inline std::optional<std::string> misspell(const Scan& s, const std::string& name) {
  if (name.size() < 3) return std::nullopt;
  for (size_t i = name.size() - 2; i >= 1; --i) {
    std::string cand = name;
    std::swap(cand[i], cand[i + 1]);
    if (cand == name) continue;
    if (rtl::is_keyword(cand)) continue;
    if (s.idx.uses_identifier(cand)) continue;
    return cand;
  }
  return std::nullopt;
}

inline void collect_undefined(const Scan& s, std::vector<InjectionSite>& out) {
  auto add_lhs = [&](const std::string& name, const rtl::Span& name_span) {
    if (!name_span.valid()) return;
    auto cand = misspell(s, name);
    if (!cand) return;
    add_site(s, out, ErrorCategory::UndefinedVariable, name_span, *cand,
             "misspell '" + name + "' as '" + *cand + "'");
  };
  for (const auto& m : s.idx.modules) {
    for (const auto& a : m.assigns) add_lhs(a.lhs_name, a.lhs_name_span);
    for (const auto& ab : m.always_blocks)
      for (const auto& pa : ab.assignments) add_lhs(pa.lhs_name, pa.lhs_name_span);
  }
}

inline void collect_operator(const Scan& s, std::vector<InjectionSite>& out) {
  for (const Token& t : s.tokens) {
    if (t.kind == TokenKind::Operator && t.text == "==") {
      add_site(s, out, ErrorCategory::OperatorMisuse, token_span(t), "=",
               "turn the comparison on line " + std::to_string(t.line) + " into an assignment");
    }
  }
}

inline void collect_redundant(const Scan& s, std::vector<InjectionSite>& out) {
  for (const auto& m : s.idx.modules) {
    if (m.ports.empty()) continue;
    for (const auto& d : m.declarations) {
      if (d.kind != rtl::DeclKind::Reg && d.kind != rtl::DeclKind::Wire &&
          d.kind != rtl::DeclKind::Integer && d.kind != rtl::DeclKind::OtherNet)
        continue;
      if (!d.name_span.valid() || d.name.empty()) continue;
      if (m.find_port(d.name)) continue;  // already a port: different bug
      const rtl::Port* repl = nullptr;
      for (const auto& p : m.ports)
        if (p.dir == rtl::PortDir::Input && p.name != d.name) { repl = &p; break; }
      if (!repl)
        for (const auto& p : m.ports)
          if (p.name != d.name) { repl = &p; break; }
      if (!repl) continue;
      add_site(s, out, ErrorCategory::RedundantVariableDeclaration, d.name_span, repl->name,
               "redeclare port '" + repl->name + "' in place of '" + d.name + "'");
    }
  }
}

inline void collect_encoding(const Scan& s, std::vector<InjectionSite>& out) {
  auto accented = [](char v) -> std::string {
    switch (v) {
      case 'a': return "\xC3\xA2";
      case 'e': return "\xC3\xAA";
      case 'i': return "\xC3\xAE";
      case 'o': return "\xC3\xB4";
      default: return "\xC3\xBB";
    }
  };
  for (const Token& t : s.tokens) {
    if (t.kind != TokenKind::Identifier || t.non_ansi) continue;
    if (!t.text.empty() && (t.text[0] == '$' || t.text[0] == '\\')) continue;
    size_t v = t.text.find_first_of("aeiou");
    if (v == std::string::npos) continue;
    std::string mutated = t.text.substr(0, v) + accented(t.text[v]) + t.text.substr(v + 1);
    add_site(s, out, ErrorCategory::IncorrectEncoding, token_span(t), mutated,
             "replace '" + std::string(1, t.text[v]) + "' in '" + t.text +
                 "' with a non-ASCII look-alike");
  }
}

inline bool lhs_is_reg(const rtl::ModuleInfo& m, const std::string& name) {
  if (const auto* d = m.find_decl(name))
    return d->kind == rtl::DeclKind::Reg || d->kind == rtl::DeclKind::Integer;
  if (const auto* p = m.find_port(name)) return p->reg_qualified;
  return false;
}

inline void collect_datatype(const Scan& s, std::vector<InjectionSite>& out) {
  for (const auto& m : s.idx.modules) {
    for (const auto& ab : m.always_blocks) {
      if (!ab.single_assignment || ab.edge_triggered || !ab.has_event_control) continue;
      const auto& pa = ab.assignments[0];
      if (!lhs_is_reg(m, pa.lhs_name)) continue;
      if (!pa.op_span.valid() || pa.op_span.begin <= ab.span.begin) continue;
      std::string lhs = trim(s.effective.substr(pa.span.begin, pa.op_span.begin - pa.span.begin));
      std::string rhs = trim(slice(s, pa.rhs));
      if (lhs.empty() || rhs.empty()) continue;
      add_site(s, out, ErrorCategory::IncorrectDataTypeAssignment, ab.span,
               "assign " + lhs + " = " + rhs + ";",
               "drive reg '" + pa.lhs_name + "' with a continuous assign");
    }
  }
}

inline void collect_portmode(const Scan& s, std::vector<InjectionSite>& out) {
  for (const auto& m : s.idx.modules) {
    for (const auto& d : m.declarations) {
      if (d.kind != rtl::DeclKind::Direction) continue;
      if (d.dir != rtl::PortDir::Output && d.dir != rtl::PortDir::Inout) continue;
      if (!d.span.valid()) continue;
      add_site(s, out, ErrorCategory::PortModeDeclarationError, d.span,
               "//Declaration for " + d.name + " is missing.",
               "remove the direction declaration of '" + d.name + "'");
    }
  }
}

inline std::optional<rtl::Range> range_of(const rtl::ModuleInfo& m, const std::string& name) {
  if (const auto* d = m.find_decl(name)) {
    if (d->has_range && d->range.known) return d->range;
  }
  if (const auto* p = m.find_port(name)) {
    if (p->has_range && p->range.known) return p->range;
  }
  return std::nullopt;
}

inline bool inside_declaration(const rtl::ModuleInfo& m, size_t offset) {
  for (const auto& d : m.declarations)
    if (d.span.valid() && offset >= d.span.begin && offset < d.span.end) return true;
  return false;
}

inline void collect_index(const Scan& s, std::vector<InjectionSite>& out) {
  const auto& toks = s.tokens;
  for (size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind != TokenKind::Identifier) continue;
    const rtl::ModuleInfo* m = s.idx.module_at(t.offset);
    if (!m || inside_declaration(*m, t.offset)) continue;
    auto range = range_of(*m, t.text);
    if (!range || range->msb < range->lsb) continue;
    size_t open = next_sig(toks, i);
    if (open >= toks.size() || toks[open].text != "[") continue;
    size_t a = next_sig(toks, open);
    if (a >= toks.size() || toks[a].kind != TokenKind::Number) continue;
    auto n1 = parse_plain_int(toks[a].text);
    if (!n1) continue;
    size_t b = next_sig(toks, a);
    if (b >= toks.size()) continue;
    if (toks[b].text == ":") {
      size_t c = next_sig(toks, b);
      if (c >= toks.size() || toks[c].kind != TokenKind::Number) continue;
      auto n2 = parse_plain_int(toks[c].text);
      if (!n2) continue;
      size_t close = next_sig(toks, c);
      if (close >= toks.size() || toks[close].text != "]") continue;
      if (*n2 != range->lsb || *n1 < *n2 || *n1 > range->msb) continue;
      rtl::Span sp{toks[open].offset, token_span(toks[close]).end};
      add_site(s, out, ErrorCategory::DataIndexOutOfBounds, sp,
               "[" + std::to_string(*n1 - 1) + ":" + std::to_string(*n2 - 1) + "]",
               "shift the part-select of '" + t.text + "' below its declared range");
    } else if (toks[b].text == "]") {
      if (!range->contains(static_cast<int>(*n1))) continue;
      int beyond = std::max(range->msb, range->lsb) + 1;
      rtl::Span sp{toks[open].offset, token_span(toks[b]).end};
      add_site(s, out, ErrorCategory::DataIndexOutOfBounds, sp,
               "[" + std::to_string(beyond) + "]",
               "index '" + t.text + "' one past its declared range");
    }
  }
}

inline void collect_keyword(const Scan& s, std::vector<InjectionSite>& out) {
  auto add_name = [&](const std::string& name, const rtl::Span& name_span) {
    if (!name_span.valid() || name.empty() || name == "always") return;
    add_site(s, out, ErrorCategory::ImproperKeywordUse, name_span, "always",
             "reserved word in place of '" + name + "'");
  };
  for (const auto& m : s.idx.modules) {
    for (const auto& p : m.ports)
      if (p.ansi) add_name(p.name, p.name_span);
    for (const auto& d : m.declarations) add_name(d.name, d.name_span);
  }
}

// Locates the "[msb:lsb]" token group that belongs to a declaration or ANSI
// port: the bracket group closest before the name with only keywords and
// blanks in between.
inline std::optional<rtl::Span> range_group_before(const Scan& s, size_t region_begin,
                                                   size_t name_offset) {
  const auto& toks = s.tokens;
  std::optional<rtl::Span> best;
  for (size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.offset < region_begin) continue;
    if (t.offset >= name_offset) break;
    if (t.text != "[" || t.kind != TokenKind::Punct) continue;
    size_t a = next_sig(toks, i);
    if (a >= toks.size() || toks[a].kind != TokenKind::Number) continue;
    size_t colon = next_sig(toks, a);
    if (colon >= toks.size() || toks[colon].text != ":") continue;
    size_t b = next_sig(toks, colon);
    if (b >= toks.size() || toks[b].kind != TokenKind::Number) continue;
    size_t close = next_sig(toks, b);
    if (close >= toks.size() || toks[close].text != "]") continue;
    rtl::Span group{t.offset, token_span(toks[close]).end};
    if (group.end > name_offset) continue;
    // reject when anything but keywords sits between the group and the name
    bool clean_gap = true;
    for (size_t j = close + 1; j < toks.size() && toks[j].offset < name_offset; ++j) {
      if (!rtl::is_significant(toks[j])) continue;
      if (toks[j].kind != TokenKind::Keyword) { clean_gap = false; break; }
    }
    if (clean_gap) best = group;
  }
  return best;
}

inline void collect_bitwidth(const Scan& s, std::vector<InjectionSite>& out) {
  auto add_range = [&](const rtl::Range& r, size_t region_begin, const rtl::Span& name_span,
                       const std::string& name) {
    if (!r.known || r.width() < 2 || !name_span.valid()) return;
    auto group = range_group_before(s, region_begin, name_span.begin);
    if (!group) return;
    int new_lsb = r.msb >= r.lsb ? r.lsb + 1 : r.lsb - 1;
    add_site(s, out, ErrorCategory::InsufficientBitWidth, *group,
             "[" + std::to_string(r.msb) + ":" + std::to_string(new_lsb) + "]",
             "narrow '" + name + "' by one bit");
  };
  for (const auto& m : s.idx.modules) {
    for (const auto& p : m.ports)
      if (p.ansi && p.has_range) add_range(p.range, m.header.begin, p.name_span, p.name);
    for (const auto& d : m.declarations) {
      if (d.kind == rtl::DeclKind::Parameter || d.kind == rtl::DeclKind::Localparam) continue;
      if (d.has_range) add_range(d.range, d.span.begin, d.name_span, d.name);
    }
  }
}

inline void collect_portconn(const Scan& s, std::vector<InjectionSite>& out) {
  for (const auto& m : s.idx.modules) {
    for (const auto& inst : m.instantiations) {
      const rtl::PortConnection* last = nullptr;
      for (const auto& c : inst.connections)
        if (c.named && !c.actual_text.empty() && c.actual_span.valid()) last = &c;
      if (!last) continue;
      add_site(s, out, ErrorCategory::IncompletePortConnection, last->actual_span, "",
               "leave port '." + last->formal + "' of instance '" + inst.instance_name +
                   "' unconnected");
    }
  }
}

inline void collect_sensitivity(const Scan& s, std::vector<InjectionSite>& out) {
  for (const auto& m : s.idx.modules) {
    for (const auto& ab : m.always_blocks) {
      if (!ab.edge_triggered || !ab.body.valid()) continue;
      const Token* last_edge = nullptr;
      std::string signal;
      for (size_t i = 0; i < s.tokens.size(); ++i) {
        const Token& t = s.tokens[i];
        if (t.offset < ab.span.begin || t.offset >= ab.body.begin) continue;
        if (t.kind == TokenKind::Keyword && (t.text == "posedge" || t.text == "negedge")) {
          last_edge = &t;
          size_t j = next_sig(s.tokens, i);
          signal = j < s.tokens.size() ? s.tokens[j].text : "";
        }
      }
      if (!last_edge) continue;
      std::string flipped = last_edge->text == "posedge" ? "negedge" : "posedge";
      add_site(s, out, ErrorCategory::FlawedSensitivityList, token_span(*last_edge), flipped,
               "react to the " + flipped + " of '" + signal + "' instead");
    }
  }
}

inline void collect_misuse(const Scan& s, std::vector<InjectionSite>& out) {
  for (const auto& m : s.idx.modules) {
    for (const auto& ab : m.always_blocks) {
      if (!ab.edge_triggered) continue;
      for (const auto& pa : ab.assignments) {
        if (!pa.nonblocking || !pa.op_span.valid()) continue;
        add_site(s, out, ErrorCategory::MisuseOfAssignments, pa.op_span, "=",
                 "blocking assignment to '" + pa.lhs_name + "' in a clocked block");
      }
    }
  }
}

inline bool binary_operand_before(const std::vector<Token>& toks, size_t i) {
  size_t p = prev_sig(toks, i);
  if (p >= toks.size()) return false;
  const Token& t = toks[p];
  if (t.kind == TokenKind::Identifier || t.kind == TokenKind::Number) return true;
  return t.kind == TokenKind::Punct &&
         (t.text == ")" || t.text == "]" || t.text == "}");
}

inline void collect_logical(const Scan& s, std::vector<InjectionSite>& out) {
  auto scan_rhs = [&](const rtl::Span& rhs, const std::string& lhs) {
    if (!rhs.valid()) return;
    for (size_t i = 0; i < s.tokens.size(); ++i) {
      const Token& t = s.tokens[i];
      if (t.offset < rhs.begin || t.offset >= rhs.end) continue;
      if (t.kind != TokenKind::Operator || (t.text != "+" && t.text != "&")) continue;
      if (!binary_operand_before(s.tokens, i)) continue;
      std::string swapped = t.text == "+" ? "&" : "+";
      add_site(s, out, ErrorCategory::LogicalErrorInExpression, token_span(t), swapped,
               "'" + t.text + "' becomes '" + swapped + "' in the expression driving '" +
                   lhs + "'");
    }
  };
  for (const auto& m : s.idx.modules) {
    for (const auto& a : m.assigns) scan_rhs(a.rhs, a.lhs_name);
    for (const auto& ab : m.always_blocks)
      for (const auto& pa : ab.assignments) scan_rhs(pa.rhs, pa.lhs_name);
  }
}

// A second driver for the same signal: duplicate the assign or the
// single-statement always block with an inverted right-hand side.
inline std::string conflicting_rhs(const Scan& s, const rtl::Span& rhs) {
  const Token* only = nullptr;
  int sig_count = 0;
  for (const Token& t : s.tokens) {
    if (t.offset < rhs.begin || t.offset >= rhs.end) continue;
    if (!rtl::is_significant(t)) continue;
    ++sig_count;
    only = &t;
  }
  if (sig_count == 1 && only->kind == TokenKind::Number) {
    if (auto lit = parse_binary_literal(only->text)) {
      std::string flipped = only->text;
      size_t last = flipped.find_last_of("01");
      if (last != std::string::npos && last > flipped.find('\'')) {
        flipped[last] = flipped[last] == '0' ? '1' : '0';
        return flipped;
      }
    }
  }
  return "~(" + trim(s.effective.substr(rhs.begin, rhs.end - rhs.begin)) + ")";
}

inline void collect_concurrent(const Scan& s, std::vector<InjectionSite>& out) {
  for (const auto& m : s.idx.modules) {
    for (const auto& a : m.assigns) {
      if (!a.span.valid() || !a.rhs.valid()) continue;
      if (s.effective[a.span.end - 1] != ';') continue;
      // recover the full LHS text: everything between 'assign' and the '='
      size_t eq = a.rhs.begin;
      while (eq > a.span.begin && s.effective[eq - 1] != '=') --eq;
      if (eq <= a.span.begin + 6) continue;
      std::string lhs = trim(s.effective.substr(a.span.begin + 6, eq - 1 - (a.span.begin + 6)));
      if (lhs.empty()) continue;
      std::string dup = "\nassign " + lhs + " = " + conflicting_rhs(s, a.rhs) + ";";
      add_site(s, out, ErrorCategory::ConcurrentVariableUse, {a.span.end, a.span.end}, dup,
               "second continuous driver for '" + a.lhs_name + "'");
    }
    for (const auto& ab : m.always_blocks) {
      if (!ab.single_assignment || ab.edge_triggered || !ab.has_event_control) continue;
      const auto& pa = ab.assignments[0];
      if (!pa.rhs.valid() || pa.rhs.begin < ab.span.begin || pa.rhs.end > ab.span.end) continue;
      std::string block = slice(s, ab.span);
      size_t rel_begin = pa.rhs.begin - ab.span.begin;
      size_t rel_len = pa.rhs.end - pa.rhs.begin;
      block.replace(rel_begin, rel_len, conflicting_rhs(s, pa.rhs));
      add_site(s, out, ErrorCategory::ConcurrentVariableUse, {ab.span.end, ab.span.end},
               "\n" + block, "second procedural driver for '" + pa.lhs_name + "'");
    }
  }
}

inline void collect_mismatched(const Scan& s, std::vector<InjectionSite>& out) {
  const auto& toks = s.tokens;
  for (size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind != TokenKind::Number) continue;
    auto lit = parse_binary_literal(t.text);
    if (!lit) continue;
    auto as_decimal = parse_plain_int(lit->digits);
    if (!as_decimal || static_cast<unsigned long long>(*as_decimal) == lit->value) continue;
    size_t p = prev_sig(toks, i);
    size_t n = next_sig(toks, i);
    bool next_to_compare =
        (p < toks.size() && toks[p].kind == TokenKind::Operator && toks[p].text == "==") ||
        (n < toks.size() && toks[n].kind == TokenKind::Operator && toks[n].text == "==");
    if (!next_to_compare) continue;
    add_site(s, out, ErrorCategory::MismatchedAssignmentValues, token_span(t), lit->digits,
             "compare against bare '" + lit->digits + "' instead of " + t.text);
  }
}

inline void collect_instantiation(const Scan& s, std::vector<InjectionSite>& out) {
  for (const auto& m : s.idx.modules) {
    for (const auto& inst : m.instantiations) {
      const std::string& name = inst.module_name;
      if (name.size() < 3 || !inst.module_name_span.valid()) continue;
      for (size_t i = name.size() - 2; i >= 1; --i) {
        std::string cand = name;
        std::swap(cand[i], cand[i + 1]);
        if (cand == name || rtl::is_keyword(cand) || s.idx.find_module(cand)) continue;
        add_site(s, out, ErrorCategory::IncorrectModuleInstantiation, inst.module_name_span,
                 cand, "instantiate undeclared module '" + cand + "'");
        break;
      }
    }
  }
}

inline void collect_infinite(const Scan& s, std::vector<InjectionSite>& out) {
  for (const auto& m : s.idx.modules) {
    for (const auto& fl : m.for_loops) {
      if (fl.step.lhs_name.empty() || !fl.step.rhs.valid()) continue;
      std::string rhs = trim(slice(s, fl.step.rhs));
      if (rhs == fl.step.lhs_name) continue;
      add_site(s, out, ErrorCategory::InfiniteLoopConstruct, fl.step.rhs, fl.step.lhs_name,
               "loop counter '" + fl.step.lhs_name + "' stops advancing");
    }
  }
  // next_x = ... assignments: feed the next-state value from the current state
  const auto& toks = s.tokens;
  for (size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind != TokenKind::Identifier || !starts_with(t.text, "next_") ||
        t.text.size() <= 5)
      continue;
    size_t op = next_sig(toks, i);
    if (op >= toks.size() || toks[op].kind != TokenKind::Operator ||
        (toks[op].text != "=" && toks[op].text != "<="))
      continue;
    std::string target = "current_" + t.text.substr(5);
    size_t first = next_sig(toks, op);
    if (first >= toks.size()) continue;
    size_t last = toks.size();
    for (size_t j = first; j < toks.size(); ++j) {
      if (!rtl::is_significant(toks[j])) continue;
      if (toks[j].kind == TokenKind::Punct && toks[j].text == ";") { last = j; break; }
    }
    if (last >= toks.size()) continue;
    size_t rhs_end = toks[last].offset;
    while (rhs_end > toks[first].offset &&
           std::isspace(static_cast<unsigned char>(s.effective[rhs_end - 1])))
      --rhs_end;
    rtl::Span rhs{toks[first].offset, rhs_end};
    if (!rhs.valid() || trim(slice(s, rhs)) == target) continue;
    add_site(s, out, ErrorCategory::InfiniteLoopConstruct, rhs, target,
             "'" + t.text + "' fed from the current state, so it never progresses");
  }
}

}  // namespace site_detail

// Every place where `category`'s bug pattern applies to `source`, in span
// order. An empty result means the construct is absent, which is not an
// error: loop-free designs simply have no infinite-loop sites.
inline std::vector<InjectionSite> list_sites(std::string_view source, ErrorCategory category) {
  using namespace site_detail;
  Scan s = make_scan(source);
  std::vector<InjectionSite> raw;
  switch (category) {
    case ErrorCategory::PrematureTermination: collect_premature(s, raw); break;
    case ErrorCategory::UndefinedVariable: collect_undefined(s, raw); break;
    case ErrorCategory::OperatorMisuse: collect_operator(s, raw); break;
    case ErrorCategory::RedundantVariableDeclaration: collect_redundant(s, raw); break;
    case ErrorCategory::IncorrectEncoding: collect_encoding(s, raw); break;
    case ErrorCategory::IncorrectDataTypeAssignment: collect_datatype(s, raw); break;
    case ErrorCategory::PortModeDeclarationError: collect_portmode(s, raw); break;
    case ErrorCategory::DataIndexOutOfBounds: collect_index(s, raw); break;
    case ErrorCategory::ImproperKeywordUse: collect_keyword(s, raw); break;
    case ErrorCategory::InsufficientBitWidth: collect_bitwidth(s, raw); break;
    case ErrorCategory::IncompletePortConnection: collect_portconn(s, raw); break;
    case ErrorCategory::FlawedSensitivityList: collect_sensitivity(s, raw); break;
    case ErrorCategory::MisuseOfAssignments: collect_misuse(s, raw); break;
    case ErrorCategory::LogicalErrorInExpression: collect_logical(s, raw); break;
    case ErrorCategory::ConcurrentVariableUse: collect_concurrent(s, raw); break;
    case ErrorCategory::MismatchedAssignmentValues: collect_mismatched(s, raw); break;
    case ErrorCategory::IncorrectModuleInstantiation: collect_instantiation(s, raw); break;
    case ErrorCategory::InfiniteLoopConstruct: collect_infinite(s, raw); break;
  }

  std::vector<InjectionSite> sites;
  for (auto& site : raw) {
    // clip to the user's bytes (drops anything the fragment wrapper added)
    if (site.span.begin < s.shift || site.span.end > s.shift + source.size()) continue;
    site.span.begin -= s.shift;
    site.span.end -= s.shift;
    if (site.original_text == site.mutated_text) continue;
    sites.push_back(std::move(site));
  }
  std::sort(sites.begin(), sites.end(), [](const InjectionSite& a, const InjectionSite& b) {
    if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
    if (a.span.end != b.span.end) return a.span.end < b.span.end;
    return a.mutated_text < b.mutated_text;
  });
  sites.erase(std::unique(sites.begin(), sites.end(),
                          [](const InjectionSite& a, const InjectionSite& b) {
                            return a.span.begin == b.span.begin && a.span.end == b.span.end &&
                                   a.mutated_text == b.mutated_text;
                          }),
              sites.end());

  // vet against the static checker when the input itself is clean
  if (s.original_clean) {
    ErrorKind kind = kind_of(category);
    std::vector<InjectionSite> vetted;
    for (auto& site : sites) {
      bool dirty = !tool::check_syntax(apply_site(source, site)).empty();
      if ((kind == ErrorKind::Syntax) == dirty) vetted.push_back(std::move(site));
    }
    sites = std::move(vetted);
  }
  return sites;
}

}  // namespace meic::inject
