#pragma once

// Builtin compile stage: a deterministic rule checker that approximates what
// a Verilog compiler rejects. It is tuned to be quiet on the bundled designs
// and loud on the shapes of damage the injector produces: unterminated
// statements, unbalanced structure, undeclared or duplicated names, wrong
// assignment targets, bad constant indexing, reserved-word identifiers,
// missing port directions, assignments inside conditions, and bytes outside
// plain ASCII.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "meic/common.hpp"
#include "meic/rtl/lexer.hpp"
#include "meic/rtl/literal.hpp"
#include "meic/rtl/structure.hpp"

namespace meic::tool {

struct Diagnostic {
  int line = 1;
  std::string rule;
  std::string message;
};

namespace rules_detail {

using rtl::DeclKind;
using rtl::ModuleInfo;
using rtl::PortDir;
using rtl::Token;
using rtl::TokenKind;

inline void check_balance(const std::vector<Token>& toks, std::vector<Diagnostic>& out) {
  struct Counter {
    const char* open;
    const char* close;
    int depth = 0;
    int open_line = 1;
  };
  int paren = 0, bracket = 0, brace = 0;
  int begin_depth = 0, module_depth = 0, case_depth = 0;
  int last_line = 1;
  auto diag = [&](int line, const std::string& msg) {
    out.push_back({line, "balance", msg});
  };
  for (const Token& t : toks) {
    if (!rtl::is_significant(t)) continue;
    last_line = t.line;
    if (t.kind == TokenKind::Punct && t.text.size() == 1) {
      switch (t.text[0]) {
        case '(': ++paren; break;
        case ')': if (--paren < 0) { diag(t.line, "unmatched ')'"); paren = 0; } break;
        case '[': ++bracket; break;
        case ']': if (--bracket < 0) { diag(t.line, "unmatched ']'"); bracket = 0; } break;
        case '{': ++brace; break;
        case '}': if (--brace < 0) { diag(t.line, "unmatched '}'"); brace = 0; } break;
        default: break;
      }
    } else if (t.kind == TokenKind::Keyword) {
      if (t.text == "begin") ++begin_depth;
      else if (t.text == "end") {
        if (--begin_depth < 0) {
          diag(t.line, "'end' without matching 'begin'");
          begin_depth = 0;
        }
      } else if (t.text == "module" || t.text == "macromodule") ++module_depth;
      else if (t.text == "endmodule") {
        if (--module_depth < 0) {
          diag(t.line, "'endmodule' without matching 'module'");
          module_depth = 0;
        }
      } else if (t.text == "case" || t.text == "casex" || t.text == "casez") ++case_depth;
      else if (t.text == "endcase") {
        if (--case_depth < 0) {
          diag(t.line, "'endcase' without matching 'case'");
          case_depth = 0;
        }
      }
    }
  }
  if (paren > 0) diag(last_line, "unbalanced '(': " + std::to_string(paren) + " unclosed");
  if (bracket > 0) diag(last_line, "unbalanced '[': " + std::to_string(bracket) + " unclosed");
  if (brace > 0) diag(last_line, "unbalanced '{': " + std::to_string(brace) + " unclosed");
  if (begin_depth > 0) diag(last_line, "'begin' without matching 'end'");
  if (module_depth > 0) diag(last_line, "missing 'endmodule'");
  if (case_depth > 0) diag(last_line, "missing 'endcase'");
}

inline int line_at(std::string_view src, size_t offset) {
  int line = 1;
  for (size_t i = 0; i < offset && i < src.size(); ++i)
    if (src[i] == '\n') ++line;
  return line;
}

inline bool ends_with_semicolon(std::string_view src, const rtl::Span& span) {
  return span.valid() && span.end <= src.size() && src[span.end - 1] == ';';
}

inline void check_termination(std::string_view src, const rtl::StructureIndex& idx,
                              std::vector<Diagnostic>& out) {
  for (const auto& m : idx.modules) {
    if (!ends_with_semicolon(src, m.header)) {
      out.push_back({line_at(src, m.header.end ? m.header.end - 1 : 0), "terminator",
                     "expected ';' after module header of '" + m.name + "'"});
    }
    std::set<size_t> decl_stmts;  // dedupe multi-name declarations by span end
    for (const auto& d : m.declarations) {
      if (!ends_with_semicolon(src, d.span) && decl_stmts.insert(d.span.end).second) {
        out.push_back({d.line, "terminator",
                       "missing ';' at end of declaration of '" + d.name + "'"});
      }
    }
    for (const auto& a : m.assigns) {
      if (!ends_with_semicolon(src, a.span)) {
        out.push_back({a.line, "terminator",
                       "missing ';' after assignment to '" + a.lhs_name + "'"});
      }
    }
    for (const auto& ab : m.always_blocks) {
      for (const auto& pa : ab.assignments) {
        if (!ends_with_semicolon(src, pa.span)) {
          out.push_back({pa.line, "terminator",
                         "missing ';' after assignment to '" + pa.lhs_name + "'"});
        }
      }
    }
    for (const auto& inst : m.instantiations) {
      if (!ends_with_semicolon(src, inst.span)) {
        out.push_back({inst.line, "terminator",
                       "missing ';' after instantiation '" + inst.instance_name + "'"});
      }
    }
  }
}

inline void check_undeclared(std::string_view src, const std::vector<Token>& toks,
                             const rtl::StructureIndex& idx, std::vector<Diagnostic>& out) {
  std::set<std::string> module_names;
  for (const auto& m : idx.modules) module_names.insert(m.name);

  for (const auto& m : idx.modules) {
    std::set<std::string> declared;
    for (const auto& p : m.ports) declared.insert(p.name);
    for (const auto& d : m.declarations)
      if (!d.keyword_name) declared.insert(d.name);
    for (const auto& inst : m.instantiations) declared.insert(inst.instance_name);

    std::set<size_t> instance_module_offsets;
    for (const auto& inst : m.instantiations)
      instance_module_offsets.insert(inst.module_name_span.begin);

    std::set<std::string> reported;
    const Token* prev_sig = nullptr;
    for (const Token& t : toks) {
      if (!rtl::is_significant(t)) continue;
      if (t.offset < m.span.begin || t.offset >= m.span.end) {
        prev_sig = &t;
        continue;
      }
      if (t.kind == TokenKind::Identifier && !t.text.empty() && t.text[0] != '$' &&
          t.text[0] != '\\') {
        bool after_dot = prev_sig && prev_sig->kind == TokenKind::Punct &&
                         prev_sig->text == ".";
        bool is_instance_module = instance_module_offsets.count(t.offset) != 0;
        bool known = declared.count(t.text) || module_names.count(t.text);
        if (!after_dot && !is_instance_module && !known && !reported.count(t.text)) {
          reported.insert(t.text);
          out.push_back({t.line, "undeclared",
                         "use of undeclared identifier '" + t.text + "'"});
        }
      }
      prev_sig = &t;
    }
  }
  (void)src;
}

inline void check_condition_assign(const std::vector<Token>& toks,
                                   std::vector<Diagnostic>& out) {
  std::vector<Token> sig;
  for (const Token& t : toks)
    if (rtl::is_significant(t)) sig.push_back(t);
  for (size_t i = 0; i < sig.size(); ++i) {
    if (sig[i].kind != TokenKind::Keyword ||
        (sig[i].text != "if" && sig[i].text != "while"))
      continue;
    size_t j = i + 1;
    if (j >= sig.size() || !(sig[j].kind == TokenKind::Punct && sig[j].text == "("))
      continue;
    int depth = 0;
    for (; j < sig.size(); ++j) {
      if (sig[j].kind == TokenKind::Punct && sig[j].text.size() == 1) {
        char c = sig[j].text[0];
        if (c == '(') ++depth;
        if (c == ')' && --depth == 0) break;
      }
      if (sig[j].kind == TokenKind::Operator && sig[j].text == "=") {
        out.push_back({sig[j].line, "condition-assign",
                       "assignment inside '" + sig[i].text +
                           "' condition (did you mean '==')"});
      }
    }
  }
}

inline void check_expression_assign(std::string_view src, const rtl::StructureIndex& idx,
                                    std::vector<Diagnostic>& out) {
  auto scan_span = [&](const rtl::Span& span, const std::string& where) {
    if (!span.valid() || span.end > src.size()) return;
    for (const Token& t : rtl::tokenize(src.substr(span.begin, span.end - span.begin))) {
      if (t.kind == TokenKind::Operator && t.text == "=") {
        out.push_back({line_at(src, span.begin + t.offset), "expression-assign",
                       "unexpected '=' inside " + where + " (did you mean '==')"});
      }
    }
  };
  for (const auto& m : idx.modules) {
    for (const auto& a : m.assigns)
      scan_span(a.rhs, "the right-hand side of assign to '" + a.lhs_name + "'");
    for (const auto& ab : m.always_blocks)
      for (const auto& pa : ab.assignments)
        scan_span(pa.rhs, "the right-hand side of assignment to '" + pa.lhs_name + "'");
  }
}

inline void check_duplicates(const rtl::StructureIndex& idx, std::vector<Diagnostic>& out) {
  for (const auto& m : idx.modules) {
    std::map<std::string, const rtl::Port*> ansi_ports;
    for (const auto& p : m.ports)
      if (p.ansi) ansi_ports.emplace(p.name, &p);

    std::map<std::string, int> type_decl_count;
    std::map<std::string, int> dir_decl_count;
    for (const auto& d : m.declarations) {
      if (d.keyword_name) continue;
      if (d.kind == DeclKind::Direction) {
        if (++dir_decl_count[d.name] == 2) {
          out.push_back({d.line, "duplicate",
                         "direction of '" + d.name + "' declared more than once"});
        }
        if (ansi_ports.count(d.name)) {
          out.push_back({d.line, "duplicate",
                         "port '" + d.name + "' already has a direction in the header"});
        }
        auto it = ansi_ports.find(d.name);
        (void)it;
        continue;
      }
      if (d.kind == DeclKind::Parameter || d.kind == DeclKind::Localparam) continue;
      if (++type_decl_count[d.name] == 2) {
        out.push_back({d.line, "duplicate", "duplicate declaration of '" + d.name + "'"});
      }
      auto it = ansi_ports.find(d.name);
      if (it != ansi_ports.end()) {
        out.push_back({d.line, "duplicate",
                       "'" + d.name + "' is already declared as a port"});
      }
      // non-ANSI input redeclared as a variable
      if (it == ansi_ports.end() && d.kind == DeclKind::Reg) {
        const rtl::Port* p = m.find_port(d.name);
        if (p && !p->ansi && p->dir == PortDir::Input) {
          out.push_back({d.line, "duplicate",
                         "input port '" + d.name + "' redeclared as reg"});
        }
      }
    }
  }
}

inline void check_encoding(const std::vector<Token>& toks, std::vector<Diagnostic>& out) {
  for (const Token& t : toks) {
    if (!t.non_ansi || t.kind == TokenKind::Comment || t.kind == TokenKind::String)
      continue;
    out.push_back({t.line, "encoding",
                   "non-ASCII byte sequence in '" + t.text + "'"});
  }
}

inline bool lhs_is_reg_like(const ModuleInfo& m, const std::string& name) {
  const rtl::Declaration* d = m.find_decl(name);
  if (d) return d->kind == DeclKind::Reg || d->kind == DeclKind::Integer ||
                d->kind == DeclKind::Real;
  const rtl::Port* p = m.find_port(name);
  if (p && p->ansi) return p->reg_qualified;
  return false;
}

inline bool lhs_is_net(const ModuleInfo& m, const std::string& name) {
  const rtl::Declaration* d = m.find_decl(name);
  if (d)
    return d->kind == DeclKind::Wire || d->kind == DeclKind::OtherNet;
  const rtl::Port* p = m.find_port(name);
  if (p && p->declared) {
    // a declared port with no reg qualifier and no variable declaration is a net
    return !(p->ansi && p->reg_qualified);
  }
  return false;
}

inline void check_assignment_targets(const rtl::StructureIndex& idx,
                                     std::vector<Diagnostic>& out) {
  for (const auto& m : idx.modules) {
    for (const auto& a : m.assigns) {
      if (a.lhs_name.empty()) continue;
      if (lhs_is_reg_like(m, a.lhs_name)) {
        out.push_back({a.line, "assignment-target",
                       "continuous assignment to variable '" + a.lhs_name + "'"});
      }
    }
    for (const auto& ab : m.always_blocks) {
      for (const auto& pa : ab.assignments) {
        if (pa.lhs_name.empty()) continue;
        if (lhs_is_net(m, pa.lhs_name)) {
          out.push_back({pa.line, "assignment-target",
                         "procedural assignment to net '" + pa.lhs_name + "'"});
        }
      }
    }
  }
}

inline void check_port_directions(const rtl::StructureIndex& idx,
                                  std::vector<Diagnostic>& out) {
  for (const auto& m : idx.modules) {
    for (const auto& p : m.ports) {
      if (!p.declared) {
        out.push_back({m.line, "port-direction",
                       "port '" + p.name + "' of module '" + m.name +
                           "' has no direction declaration"});
      }
      if (rtl::is_keyword(p.name)) {
        out.push_back({p.line, "reserved-word",
                       "reserved word '" + p.name + "' used as a port name"});
      }
    }
  }
}

inline void check_index_bounds(std::string_view src, const std::vector<Token>& toks,
                               const rtl::StructureIndex& idx,
                               std::vector<Diagnostic>& out) {
  std::vector<const Token*> sig;
  for (const Token& t : toks)
    if (rtl::is_significant(t)) sig.push_back(&t);

  auto const_at = [&](size_t i, int& value, size_t& next) -> bool {
    bool neg = false;
    if (i < sig.size() && sig[i]->kind == TokenKind::Operator && sig[i]->text == "-") {
      neg = true;
      ++i;
    }
    if (i >= sig.size() || sig[i]->kind != TokenKind::Number) return false;
    auto lit = rtl::parse_literal(sig[i]->text);
    if (!lit) return false;
    value = static_cast<int>(lit->value);
    if (neg) value = -value;
    next = i + 1;
    return true;
  };

  for (size_t i = 0; i + 1 < sig.size(); ++i) {
    if (sig[i]->kind != TokenKind::Identifier) continue;
    if (!(sig[i + 1]->kind == TokenKind::Punct && sig[i + 1]->text == "[")) continue;
    const auto* m = idx.module_at(sig[i]->offset);
    if (!m) continue;
    const std::string& name = sig[i]->text;

    const rtl::Declaration* d = m->find_decl(name);
    const rtl::Port* p = m->find_port(name);
    bool has_range = false;
    rtl::Range range;
    if (d) {
      if (d->memory_dim || d->kind == DeclKind::Integer || d->kind == DeclKind::Real ||
          d->kind == DeclKind::Genvar || d->kind == DeclKind::Parameter ||
          d->kind == DeclKind::Localparam)
        continue;
      has_range = d->has_range && d->range.known;
      range = d->range;
      if (d->has_range && !d->range.known) continue;  // parameterized bounds
    } else if (p && p->declared) {
      has_range = p->has_range && p->range.known;
      range = p->range;
      if (p->has_range && !p->range.known) continue;
    } else {
      continue;  // undeclared: covered by the undeclared rule
    }

    // parse [a] or [a:b] with constant bounds
    size_t j = i + 2;
    int first = 0, second = 0;
    size_t next = 0;
    if (!const_at(j, first, next)) continue;
    j = next;
    bool is_part = false;
    if (j < sig.size() && sig[j]->kind == TokenKind::Punct && sig[j]->text == ":") {
      if (!const_at(j + 1, second, next)) continue;
      j = next;
      is_part = true;
    }
    if (j >= sig.size() || !(sig[j]->kind == TokenKind::Punct && sig[j]->text == "]"))
      continue;

    auto complain = [&](int idx_value) {
      out.push_back({sig[i]->line, "index-bounds",
                     "index " + std::to_string(idx_value) + " is outside [" +
                         std::to_string(range.msb) + ":" + std::to_string(range.lsb) +
                         "] of '" + name + "'"});
    };
    if (!has_range) {
      out.push_back({sig[i]->line, "index-bounds",
                     "bit-select of scalar '" + name + "'"});
      continue;
    }
    if (!range.contains(first)) complain(first);
    if (is_part && !range.contains(second)) complain(second);
  }
  (void)src;
}

inline void check_reserved_words(const rtl::StructureIndex& idx,
                                 std::vector<Diagnostic>& out) {
  for (const auto& m : idx.modules) {
    for (const auto& d : m.declarations) {
      if (d.keyword_name) {
        out.push_back({d.line, "reserved-word",
                       "reserved word '" + d.name + "' used as an identifier"});
      }
    }
  }
}

}  // namespace rules_detail

// Runs every rule over the source. Sources with no module wrap into a
// synthetic one so fragments are still checkable; line numbers survive
// because the wrapper stays on the first line.
inline std::vector<Diagnostic> check_syntax(std::string_view source) {
  using namespace rules_detail;
  std::string wrapped;
  std::string_view effective = source;
  bool has_module = false;
  bool has_significant = false;
  for (const Token& t : rtl::tokenize(source)) {
    if (rtl::is_significant(t)) has_significant = true;
    if (t.kind == TokenKind::Keyword && (t.text == "module" || t.text == "macromodule")) {
      has_module = true;
      break;
    }
  }
  if (!has_significant) return {};
  if (!has_module) {
    wrapped = "module __fragment__; ";
    wrapped += source;
    wrapped += "\nendmodule\n";
    effective = wrapped;
  }

  std::vector<Token> toks = rtl::tokenize(effective);
  rtl::StructureIndex idx = rtl::scan_structure(effective);

  std::vector<Diagnostic> out;
  check_balance(toks, out);
  check_termination(effective, idx, out);
  check_undeclared(effective, toks, idx, out);
  check_condition_assign(toks, out);
  check_expression_assign(effective, idx, out);
  check_duplicates(idx, out);
  check_encoding(toks, out);
  check_assignment_targets(idx, out);
  check_port_directions(idx, out);
  check_index_bounds(effective, toks, idx, out);
  check_reserved_words(idx, out);

  std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return a.line < b.line;
  });
  return out;
}

inline std::string format_compile_log(const std::vector<Diagnostic>& diags,
                                      std::string_view filename = "design.v") {
  std::string log;
  for (const auto& d : diags) {
    log += std::string(filename) + ":" + std::to_string(d.line) + ": error: " +
           d.message + " [" + d.rule + "]\n";
  }
  return log;
}

}  // namespace meic::tool
