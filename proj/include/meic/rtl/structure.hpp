#pragma once

// Lightweight structural scan of a Verilog source: modules, ports,
// declarations, always blocks, continuous assignments, instantiations, and
// identifier uses, each with byte spans back into the original text. The
// scanner is deliberately tolerant: malformed regions are skipped, never
// thrown on, because most inputs it sees are broken by construction.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "meic/rtl/lexer.hpp"
#include "meic/rtl/literal.hpp"

namespace meic::rtl {

struct Span {
  size_t begin = 0;
  size_t end = 0;  // half-open byte range
  bool valid() const { return end > begin; }
  bool operator==(const Span&) const = default;
};

enum class PortDir { Input, Output, Inout, Unknown };

inline const char* dir_name(PortDir d) {
  switch (d) {
    case PortDir::Input: return "input";
    case PortDir::Output: return "output";
    case PortDir::Inout: return "inout";
    default: return "unknown";
  }
}

struct Range {
  int msb = 0;
  int lsb = 0;
  bool known = false;  // bounds were integer constants
  int width() const { return (msb >= lsb ? msb - lsb : lsb - msb) + 1; }
  bool contains(int i) const {
    return i >= (msb < lsb ? msb : lsb) && i <= (msb > lsb ? msb : lsb);
  }
};

struct Port {
  std::string name;
  PortDir dir = PortDir::Unknown;
  bool ansi = false;       // direction came from the header
  bool declared = false;   // direction known (header or body declaration)
  bool reg_qualified = false;
  bool has_range = false;
  Range range;
  int line = 1;
  Span name_span;
};

enum class DeclKind { Reg, Wire, Integer, Real, Genvar, Parameter, Localparam, Direction, OtherNet };

struct Declaration {
  std::string name;
  DeclKind kind = DeclKind::Wire;
  PortDir dir = PortDir::Unknown;  // for Direction declarations
  bool has_range = false;
  Range range;
  bool memory_dim = false;   // name followed by an address range (memory)
  bool keyword_name = false; // a reserved word sits in the name position
  int line = 1;
  Span span;        // whole declaration statement
  Span name_span;   // this name only
  Span value_span;  // parameter/localparam initializer, if any
};

struct ProceduralAssign {
  std::string lhs_name;
  bool nonblocking = false;
  int line = 1;
  Span span;        // statement incl. ';'
  Span lhs_name_span;
  Span op_span;     // the '=' or '<=' token
  Span rhs;         // between operator and ';'
};

struct ForLoop {
  ProceduralAssign init;
  ProceduralAssign step;
  Span cond;
  Span span;
  int line = 1;
};

struct AlwaysBlock {
  std::string sensitivity;  // raw text inside @(...), '*' for @* forms
  bool has_event_control = false;
  bool edge_triggered = false;
  int line = 1;
  Span span;  // 'always' through the end of its statement
  Span body;  // the statement after the event control
  std::vector<ProceduralAssign> assignments;  // recursive, in source order
  bool single_assignment = false;  // body is exactly one assignment statement
};

struct ContinuousAssign {
  std::string lhs_name;  // first identifier on the LHS
  int line = 1;
  Span span;
  Span lhs_name_span;
  Span rhs;
};

struct PortConnection {
  std::string formal;       // named form only
  std::string actual_text;  // raw text of the actual, "" when unconnected
  bool named = false;
  Span span;
  Span actual_span;  // region between the parens (named) or the expression
};

struct Instantiation {
  std::string module_name;
  std::string instance_name;
  std::vector<PortConnection> connections;
  int line = 1;
  Span span;
  Span module_name_span;
};

struct ModuleInfo {
  std::string name;
  bool ansi_header = false;
  std::vector<Port> ports;
  int line = 1;
  Span span;    // 'module' .. 'endmodule'
  Span header;  // 'module' .. header ';'
  std::vector<Declaration> declarations;
  std::vector<AlwaysBlock> always_blocks;
  std::vector<ContinuousAssign> assigns;
  std::vector<Instantiation> instantiations;
  std::vector<ForLoop> for_loops;

  const Port* find_port(std::string_view n) const {
    for (const auto& p : ports)
      if (p.name == n) return &p;
    return nullptr;
  }
  // First matching type declaration (reg/wire/integer/...) for a name.
  const Declaration* find_decl(std::string_view n) const {
    for (const auto& d : declarations)
      if (d.kind != DeclKind::Direction && d.name == n) return &d;
    return nullptr;
  }
};

struct StructureIndex {
  std::vector<ModuleInfo> modules;
  std::map<std::string, std::vector<int>> identifier_uses;  // name -> lines

  const ModuleInfo* find_module(std::string_view name) const {
    for (const auto& m : modules)
      if (m.name == name) return &m;
    return nullptr;
  }
  const ModuleInfo* module_at(size_t offset) const {
    for (const auto& m : modules)
      if (offset >= m.span.begin && offset < m.span.end) return &m;
    return nullptr;
  }
  bool uses_identifier(std::string_view name) const {
    return identifier_uses.count(std::string(name)) != 0;
  }
};

namespace detail {

// Cursor over significant tokens; raw token vector stays addressable for spans.
class Cursor {
public:
  Cursor(const std::vector<Token>& toks, std::string_view src) : toks_(toks), src_(src) {
    skip();
  }

  bool eof() const { return i_ >= toks_.size(); }
  const Token& peek() const { return toks_[i_]; }
  const Token& peek2() const {  // next significant token after peek()
    size_t j = i_ + 1;
    while (j < toks_.size() && !is_significant(toks_[j])) ++j;
    return j < toks_.size() ? toks_[j] : sentinel();
  }
  const Token& get() {
    const Token& t = toks_[i_];
    ++i_;
    skip();
    return t;
  }
  void advance() { get(); }

  bool at_kw(std::string_view kw) const {
    return !eof() && peek().kind == TokenKind::Keyword && peek().text == kw;
  }
  bool at_op(std::string_view op) const {
    return !eof() && peek().kind == TokenKind::Operator && peek().text == op;
  }
  bool at_punct(char c) const {
    return !eof() && peek().kind == TokenKind::Punct && peek().text.size() == 1 &&
           peek().text[0] == c;
  }
  bool eat_kw(std::string_view kw) { return at_kw(kw) ? (advance(), true) : false; }
  bool eat_op(std::string_view op) { return at_op(op) ? (advance(), true) : false; }
  bool eat_punct(char c) { return at_punct(c) ? (advance(), true) : false; }

  size_t save() const { return i_; }
  void restore(size_t s) { i_ = s; }

  size_t offset() const { return eof() ? src_.size() : peek().offset; }
  size_t end_of(const Token& t) const { return t.offset + t.text.size(); }

  // Skips one balanced (...) / [...] / {...} group; cursor must be at the
  // opener. Returns the end offset (just past the closer).
  size_t skip_group() {
    if (eof()) return src_.size();
    char open = peek().text[0];
    char close = open == '(' ? ')' : open == '[' ? ']' : '}';
    int depth = 0;
    size_t end = end_of(peek());
    while (!eof()) {
      const Token& t = peek();
      if (t.kind == TokenKind::Punct && t.text.size() == 1) {
        if (t.text[0] == open) ++depth;
        if (t.text[0] == close) {
          --depth;
          if (depth == 0) {
            end = end_of(t);
            advance();
            return end;
          }
        }
      }
      end = end_of(t);
      advance();
    }
    return end;
  }

  // Advance until a ';' at zero bracket depth (consumed) or a module-level
  // boundary keyword (not consumed). Returns end offset of the region.
  size_t skip_statement() {
    int depth = 0;
    size_t end = offset();
    while (!eof()) {
      const Token& t = peek();
      if (t.kind == TokenKind::Punct && t.text.size() == 1) {
        char c = t.text[0];
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']' || c == '}') --depth;
        if (c == ';' && depth <= 0) {
          end = end_of(t);
          advance();
          return end;
        }
      }
      if (t.kind == TokenKind::Keyword &&
          (t.text == "endmodule" || t.text == "module" || t.text == "always" ||
           t.text == "initial" || t.text == "assign")) {
        return end;
      }
      end = end_of(t);
      advance();
    }
    return end;
  }

private:
  void skip() {
    while (i_ < toks_.size() && !is_significant(toks_[i_])) ++i_;
  }
  static const Token& sentinel() {
    static const Token t{TokenKind::Other, "", 0, 0, 0, false};
    return t;
  }
  const std::vector<Token>& toks_;
  std::string_view src_;
  size_t i_ = 0;
};

inline std::optional<int> parse_const_bound(Cursor& c) {
  bool neg = false;
  if (c.at_op("-")) {
    neg = true;
    c.advance();
  }
  if (c.eof() || c.peek().kind != TokenKind::Number) return std::nullopt;
  auto lit = parse_literal(c.peek().text);
  c.advance();
  if (!lit) return std::nullopt;
  int v = static_cast<int>(lit->value);
  return neg ? -v : v;
}

// Parses "[msb:lsb]" when present. Cursor must be at '['. Non-constant
// bounds yield a Range with known=false; the group is always consumed.
inline Range parse_range(Cursor& c) {
  Range r;
  size_t mark = c.save();
  c.advance();  // '['
  auto msb = parse_const_bound(c);
  if (msb && c.at_punct(':')) {
    c.advance();
    auto lsb = parse_const_bound(c);
    if (lsb && c.at_punct(']')) {
      c.advance();
      r.msb = *msb;
      r.lsb = *lsb;
      r.known = true;
      return r;
    }
  }
  c.restore(mark);
  c.skip_group();
  r.known = false;
  return r;
}

inline bool is_net_keyword(const Token& t) {
  if (t.kind != TokenKind::Keyword) return false;
  const std::string& s = t.text;
  return s == "wire" || s == "tri" || s == "tri0" || s == "tri1" || s == "wand" ||
         s == "wor" || s == "triand" || s == "trior" || s == "trireg" ||
         s == "supply0" || s == "supply1";
}

inline std::optional<PortDir> dir_of(const Token& t) {
  if (t.kind != TokenKind::Keyword) return std::nullopt;
  if (t.text == "input") return PortDir::Input;
  if (t.text == "output") return PortDir::Output;
  if (t.text == "inout") return PortDir::Inout;
  return std::nullopt;
}

// Keywords that can never occur inside an expression; running into one of
// these while scanning a statement means its ';' was missing.
inline bool is_statement_boundary(const std::string& kw) {
  return kw == "end" || kw == "endmodule" || kw == "begin" || kw == "else" ||
         kw == "if" || kw == "module" || kw == "always" || kw == "assign" ||
         kw == "initial" || kw == "wire" || kw == "reg" || kw == "integer" ||
         kw == "real" || kw == "genvar" || kw == "input" || kw == "output" ||
         kw == "inout" || kw == "parameter" || kw == "localparam" ||
         kw == "for" || kw == "while" || kw == "case" || kw == "casex" ||
         kw == "casez" || kw == "endcase" || kw == "function" || kw == "task";
}

struct StatementCollector {
  std::vector<ProceduralAssign>* assigns = nullptr;
  std::vector<ForLoop>* fors = nullptr;
  int statements_seen = 0;
  int depth = 0;
};

// Parses one procedural statement leniently, collecting assignments and for
// loops. Returns the end offset of the statement.
inline size_t parse_proc_statement(Cursor& c, std::string_view src, StatementCollector& out);

inline size_t parse_proc_block(Cursor& c, std::string_view src, StatementCollector& out) {
  // cursor at 'begin'
  size_t end = c.end_of(c.peek());
  c.advance();
  // optional ": label"
  if (c.at_punct(':')) {
    c.advance();
    if (!c.eof() && c.peek().kind == TokenKind::Identifier) c.advance();
  }
  while (!c.eof() && !c.at_kw("end") && !c.at_kw("endmodule") && !c.at_kw("module")) {
    size_t before = c.save();
    end = parse_proc_statement(c, src, out);
    if (c.save() == before) {
      if (c.eof()) break;
      end = c.end_of(c.peek());
      c.advance();  // never stall
    }
  }
  if (c.at_kw("end")) {
    end = c.end_of(c.peek());
    c.advance();
  }
  return end;
}

inline std::optional<ProceduralAssign> parse_assign_statement(Cursor& c) {
  if (c.eof() || c.peek().kind != TokenKind::Identifier) return std::nullopt;
  size_t mark = c.save();
  ProceduralAssign pa;
  const Token& lhs = c.peek();
  pa.lhs_name = lhs.text;
  pa.line = lhs.line;
  pa.span.begin = lhs.offset;
  pa.lhs_name_span = {lhs.offset, c.end_of(lhs)};
  c.advance();
  while (c.at_punct('[')) c.skip_group();  // bit/part select on LHS
  bool nonblocking;
  if (c.at_op("=")) {
    nonblocking = false;
  } else if (c.at_op("<=")) {
    nonblocking = true;
  } else {
    c.restore(mark);
    return std::nullopt;
  }
  pa.nonblocking = nonblocking;
  pa.op_span = {c.peek().offset, c.end_of(c.peek())};
  c.advance();
  pa.rhs.begin = c.offset();
  int depth = 0;
  size_t end = pa.rhs.begin;
  while (!c.eof()) {
    const Token& t = c.peek();
    if (t.kind == TokenKind::Punct && t.text.size() == 1) {
      char ch = t.text[0];
      if (ch == '(' || ch == '[' || ch == '{') ++depth;
      if (ch == ')' || ch == ']' || ch == '}') {
        if (depth == 0) break;  // e.g. for-loop step without ';'
        --depth;
      }
      if (ch == ';' && depth <= 0) {
        pa.rhs.end = end;
        pa.span.end = c.end_of(t);
        c.advance();
        return pa;
      }
    }
    if (t.kind == TokenKind::Keyword && is_statement_boundary(t.text)) {
      break;  // malformed: statement ran into a structural keyword
    }
    end = c.end_of(t);
    c.advance();
  }
  // Unterminated assignment (missing ';' or inside for-header): still record.
  pa.rhs.end = end;
  pa.span.end = end;
  return pa;
}

inline size_t parse_proc_statement(Cursor& c, std::string_view src, StatementCollector& out) {
  if (c.eof()) return src.size();
  if (out.depth > 64) {  // runaway nesting on garbage input
    return c.skip_statement();
  }
  const Token& t = c.peek();
  size_t start = t.offset;

  if (t.kind == TokenKind::Keyword) {
    const std::string& kw = t.text;
    if (kw == "begin") {
      ++out.statements_seen;
      StatementCollector inner{out.assigns, out.fors, 0, out.depth + 1};
      size_t e = parse_proc_block(c, src, inner);
      out.statements_seen += inner.statements_seen - 1;
      return e;
    }
    if (kw == "if") {
      ++out.statements_seen;
      c.advance();
      if (c.at_punct('(')) c.skip_group();
      StatementCollector inner{out.assigns, out.fors, 0, out.depth + 1};
      size_t e = parse_proc_statement(c, src, inner);
      if (c.at_kw("else")) {
        c.advance();
        e = parse_proc_statement(c, src, inner);
      }
      out.statements_seen += inner.statements_seen;
      return e;
    }
    if (kw == "for") {
      ++out.statements_seen;
      ForLoop fl;
      fl.span.begin = start;
      fl.line = t.line;
      c.advance();
      if (c.at_punct('(')) {
        c.advance();
        if (auto init = parse_assign_statement(c)) fl.init = *init;
        fl.cond.begin = c.offset();
        int depth = 0;
        size_t cond_end = fl.cond.begin;
        while (!c.eof()) {
          const Token& tk = c.peek();
          if (tk.kind == TokenKind::Punct && tk.text.size() == 1) {
            char ch = tk.text[0];
            if (ch == '(' || ch == '[' || ch == '{') ++depth;
            if (ch == ')' || ch == ']' || ch == '}') {
              if (depth == 0) break;
              --depth;
            }
            if (ch == ';' && depth <= 0) break;
          }
          cond_end = c.end_of(tk);
          c.advance();
        }
        fl.cond.end = cond_end;
        c.eat_punct(';');
        if (auto step = parse_assign_statement(c)) fl.step = *step;
        if (c.at_punct(')')) c.advance();
      }
      StatementCollector inner{out.assigns, out.fors, 0, out.depth + 1};
      size_t e = parse_proc_statement(c, src, inner);
      out.statements_seen += inner.statements_seen;
      fl.span.end = e;
      if (out.fors) out.fors->push_back(fl);
      return e;
    }
    if (kw == "case" || kw == "casex" || kw == "casez") {
      ++out.statements_seen;
      c.advance();
      if (c.at_punct('(')) c.skip_group();
      size_t e = c.offset();
      while (!c.eof() && !c.at_kw("endcase") && !c.at_kw("endmodule") && !c.at_kw("module")) {
        // labels: expr {, expr} ':'  |  'default' [':']
        if (c.eat_kw("default")) {
          c.eat_punct(':');
        } else {
          int depth = 0;
          while (!c.eof()) {
            const Token& tk = c.peek();
            if (tk.kind == TokenKind::Punct && tk.text.size() == 1) {
              char ch = tk.text[0];
              if (ch == '(' || ch == '[' || ch == '{') ++depth;
              if (ch == ')' || ch == ']' || ch == '}') --depth;
              if (ch == ':' && depth <= 0) {
                c.advance();
                break;
              }
            }
            if (tk.kind == TokenKind::Keyword &&
                (tk.text == "endcase" || tk.text == "endmodule" || tk.text == "begin"))
              break;
            c.advance();
          }
        }
        StatementCollector inner{out.assigns, out.fors, 0, out.depth + 1};
        size_t before = c.save();
        e = parse_proc_statement(c, src, inner);
        out.statements_seen += inner.statements_seen;
        if (c.save() == before) {
          if (c.eof()) break;
          e = c.end_of(c.peek());
          c.advance();
        }
      }
      if (c.at_kw("endcase")) {
        e = c.end_of(c.peek());
        c.advance();
      }
      return e;
    }
    if (kw == "while" || kw == "repeat") {
      ++out.statements_seen;
      c.advance();
      if (c.at_punct('(')) c.skip_group();
      StatementCollector inner{out.assigns, out.fors, 0, out.depth + 1};
      return parse_proc_statement(c, src, inner);
    }
    if (kw == "forever") {
      ++out.statements_seen;
      c.advance();
      StatementCollector inner{out.assigns, out.fors, 0, out.depth + 1};
      return parse_proc_statement(c, src, inner);
    }
    // disable, deassign, force, release, end-markers, anything else: skip stmt
    ++out.statements_seen;
    return c.skip_statement();
  }

  if (t.kind == TokenKind::Identifier) {
    if (auto pa = parse_assign_statement(c)) {
      ++out.statements_seen;
      if (out.assigns) out.assigns->push_back(*pa);
      return pa->span.end;
    }
    ++out.statements_seen;
    return c.skip_statement();  // task call or malformed
  }

  if (t.kind == TokenKind::Punct && t.text == "#") {  // delay control then stmt
    c.advance();
    if (!c.eof() && c.peek().kind == TokenKind::Number) c.advance();
    else if (c.at_punct('(')) c.skip_group();
    return parse_proc_statement(c, src, out);
  }
  if (t.kind == TokenKind::Punct && t.text == "@") {  // event control then stmt
    c.advance();
    if (c.at_punct('(')) c.skip_group();
    else if (!c.eof()) c.advance();
    return parse_proc_statement(c, src, out);
  }
  if (t.kind == TokenKind::Punct && t.text == ";") {  // null statement
    ++out.statements_seen;
    size_t e = c.end_of(t);
    c.advance();
    return e;
  }

  ++out.statements_seen;
  return c.skip_statement();
}

}  // namespace detail

inline StructureIndex scan_structure(std::string_view src) {
  using namespace detail;
  StructureIndex index;
  std::vector<Token> tokens = tokenize(src);

  for (const Token& t : tokens) {
    if (t.kind == TokenKind::Identifier && !t.text.empty() && t.text[0] != '$' &&
        t.text[0] != '\\') {
      index.identifier_uses[t.text].push_back(t.line);
    }
  }

  Cursor c(tokens, src);
  while (!c.eof()) {
    if (!c.at_kw("module") && !c.at_kw("macromodule")) {
      c.advance();
      continue;
    }

    ModuleInfo mod;
    const Token& mtok = c.peek();
    mod.span.begin = mtok.offset;
    mod.header.begin = mtok.offset;
    mod.line = mtok.line;
    c.advance();
    if (c.eof() || c.peek().kind != TokenKind::Identifier) continue;
    mod.name = c.peek().text;
    c.advance();

    if (c.at_punct('#')) {
      c.advance();
      if (c.at_punct('(')) c.skip_group();
    }

    if (c.at_punct('(')) {
      c.advance();
      PortDir last_dir = PortDir::Unknown;
      bool last_reg = false;
      bool last_has_range = false;
      Range last_range;
      bool any_dir = false;
      while (!c.eof() && !c.at_punct(')')) {
        // one port entry
        std::optional<PortDir> dir;
        bool reg_q = false, has_range = false;
        Range range;
        while (!c.eof()) {
          if (auto d = dir_of(c.peek())) {
            dir = d;
            c.advance();
            continue;
          }
          if (c.at_kw("reg")) {
            reg_q = true;
            c.advance();
            continue;
          }
          if (is_net_keyword(c.peek()) || c.at_kw("signed")) {
            c.advance();
            continue;
          }
          if (c.at_punct('[')) {
            range = parse_range(c);
            has_range = true;
            continue;
          }
          break;
        }
        if (!c.eof() && (c.peek().kind == TokenKind::Identifier ||
                         c.peek().kind == TokenKind::Keyword)) {
          Port p;
          p.name = c.peek().text;
          p.line = c.peek().line;
          p.name_span = {c.peek().offset, c.end_of(c.peek())};
          c.advance();
          if (dir) {
            p.dir = *dir;
            p.ansi = true;
            p.declared = true;
            p.reg_qualified = reg_q;
            p.has_range = has_range;
            p.range = range;
            last_dir = *dir;
            last_reg = reg_q;
            last_has_range = has_range;
            last_range = range;
            any_dir = true;
          } else if (any_dir) {
            // ANSI continuation: input a, b
            p.dir = last_dir;
            p.ansi = true;
            p.declared = true;
            p.reg_qualified = last_reg;
            p.has_range = last_has_range;
            p.range = last_range;
          }
          mod.ports.push_back(std::move(p));
        }
        while (!c.eof() && !c.at_punct(',') && !c.at_punct(')')) c.advance();
        c.eat_punct(',');
      }
      mod.ansi_header = any_dir;
      if (c.at_punct(')')) c.advance();
    }
    if (c.at_punct(';')) {
      mod.header.end = c.end_of(c.peek());
      c.advance();
    } else {
      mod.header.end = c.offset();
    }

    // module body
    while (!c.eof() && !c.at_kw("endmodule") && !c.at_kw("module")) {
      const Token& t = c.peek();

      if (auto d = dir_of(t)) {
        Declaration base;
        base.kind = DeclKind::Direction;
        base.dir = *d;
        base.line = t.line;
        base.span.begin = t.offset;
        c.advance();
        if (!c.eat_kw("reg") && !c.eof() && is_net_keyword(c.peek())) c.advance();
        c.eat_kw("signed");
        if (c.at_punct('[')) {
          base.range = parse_range(c);
          base.has_range = true;
        }
        std::vector<Declaration> decls;
        while (!c.eof()) {
          if (c.peek().kind == TokenKind::Identifier || c.peek().kind == TokenKind::Keyword) {
            Declaration d2 = base;
            d2.name = c.peek().text;
            d2.keyword_name = c.peek().kind == TokenKind::Keyword;
            d2.name_span = {c.peek().offset, c.end_of(c.peek())};
            d2.line = c.peek().line;
            decls.push_back(d2);
            c.advance();
          }
          if (!c.eat_punct(',')) break;
        }
        size_t end = c.at_punct(';') ? c.end_of(c.peek()) : c.offset();
        c.eat_punct(';');
        for (auto& d2 : decls) {
          d2.span.end = end;
          // resolve directions for ports listed by name in the header
          for (auto& p : mod.ports) {
            if (p.name == d2.name && !p.ansi) {
              p.dir = d2.dir;
              p.declared = true;
              p.has_range = d2.has_range;
              p.range = d2.range;
              p.line = d2.line;
            }
          }
          mod.declarations.push_back(std::move(d2));
        }
        continue;
      }

      if (t.kind == TokenKind::Keyword &&
          (t.text == "reg" || is_net_keyword(t) || t.text == "integer" ||
           t.text == "real" || t.text == "genvar" || t.text == "time" ||
           t.text == "realtime")) {
        Declaration base;
        base.kind = t.text == "reg" ? DeclKind::Reg
                    : t.text == "integer" ? DeclKind::Integer
                    : t.text == "real" || t.text == "realtime" ? DeclKind::Real
                    : t.text == "genvar" ? DeclKind::Genvar
                    : t.text == "wire" ? DeclKind::Wire
                                       : DeclKind::OtherNet;
        base.line = t.line;
        base.span.begin = t.offset;
        c.advance();
        c.eat_kw("signed");
        if (c.at_punct('[')) {
          base.range = parse_range(c);
          base.has_range = true;
        }
        std::vector<Declaration> decls;
        while (!c.eof()) {
          if (c.peek().kind == TokenKind::Identifier || c.peek().kind == TokenKind::Keyword) {
            Declaration d2 = base;
            d2.name = c.peek().text;
            d2.keyword_name = c.peek().kind == TokenKind::Keyword;
            d2.name_span = {c.peek().offset, c.end_of(c.peek())};
            d2.line = c.peek().line;
            c.advance();
            if (c.at_punct('[')) {  // memory address dimension
              d2.memory_dim = true;
              parse_range(c);
            }
            if (c.at_op("=")) {  // net declaration assignment: skip the expr
              c.advance();
              int depth = 0;
              while (!c.eof()) {
                const Token& tk = c.peek();
                if (tk.kind == TokenKind::Punct && tk.text.size() == 1) {
                  char ch = tk.text[0];
                  if (ch == '(' || ch == '[' || ch == '{') ++depth;
                  if (ch == ')' || ch == ']' || ch == '}') --depth;
                  if ((ch == ',' || ch == ';') && depth <= 0) break;
                }
                if (tk.kind == TokenKind::Keyword && tk.text == "endmodule") break;
                c.advance();
              }
            }
            decls.push_back(std::move(d2));
          } else {
            break;
          }
          if (!c.eat_punct(',')) break;
        }
        size_t end = c.at_punct(';') ? c.end_of(c.peek()) : c.offset();
        c.eat_punct(';');
        for (auto& d2 : decls) {
          d2.span.end = end;
          mod.declarations.push_back(std::move(d2));
        }
        continue;
      }

      if (t.kind == TokenKind::Keyword && (t.text == "parameter" || t.text == "localparam")) {
        Declaration base;
        base.kind = t.text == "parameter" ? DeclKind::Parameter : DeclKind::Localparam;
        base.line = t.line;
        base.span.begin = t.offset;
        c.advance();
        c.eat_kw("signed");
        c.eat_kw("integer");
        if (c.at_punct('[')) {
          base.range = parse_range(c);
          base.has_range = true;
        }
        std::vector<Declaration> decls;
        while (!c.eof()) {
          if (c.peek().kind != TokenKind::Identifier) break;
          Declaration d2 = base;
          d2.name = c.peek().text;
          d2.name_span = {c.peek().offset, c.end_of(c.peek())};
          d2.line = c.peek().line;
          c.advance();
          if (c.eat_op("=")) {
            d2.value_span.begin = c.offset();
            int depth = 0;
            size_t vend = d2.value_span.begin;
            while (!c.eof()) {
              const Token& tk = c.peek();
              if (tk.kind == TokenKind::Punct && tk.text.size() == 1) {
                char ch = tk.text[0];
                if (ch == '(' || ch == '[' || ch == '{') ++depth;
                if (ch == ')' || ch == ']' || ch == '}') --depth;
                if ((ch == ',' || ch == ';') && depth <= 0) break;
              }
              if (tk.kind == TokenKind::Keyword && tk.text == "endmodule") break;
              vend = c.end_of(tk);
              c.advance();
            }
            d2.value_span.end = vend;
          }
          decls.push_back(std::move(d2));
          if (!c.eat_punct(',')) break;
        }
        size_t end = c.at_punct(';') ? c.end_of(c.peek()) : c.offset();
        c.eat_punct(';');
        for (auto& d2 : decls) {
          d2.span.end = end;
          mod.declarations.push_back(std::move(d2));
        }
        continue;
      }

      if (c.at_kw("assign")) {
        ContinuousAssign ca;
        ca.span.begin = t.offset;
        ca.line = t.line;
        c.advance();
        // optional drive strength / delay
        if (c.at_punct('#')) {
          c.advance();
          if (!c.eof() && c.peek().kind == TokenKind::Number) c.advance();
          else if (c.at_punct('(')) c.skip_group();
        }
        int depth = 0;
        bool have_lhs_name = false;
        while (!c.eof()) {
          const Token& tk = c.peek();
          if (tk.kind == TokenKind::Identifier && !have_lhs_name) {
            ca.lhs_name = tk.text;
            ca.lhs_name_span = {tk.offset, c.end_of(tk)};
            have_lhs_name = true;
          }
          if (tk.kind == TokenKind::Punct && tk.text.size() == 1) {
            char ch = tk.text[0];
            if (ch == '(' || ch == '[' || ch == '{') ++depth;
            if (ch == ')' || ch == ']' || ch == '}') --depth;
          }
          if ((tk.kind == TokenKind::Operator && (tk.text == "=" || tk.text == "<=")) &&
              depth <= 0) {
            c.advance();
            break;
          }
          if (tk.kind == TokenKind::Keyword && is_statement_boundary(tk.text)) break;
          c.advance();
        }
        ca.rhs.begin = c.offset();
        size_t rend = ca.rhs.begin;
        depth = 0;
        while (!c.eof()) {
          const Token& tk = c.peek();
          if (tk.kind == TokenKind::Punct && tk.text.size() == 1) {
            char ch = tk.text[0];
            if (ch == '(' || ch == '[' || ch == '{') ++depth;
            if (ch == ')' || ch == ']' || ch == '}') --depth;
            if (ch == ';' && depth <= 0) {
              ca.rhs.end = rend;
              ca.span.end = c.end_of(tk);
              c.advance();
              break;
            }
          }
          if (tk.kind == TokenKind::Keyword && is_statement_boundary(tk.text)) {
            ca.rhs.end = rend;
            ca.span.end = rend;
            break;
          }
          rend = c.end_of(tk);
          c.advance();
        }
        if (!ca.span.valid()) {
          ca.rhs.end = rend;
          ca.span.end = rend;
        }
        mod.assigns.push_back(std::move(ca));
        continue;
      }

      if (c.at_kw("always")) {
        AlwaysBlock ab;
        ab.span.begin = t.offset;
        ab.line = t.line;
        c.advance();
        if (c.at_punct('@')) {
          ab.has_event_control = true;
          c.advance();
          if (c.at_op("*")) {
            ab.sensitivity = "*";
            c.advance();
          } else if (c.at_punct('(')) {
            size_t open_end = c.end_of(c.peek());
            // capture raw text between the parens
            size_t close = c.skip_group();
            if (close >= open_end + 1) {
              ab.sensitivity = std::string(src.substr(open_end, close - 1 - open_end));
            }
            if (ab.sensitivity.find("posedge") != std::string::npos ||
                ab.sensitivity.find("negedge") != std::string::npos) {
              ab.edge_triggered = true;
            }
          }
        }
        ab.body.begin = c.offset();
        StatementCollector sc{&ab.assignments, &mod.for_loops, 0, 0};
        size_t e = parse_proc_statement(c, src, sc);
        ab.body.end = e;
        ab.span.end = e;
        ab.single_assignment = (ab.assignments.size() == 1 && sc.statements_seen <= 2 &&
                                mod.for_loops.empty());
        mod.always_blocks.push_back(std::move(ab));
        continue;
      }

      if (c.at_kw("initial")) {
        c.advance();
        StatementCollector sc{nullptr, nullptr, 0, 0};
        parse_proc_statement(c, src, sc);
        continue;
      }

      if (t.kind == TokenKind::Keyword && (t.text == "function" || t.text == "task")) {
        std::string closer = t.text == "function" ? "endfunction" : "endtask";
        c.advance();
        while (!c.eof() && !c.at_kw(closer) && !c.at_kw("endmodule")) c.advance();
        c.eat_kw(closer);
        continue;
      }

      if (t.kind == TokenKind::Identifier) {
        // possible instantiation: mod [#(...)] inst ( conns ) ;
        size_t mark = c.save();
        Instantiation inst;
        inst.module_name = t.text;
        inst.module_name_span = {t.offset, c.end_of(t)};
        inst.span.begin = t.offset;
        inst.line = t.line;
        c.advance();
        if (c.at_punct('#')) {
          c.advance();
          if (c.at_punct('(')) c.skip_group();
        }
        if (!c.eof() && c.peek().kind == TokenKind::Identifier) {
          inst.instance_name = c.peek().text;
          c.advance();
          if (c.at_punct('[')) parse_range(c);  // instance array
          if (c.at_punct('(')) {
            c.advance();
            while (!c.eof() && !c.at_punct(')')) {
              PortConnection pc;
              if (c.at_punct('.')) {
                pc.named = true;
                pc.span.begin = c.peek().offset;
                c.advance();
                if (!c.eof() && (c.peek().kind == TokenKind::Identifier ||
                                 c.peek().kind == TokenKind::Keyword)) {
                  pc.formal = c.peek().text;
                  c.advance();
                }
                if (c.at_punct('(')) {
                  size_t open_end = c.end_of(c.peek());
                  size_t close = c.skip_group();
                  pc.actual_span = {open_end, close > 0 ? close - 1 : open_end};
                  pc.span.end = close;
                  if (pc.actual_span.end > pc.actual_span.begin) {
                    pc.actual_text = std::string(
                        src.substr(pc.actual_span.begin,
                                   pc.actual_span.end - pc.actual_span.begin));
                  }
                  std::string trimmed;
                  for (char ch : pc.actual_text)
                    if (!detail::is_space_byte(static_cast<unsigned char>(ch)))
                      trimmed += ch;
                  if (trimmed.empty()) pc.actual_text.clear();
                }
              } else {
                pc.named = false;
                pc.span.begin = c.offset();
                pc.actual_span.begin = c.offset();
                int depth = 0;
                size_t end = pc.span.begin;
                while (!c.eof()) {
                  const Token& tk = c.peek();
                  if (tk.kind == TokenKind::Punct && tk.text.size() == 1) {
                    char ch = tk.text[0];
                    if (ch == '(' || ch == '[' || ch == '{') ++depth;
                    if (ch == ')' || ch == ']' || ch == '}') {
                      if (depth == 0) break;
                      --depth;
                    }
                    if (ch == ',' && depth <= 0) break;
                  }
                  end = c.end_of(tk);
                  c.advance();
                }
                pc.span.end = end;
                pc.actual_span.end = end;
                if (end > pc.span.begin)
                  pc.actual_text = std::string(src.substr(pc.span.begin, end - pc.span.begin));
              }
              inst.connections.push_back(std::move(pc));
              if (!c.eat_punct(',')) break;
            }
            if (c.at_punct(')')) c.advance();
            size_t end = c.at_punct(';') ? c.end_of(c.peek()) : c.offset();
            c.eat_punct(';');
            inst.span.end = end;
            mod.instantiations.push_back(std::move(inst));
            continue;
          }
        }
        // not an instantiation: skip to next ';' defensively
        c.restore(mark);
        c.advance();
        c.skip_statement();
        continue;
      }

      c.advance();
    }

    if (c.at_kw("endmodule")) {
      mod.span.end = c.end_of(c.peek());
      c.advance();
    } else {
      mod.span.end = c.offset();
    }
    index.modules.push_back(std::move(mod));
  }

  return index;
}

}  // namespace meic::rtl
