#pragma once

// Builtin simulation stage: elaborates the module hierarchy out of a source
// file and evaluates check-vector rows against it. Supports the combinational
// subset the bundled designs use (continuous assigns, @(*) always blocks with
// if/case/for/while, module instances, parameters, selects, concatenation).
// Values are x-free 64-bit vectors; unconnected inputs read as zero.
// Everything outside the subset is reported as an explicit issue rather than
// silently mis-simulated.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "meic/rtl/lexer.hpp"
#include "meic/rtl/literal.hpp"
#include "meic/rtl/structure.hpp"
#include "meic/tool/vectors.hpp"

namespace meic::tool {

struct EvalIssue {
  enum class Kind { Unsupported, Elaboration, Budget };
  Kind kind = Kind::Unsupported;
  std::string detail;
};

struct RowOutcome {
  std::string id;
  bool pass = false;
  bool evaluated = false;  // false when elaboration failed before any row ran
  std::map<std::string, uint64_t> got;
  std::map<std::string, uint64_t> expected;
};

struct SimResult {
  bool completed = false;  // all rows evaluated (pass or fail)
  std::vector<RowOutcome> rows;
  std::optional<EvalIssue> issue;
};

namespace eval_detail {

using rtl::Token;
using rtl::TokenKind;

struct ParseError {
  std::string detail;
};

struct Expr {
  enum class Kind { Const, Ref, Index, Part, Unary, Binary, Ternary, Concat, Repeat };
  Kind kind = Kind::Const;
  uint64_t value = 0;  // Const
  int width = 32;      // Const
  bool sized = false;  // Const
  std::string name;    // Ref/Index/Part base, Unary/Binary operator text
  std::vector<std::unique_ptr<Expr>> kids;
};

using ExprPtr = std::unique_ptr<Expr>;

struct LValue {
  enum class Kind { Ref, Index, Part, Concat };
  Kind kind = Kind::Ref;
  std::string name;
  ExprPtr index;          // Index
  ExprPtr msb, lsb;       // Part
  std::vector<LValue> parts;  // Concat
};

struct Stmt {
  enum class Kind { Assign, If, Case, For, While, Repeat, Block, Nop };
  Kind kind = Kind::Nop;
  LValue lhs;
  ExprPtr rhs;
  ExprPtr cond;
  std::vector<Stmt> body;   // If: then; loops/Block: body
  std::vector<Stmt> else_body;
  struct CaseItem {
    bool is_default = false;
    std::vector<ExprPtr> labels;
    std::vector<Stmt> body;
  };
  std::vector<CaseItem> case_items;
  LValue for_init_lhs, for_step_lhs;
  ExprPtr for_init_rhs, for_step_rhs;
};

struct Net {
  int width = 1;
  int right = 0;  // declared right bound; bit position = |index - right|
  bool ranged = false;
};

struct Connection {
  std::string formal;  // empty for positional
  bool named = false;
  bool connected = false;
  ExprPtr actual;            // parsed actual expression, null when empty
  std::optional<LValue> actual_lv;  // when the actual can take a written value
};

struct InstanceDef {
  std::string module;
  std::string name;
  std::vector<Connection> connections;
};

struct ContAssign {
  LValue lhs;
  ExprPtr rhs;
};

struct ModuleDef {
  std::string name;
  std::vector<std::string> port_order;
  std::map<std::string, rtl::PortDir> port_dirs;
  std::map<std::string, Net> nets;
  std::map<std::string, uint64_t> params;
  std::vector<ContAssign> assigns;
  std::vector<std::vector<Stmt>> always_bodies;
  std::vector<InstanceDef> instances;
};

// ---- expression/statement parsing over a token slice ----

class Parser {
public:
  Parser(std::string_view text, const std::map<std::string, uint64_t>* params)
      : params_(params) {
    for (auto& t : rtl::tokenize(text))
      if (rtl::is_significant(t)) toks_.push_back(std::move(t));
  }

  bool eof() const { return i_ >= toks_.size(); }
  const Token& peek() const {
    if (eof()) throw ParseError{"unexpected end of expression"};
    return toks_[i_];
  }
  const Token& get() {
    const Token& t = peek();
    ++i_;
    return t;
  }
  bool at(TokenKind k, std::string_view text) const {
    return !eof() && toks_[i_].kind == k && toks_[i_].text == text;
  }
  bool at_punct(char c) const {
    return !eof() && toks_[i_].kind == TokenKind::Punct && toks_[i_].text.size() == 1 &&
           toks_[i_].text[0] == c;
  }
  bool at_op(std::string_view op) const { return at(TokenKind::Operator, op); }
  bool at_kw(std::string_view kw) const { return at(TokenKind::Keyword, kw); }
  void expect_punct(char c) {
    if (!at_punct(c))
      throw ParseError{std::string("expected '") + c + "' near '" +
                       (eof() ? "<eof>" : peek().text) + "'"};
    ++i_;
  }
  bool eat_punct(char c) {
    if (at_punct(c)) {
      ++i_;
      return true;
    }
    return false;
  }
  bool eat_op(std::string_view op) {
    if (at_op(op)) {
      ++i_;
      return true;
    }
    return false;
  }
  bool eat_kw(std::string_view kw) {
    if (at_kw(kw)) {
      ++i_;
      return true;
    }
    return false;
  }

  ExprPtr parse_expression() { return parse_ternary(); }

  // Parses a complete expression and requires all input consumed.
  ExprPtr parse_whole_expression() {
    ExprPtr e = parse_expression();
    if (!eof()) throw ParseError{"trailing tokens after expression: '" + peek().text + "'"};
    return e;
  }

  LValue parse_lvalue() {
    if (at_punct('{')) {
      get();
      LValue lv;
      lv.kind = LValue::Kind::Concat;
      while (true) {
        lv.parts.push_back(parse_lvalue());
        if (!eat_punct(',')) break;
      }
      expect_punct('}');
      return lv;
    }
    if (eof() || peek().kind != TokenKind::Identifier)
      throw ParseError{"expected assignable name, found '" +
                       (eof() ? "<eof>" : peek().text) + "'"};
    LValue lv;
    lv.name = get().text;
    lv.kind = LValue::Kind::Ref;
    if (eat_punct('[')) {
      ExprPtr first = parse_expression();
      if (eat_punct(':')) {
        lv.kind = LValue::Kind::Part;
        lv.msb = std::move(first);
        lv.lsb = parse_expression();
      } else {
        lv.kind = LValue::Kind::Index;
        lv.index = std::move(first);
      }
      expect_punct(']');
      if (at_punct('['))
        throw ParseError{"multi-dimensional select on '" + lv.name + "' not supported"};
    }
    return lv;
  }

  LValue parse_whole_lvalue() {
    LValue lv = parse_lvalue();
    if (!eof()) throw ParseError{"trailing tokens after assignment target"};
    return lv;
  }

private:
  ExprPtr make_unary(std::string op, ExprPtr a) {
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Unary;
    e->name = std::move(op);
    e->kids.push_back(std::move(a));
    return e;
  }
  ExprPtr make_binary(std::string op, ExprPtr a, ExprPtr b) {
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Binary;
    e->name = std::move(op);
    e->kids.push_back(std::move(a));
    e->kids.push_back(std::move(b));
    return e;
  }

  ExprPtr parse_ternary() {
    ExprPtr c = parse_binary(0);
    if (eat_op("?")) {
      ExprPtr a = parse_ternary();
      expect_punct(':');
      ExprPtr b = parse_ternary();
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Ternary;
      e->kids.push_back(std::move(c));
      e->kids.push_back(std::move(a));
      e->kids.push_back(std::move(b));
      return e;
    }
    return c;
  }

  static int binary_level(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^" || op == "^~" || op == "~^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=" || op == "===" || op == "!==") return 6;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 7;
    if (op == "<<" || op == ">>" || op == "<<<" || op == ">>>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    if (op == "**") return 11;
    return -1;
  }

  ExprPtr parse_binary(int min_level) {
    ExprPtr lhs = parse_unary();
    while (!eof() && peek().kind == TokenKind::Operator) {
      std::string op = peek().text;
      int level = binary_level(op);
      if (level < 0 || level < min_level) break;
      // '&' or '|' directly after another operator would be a reduction; the
      // grammar here only reaches them as binaries, which is what we want.
      get();
      ExprPtr rhs = parse_binary(level + 1);
      lhs = make_binary(op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    static const char* unary_ops[] = {"!", "~", "-", "+", "&", "|",
                                      "^", "~&", "~|", "~^", "^~"};
    if (!eof() && peek().kind == TokenKind::Operator) {
      for (const char* op : unary_ops) {
        if (peek().text == op) {
          get();
          return make_unary(std::string("u") + op, parse_unary());
        }
      }
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    if (eof()) throw ParseError{"unexpected end of expression"};
    const Token& t = peek();
    if (t.kind == TokenKind::Number) {
      auto lit = rtl::parse_literal(t.text);
      if (!lit) throw ParseError{"unsupported literal '" + t.text + "'"};
      if (lit->has_xz) throw ParseError{"x/z literal '" + t.text + "' not supported"};
      get();
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Const;
      e->value = lit->value;
      e->width = lit->width;
      e->sized = lit->sized;
      return e;
    }
    if (t.kind == TokenKind::Identifier) {
      if (t.text[0] == '$')
        throw ParseError{"system function '" + t.text + "' not supported"};
      std::string name = get().text;
      if (at_punct('(')) throw ParseError{"function call '" + name + "' not supported"};
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Ref;
      e->name = name;
      if (eat_punct('[')) {
        ExprPtr first = parse_expression();
        if (eat_punct(':')) {
          e->kind = Expr::Kind::Part;
          e->kids.push_back(std::move(first));
          e->kids.push_back(parse_expression());
        } else if (at_op("+:") || at_op("-:")) {
          throw ParseError{"indexed part-select not supported"};
        } else {
          e->kind = Expr::Kind::Index;
          e->kids.push_back(std::move(first));
        }
        expect_punct(']');
        if (at_punct('['))
          throw ParseError{"multi-dimensional select on '" + name + "' not supported"};
      }
      return e;
    }
    if (t.kind == TokenKind::Punct && t.text == "(") {
      get();
      ExprPtr e = parse_expression();
      expect_punct(')');
      return e;
    }
    if (t.kind == TokenKind::Punct && t.text == "{") {
      get();
      ExprPtr first = parse_expression();
      if (at_punct('{')) {
        // replication {N{...}}
        get();
        auto rep = std::make_unique<Expr>();
        rep->kind = Expr::Kind::Repeat;
        rep->kids.push_back(std::move(first));
        auto inner = std::make_unique<Expr>();
        inner->kind = Expr::Kind::Concat;
        while (true) {
          inner->kids.push_back(parse_expression());
          if (!eat_punct(',')) break;
        }
        expect_punct('}');
        expect_punct('}');
        rep->kids.push_back(std::move(inner));
        return rep;
      }
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Concat;
      e->kids.push_back(std::move(first));
      while (eat_punct(',')) e->kids.push_back(parse_expression());
      expect_punct('}');
      return e;
    }
    throw ParseError{"unsupported token '" + t.text + "' in expression"};
  }

  std::vector<Token> toks_;
  size_t i_ = 0;
  const std::map<std::string, uint64_t>* params_;
};

// ---- statement parsing ----

inline std::vector<Stmt> parse_statement_list(Parser& p);

inline Stmt parse_statement(Parser& p, int depth = 0) {
  if (depth > 64) throw ParseError{"statement nesting too deep"};
  Stmt s;
  if (p.eof()) return s;

  if (p.eat_kw("begin")) {
    if (p.eat_punct(':')) {
      if (!p.eof() && p.peek().kind == TokenKind::Identifier) p.get();
    }
    s.kind = Stmt::Kind::Block;
    while (!p.eof() && !p.at_kw("end")) s.body.push_back(parse_statement(p, depth + 1));
    if (!p.eat_kw("end")) throw ParseError{"missing 'end'"};
    return s;
  }
  if (p.eat_kw("if")) {
    s.kind = Stmt::Kind::If;
    p.expect_punct('(');
    s.cond = p.parse_expression();
    p.expect_punct(')');
    s.body.push_back(parse_statement(p, depth + 1));
    if (p.eat_kw("else")) s.else_body.push_back(parse_statement(p, depth + 1));
    return s;
  }
  if (p.at_kw("case") || p.at_kw("casex") || p.at_kw("casez")) {
    if (!p.at_kw("case"))
      throw ParseError{"casex/casez not supported by the builtin simulator"};
    p.get();
    s.kind = Stmt::Kind::Case;
    p.expect_punct('(');
    s.cond = p.parse_expression();
    p.expect_punct(')');
    while (!p.eof() && !p.at_kw("endcase")) {
      Stmt::CaseItem item;
      if (p.eat_kw("default")) {
        item.is_default = true;
        p.eat_punct(':');
      } else {
        while (true) {
          item.labels.push_back(p.parse_expression());
          if (!p.eat_punct(',')) break;
        }
        p.expect_punct(':');
      }
      item.body.push_back(parse_statement(p, depth + 1));
      s.case_items.push_back(std::move(item));
    }
    if (!p.eat_kw("endcase")) throw ParseError{"missing 'endcase'"};
    return s;
  }
  if (p.eat_kw("for")) {
    s.kind = Stmt::Kind::For;
    p.expect_punct('(');
    s.for_init_lhs = p.parse_lvalue();
    if (!p.eat_op("=")) throw ParseError{"for-loop init must be an assignment"};
    s.for_init_rhs = p.parse_expression();
    p.expect_punct(';');
    s.cond = p.parse_expression();
    p.expect_punct(';');
    s.for_step_lhs = p.parse_lvalue();
    if (!p.eat_op("=") && !p.eat_op("<="))
      throw ParseError{"for-loop step must be an assignment"};
    s.for_step_rhs = p.parse_expression();
    p.expect_punct(')');
    s.body.push_back(parse_statement(p, depth + 1));
    return s;
  }
  if (p.eat_kw("while")) {
    s.kind = Stmt::Kind::While;
    p.expect_punct('(');
    s.cond = p.parse_expression();
    p.expect_punct(')');
    s.body.push_back(parse_statement(p, depth + 1));
    return s;
  }
  if (p.eat_kw("repeat")) {
    s.kind = Stmt::Kind::Repeat;
    p.expect_punct('(');
    s.cond = p.parse_expression();
    p.expect_punct(')');
    s.body.push_back(parse_statement(p, depth + 1));
    return s;
  }
  if (p.eat_punct(';')) {
    s.kind = Stmt::Kind::Nop;
    return s;
  }
  if (!p.eof() && p.peek().kind == TokenKind::Identifier && p.peek().text[0] == '$') {
    // system task call: ignore through the ';'
    while (!p.eof() && !p.at_punct(';')) p.get();
    p.expect_punct(';');
    s.kind = Stmt::Kind::Nop;
    return s;
  }
  if (!p.eof() && (p.peek().kind == TokenKind::Identifier || p.at_punct('{'))) {
    s.kind = Stmt::Kind::Assign;
    s.lhs = p.parse_lvalue();
    if (!p.eat_op("=") && !p.eat_op("<="))
      throw ParseError{"expected assignment operator after '" + s.lhs.name + "'"};
    s.rhs = p.parse_expression();
    p.expect_punct(';');
    return s;
  }
  throw ParseError{"unsupported statement at '" + p.peek().text + "'"};
}

inline std::vector<Stmt> parse_statement_list(Parser& p) {
  std::vector<Stmt> out;
  while (!p.eof()) out.push_back(parse_statement(p));
  return out;
}

// ---- elaboration ----

struct Design {
  std::map<std::string, ModuleDef> modules;
};

inline uint64_t mask_of(int width) { return width_mask(width); }

inline std::string slice(std::string_view src, const rtl::Span& s) {
  if (!s.valid() || s.end > src.size()) return {};
  return std::string(src.substr(s.begin, s.end - s.begin));
}

inline uint64_t eval_const_expr(const Expr& e, const std::map<std::string, uint64_t>& params);

inline Design elaborate(std::string_view src) {
  Design design;
  rtl::StructureIndex idx = rtl::scan_structure(src);
  if (idx.modules.empty()) throw ParseError{"no module found in source"};

  for (const auto& m : idx.modules) {
    ModuleDef def;
    def.name = m.name;
    for (const auto& p : m.ports) {
      def.port_order.push_back(p.name);
      def.port_dirs[p.name] = p.dir;
      Net n;
      if (p.has_range) {
        if (!p.range.known)
          throw ParseError{"port '" + p.name + "' has a non-constant range"};
        n.width = p.range.width();
        n.right = p.range.lsb;
        n.ranged = true;
        if (n.width > 64)
          throw ParseError{"port '" + p.name + "' wider than 64 bits"};
      }
      def.nets[p.name] = n;
    }
    for (const auto& d : m.declarations) {
      if (d.keyword_name) throw ParseError{"reserved word used as a name"};
      if (d.kind == rtl::DeclKind::Parameter || d.kind == rtl::DeclKind::Localparam) {
        std::string text = slice(src, d.value_span);
        if (text.empty())
          throw ParseError{"parameter '" + d.name + "' has no value"};
        Parser p(text, &def.params);
        ExprPtr e = p.parse_whole_expression();
        def.params[d.name] = eval_const_expr(*e, def.params);
        continue;
      }
      if (d.kind == rtl::DeclKind::Real)
        throw ParseError{"real variable '" + d.name + "' not supported"};
      if (d.memory_dim)
        throw ParseError{"memory '" + d.name + "' not supported"};
      Net n;
      if (d.kind == rtl::DeclKind::Integer) {
        n.width = 32;
        n.right = 0;
        n.ranged = true;
      } else if (d.has_range) {
        if (!d.range.known)
          throw ParseError{"net '" + d.name + "' has a non-constant range"};
        n.width = d.range.width();
        n.right = d.range.lsb;
        n.ranged = true;
        if (n.width > 64) throw ParseError{"net '" + d.name + "' wider than 64 bits"};
      }
      if (d.kind != rtl::DeclKind::Direction || !def.nets.count(d.name)) {
        // direction decls refine ports already added; others add nets
        auto it = def.nets.find(d.name);
        if (it == def.nets.end()) def.nets[d.name] = n;
        else if (d.has_range) def.nets[d.name] = n;
      } else if (d.has_range) {
        def.nets[d.name] = n;
      }
    }

    for (const auto& a : m.assigns) {
      // LHS tokens live between the 'assign' keyword and the '=' before rhs
      rtl::Span lhs_span{a.span.begin + 6, 0};
      std::string whole = slice(src, a.span);
      // find the '=' that begins the rhs: rhs.begin is relative to src
      if (a.rhs.begin <= lhs_span.begin || a.rhs.begin > src.size())
        throw ParseError{"malformed continuous assignment"};
      // walk back from rhs.begin over the '=' operator
      size_t eq = a.rhs.begin;
      while (eq > lhs_span.begin && src[eq - 1] != '=') --eq;
      if (eq == lhs_span.begin) throw ParseError{"missing '=' in continuous assignment"};
      lhs_span.end = eq - 1;
      ContAssign ca;
      Parser pl(slice(src, lhs_span), &def.params);
      ca.lhs = pl.parse_whole_lvalue();
      Parser pr(slice(src, a.rhs), &def.params);
      ca.rhs = pr.parse_whole_expression();
      def.assigns.push_back(std::move(ca));
    }

    for (const auto& ab : m.always_blocks) {
      if (ab.edge_triggered)
        throw ParseError{"edge-triggered always block not supported by builtin simulator"};
      Parser p(slice(src, ab.body), &def.params);
      def.always_bodies.push_back(parse_statement_list(p));
    }

    for (const auto& inst : m.instantiations) {
      InstanceDef id;
      id.module = inst.module_name;
      id.name = inst.instance_name;
      for (const auto& conn : inst.connections) {
        Connection c;
        c.named = conn.named;
        c.formal = conn.formal;
        std::string actual = trim(conn.actual_text);
        if (!actual.empty()) {
          c.connected = true;
          Parser pe(actual, &def.params);
          c.actual = pe.parse_whole_expression();
          // a plain name/select can also receive output values
          try {
            Parser pl(actual, &def.params);
            c.actual_lv = pl.parse_whole_lvalue();
          } catch (const ParseError&) {
            c.actual_lv.reset();
          }
        }
        id.connections.push_back(std::move(c));
      }
      def.instances.push_back(std::move(id));
    }

    design.modules[def.name] = std::move(def);
  }
  return design;
}

// ---- evaluation ----

struct Value {
  uint64_t v = 0;
  int width = 1;
};

struct Budget {
  long long remaining = 2'000'000;
  bool spent(long long cost = 1) {
    remaining -= cost;
    return remaining < 0;
  }
};

struct Instance {
  const ModuleDef* def = nullptr;
  std::string path;
  std::map<std::string, uint64_t> env;
  std::vector<std::unique_ptr<Instance>> children;
};

struct EvalAbort {
  EvalIssue issue;
};

inline const Net* find_net(const Instance& inst, const std::string& name) {
  auto it = inst.def->nets.find(name);
  return it == inst.def->nets.end() ? nullptr : &it->second;
}

inline Value eval_expr(const Expr& e, Instance& inst, Budget& budget);

inline uint64_t read_net(Instance& inst, const std::string& name, int* width_out) {
  auto pit = inst.def->params.find(name);
  if (pit != inst.def->params.end()) {
    if (width_out) *width_out = 32;
    return pit->second;
  }
  const Net* n = find_net(inst, name);
  int w = n ? n->width : 1;
  if (width_out) *width_out = w;
  auto it = inst.env.find(name);
  uint64_t raw = it == inst.env.end() ? 0 : it->second;
  return raw & mask_of(w);
}

inline int net_right(const Instance& inst, const std::string& name) {
  const Net* n = find_net(inst, name);
  return n ? n->right : 0;
}

inline void write_net(Instance& inst, const std::string& name, uint64_t value) {
  const Net* n = find_net(inst, name);
  int w = n ? n->width : 64;
  inst.env[name] = value & mask_of(w);
}

inline int bit_position(const Instance& inst, const std::string& name, int64_t index) {
  int right = net_right(inst, name);
  int64_t pos = index >= right ? index - right : right - index;
  return static_cast<int>(pos);
}

inline Value eval_expr(const Expr& e, Instance& inst, Budget& budget) {
  if (budget.spent()) throw EvalAbort{{EvalIssue::Kind::Budget, "evaluation budget exceeded"}};
  switch (e.kind) {
    case Expr::Kind::Const:
      return {e.value, e.width};
    case Expr::Kind::Ref: {
      int w = 1;
      uint64_t v = read_net(inst, e.name, &w);
      return {v, w};
    }
    case Expr::Kind::Index: {
      Value idx = eval_expr(*e.kids[0], inst, budget);
      int w = 1;
      uint64_t v = read_net(inst, e.name, &w);
      int pos = bit_position(inst, e.name, static_cast<int64_t>(idx.v));
      if (pos >= 64 || pos >= w) return {0, 1};
      return {(v >> pos) & 1ULL, 1};
    }
    case Expr::Kind::Part: {
      Value a = eval_expr(*e.kids[0], inst, budget);
      Value b = eval_expr(*e.kids[1], inst, budget);
      int w = 1;
      uint64_t v = read_net(inst, e.name, &w);
      int pa = bit_position(inst, e.name, static_cast<int64_t>(a.v));
      int pb = bit_position(inst, e.name, static_cast<int64_t>(b.v));
      int lo = pa < pb ? pa : pb;
      int len = (pa > pb ? pa - pb : pb - pa) + 1;
      if (len > 64) len = 64;
      if (lo >= 64) return {0, len};
      return {(v >> lo) & mask_of(len), len};
    }
    case Expr::Kind::Unary: {
      Value a = eval_expr(*e.kids[0], inst, budget);
      const std::string& op = e.name;
      if (op == "u!") return {a.v == 0 ? 1ULL : 0ULL, 1};
      if (op == "u~") return {~a.v & mask_of(a.width), a.width};
      if (op == "u-") return {(~a.v + 1) & mask_of(a.width >= 32 ? a.width : 32),
                              a.width >= 32 ? a.width : 32};
      if (op == "u+") return a;
      uint64_t masked = a.v & mask_of(a.width);
      int ones = 0;
      for (int i = 0; i < a.width; ++i) ones += (masked >> i) & 1;
      if (op == "u&") return {ones == a.width ? 1ULL : 0ULL, 1};
      if (op == "u~&") return {ones == a.width ? 0ULL : 1ULL, 1};
      if (op == "u|") return {masked != 0 ? 1ULL : 0ULL, 1};
      if (op == "u~|") return {masked != 0 ? 0ULL : 1ULL, 1};
      if (op == "u^") return {static_cast<uint64_t>(ones & 1), 1};
      if (op == "u~^" || op == "u^~") return {static_cast<uint64_t>(~ones & 1), 1};
      throw EvalAbort{{EvalIssue::Kind::Unsupported, "unary operator " + op}};
    }
    case Expr::Kind::Binary: {
      const std::string& op = e.name;
      if (op == "&&") {
        Value a = eval_expr(*e.kids[0], inst, budget);
        if (a.v == 0) return {0, 1};
        Value b = eval_expr(*e.kids[1], inst, budget);
        return {b.v != 0 ? 1ULL : 0ULL, 1};
      }
      if (op == "||") {
        Value a = eval_expr(*e.kids[0], inst, budget);
        if (a.v != 0) return {1, 1};
        Value b = eval_expr(*e.kids[1], inst, budget);
        return {b.v != 0 ? 1ULL : 0ULL, 1};
      }
      Value a = eval_expr(*e.kids[0], inst, budget);
      Value b = eval_expr(*e.kids[1], inst, budget);
      int w = a.width > b.width ? a.width : b.width;
      if (op == "+") return {a.v + b.v, w};
      if (op == "-") return {a.v - b.v, w};
      if (op == "*") return {a.v * b.v, w};
      if (op == "/") return {b.v ? a.v / b.v : 0, w};
      if (op == "%") return {b.v ? a.v % b.v : 0, w};
      if (op == "**") {
        uint64_t r = 1;
        for (uint64_t i = 0; i < b.v && i < 64; ++i) r *= a.v;
        return {r, w};
      }
      if (op == "==" || op == "===") return {a.v == b.v ? 1ULL : 0ULL, 1};
      if (op == "!=" || op == "!==") return {a.v != b.v ? 1ULL : 0ULL, 1};
      if (op == "<") return {a.v < b.v ? 1ULL : 0ULL, 1};
      if (op == ">") return {a.v > b.v ? 1ULL : 0ULL, 1};
      if (op == "<=") return {a.v <= b.v ? 1ULL : 0ULL, 1};
      if (op == ">=") return {a.v >= b.v ? 1ULL : 0ULL, 1};
      if (op == "&") return {a.v & b.v, w};
      if (op == "|") return {a.v | b.v, w};
      if (op == "^") return {a.v ^ b.v, w};
      if (op == "~^" || op == "^~") return {~(a.v ^ b.v) & mask_of(w), w};
      if (op == "<<" || op == "<<<")
        return {b.v >= 64 ? 0 : (a.v << b.v) & mask_of(a.width), a.width};
      if (op == ">>" || op == ">>>") return {b.v >= 64 ? 0 : a.v >> b.v, a.width};
      throw EvalAbort{{EvalIssue::Kind::Unsupported, "binary operator " + op}};
    }
    case Expr::Kind::Ternary: {
      Value c = eval_expr(*e.kids[0], inst, budget);
      Value a = eval_expr(*(c.v != 0 ? e.kids[1] : e.kids[2]), inst, budget);
      Value other{0, 0};
      // width of a ternary is the max of both arms; probe the untaken arm's
      // width cheaply via a throwaway evaluation
      other = eval_expr(*(c.v != 0 ? e.kids[2] : e.kids[1]), inst, budget);
      return {a.v, a.width > other.width ? a.width : other.width};
    }
    case Expr::Kind::Concat: {
      uint64_t acc = 0;
      int total = 0;
      for (const auto& k : e.kids) {
        Value part = eval_expr(*k, inst, budget);
        int w = part.width;
        if (total + w > 64)
          throw EvalAbort{{EvalIssue::Kind::Unsupported, "concatenation wider than 64 bits"}};
        acc = (acc << w) | (part.v & mask_of(w));
        total += w;
      }
      return {acc, total};
    }
    case Expr::Kind::Repeat: {
      Value n = eval_expr(*e.kids[0], inst, budget);
      Value body = eval_expr(*e.kids[1], inst, budget);
      if (n.v > 64)
        throw EvalAbort{{EvalIssue::Kind::Unsupported, "replication count too large"}};
      uint64_t acc = 0;
      int total = 0;
      for (uint64_t i = 0; i < n.v; ++i) {
        if (total + body.width > 64)
          throw EvalAbort{{EvalIssue::Kind::Unsupported, "replication wider than 64 bits"}};
        acc = (acc << body.width) | (body.v & mask_of(body.width));
        total += body.width;
      }
      return {acc, total == 0 ? 1 : total};
    }
  }
  throw EvalAbort{{EvalIssue::Kind::Unsupported, "unknown expression"}};
}

inline void write_lvalue(const LValue& lv, uint64_t value, Instance& inst, Budget& budget) {
  switch (lv.kind) {
    case LValue::Kind::Ref:
      write_net(inst, lv.name, value);
      return;
    case LValue::Kind::Index: {
      Value idx = eval_expr(*lv.index, inst, budget);
      int w = 1;
      uint64_t cur = read_net(inst, lv.name, &w);
      int pos = bit_position(inst, lv.name, static_cast<int64_t>(idx.v));
      if (pos >= 64 || pos >= w) return;
      cur = (cur & ~(1ULL << pos)) | ((value & 1ULL) << pos);
      write_net(inst, lv.name, cur);
      return;
    }
    case LValue::Kind::Part: {
      Value a = eval_expr(*lv.msb, inst, budget);
      Value b = eval_expr(*lv.lsb, inst, budget);
      int w = 1;
      uint64_t cur = read_net(inst, lv.name, &w);
      int pa = bit_position(inst, lv.name, static_cast<int64_t>(a.v));
      int pb = bit_position(inst, lv.name, static_cast<int64_t>(b.v));
      int lo = pa < pb ? pa : pb;
      int len = (pa > pb ? pa - pb : pb - pa) + 1;
      if (lo >= 64) return;
      if (len > 64) len = 64;
      uint64_t m = mask_of(len) << lo;
      cur = (cur & ~m) | ((value & mask_of(len)) << lo);
      write_net(inst, lv.name, cur);
      return;
    }
    case LValue::Kind::Concat: {
      int total = 0;
      std::vector<int> widths;
      for (const auto& part : lv.parts) {
        int w = 1;
        if (part.kind == LValue::Kind::Ref) {
          read_net(inst, part.name, &w);
        } else if (part.kind == LValue::Kind::Index) {
          w = 1;
        } else if (part.kind == LValue::Kind::Part) {
          Value a = eval_expr(*part.msb, inst, budget);
          Value b = eval_expr(*part.lsb, inst, budget);
          w = static_cast<int>(a.v > b.v ? a.v - b.v : b.v - a.v) + 1;
        } else {
          throw EvalAbort{{EvalIssue::Kind::Unsupported, "nested concat target"}};
        }
        widths.push_back(w);
        total += w;
      }
      int consumed = 0;
      for (size_t i = 0; i < lv.parts.size(); ++i) {
        int shift = total - consumed - widths[i];
        uint64_t piece = shift >= 64 ? 0 : (value >> shift) & mask_of(widths[i]);
        write_lvalue(lv.parts[i], piece, inst, budget);
        consumed += widths[i];
      }
      return;
    }
  }
}

inline void exec_stmt(const Stmt& s, Instance& inst, Budget& budget) {
  if (budget.spent()) throw EvalAbort{{EvalIssue::Kind::Budget, "statement budget exceeded"}};
  switch (s.kind) {
    case Stmt::Kind::Nop:
      return;
    case Stmt::Kind::Block:
      for (const auto& st : s.body) exec_stmt(st, inst, budget);
      return;
    case Stmt::Kind::Assign: {
      Value v = eval_expr(*s.rhs, inst, budget);
      write_lvalue(s.lhs, v.v, inst, budget);
      return;
    }
    case Stmt::Kind::If: {
      Value c = eval_expr(*s.cond, inst, budget);
      const auto& body = c.v != 0 ? s.body : s.else_body;
      for (const auto& st : body) exec_stmt(st, inst, budget);
      return;
    }
    case Stmt::Kind::Case: {
      Value subj = eval_expr(*s.cond, inst, budget);
      const Stmt::CaseItem* chosen = nullptr;
      const Stmt::CaseItem* dflt = nullptr;
      for (const auto& item : s.case_items) {
        if (item.is_default) {
          dflt = &item;
          continue;
        }
        for (const auto& lab : item.labels) {
          Value lv = eval_expr(*lab, inst, budget);
          if (lv.v == subj.v) {
            chosen = &item;
            break;
          }
        }
        if (chosen) break;
      }
      if (!chosen) chosen = dflt;
      if (chosen)
        for (const auto& st : chosen->body) exec_stmt(st, inst, budget);
      return;
    }
    case Stmt::Kind::For: {
      Value init = eval_expr(*s.for_init_rhs, inst, budget);
      write_lvalue(s.for_init_lhs, init.v, inst, budget);
      while (true) {
        Value c = eval_expr(*s.cond, inst, budget);
        if (c.v == 0) break;
        for (const auto& st : s.body) exec_stmt(st, inst, budget);
        Value step = eval_expr(*s.for_step_rhs, inst, budget);
        write_lvalue(s.for_step_lhs, step.v, inst, budget);
        if (budget.spent(4))
          throw EvalAbort{{EvalIssue::Kind::Budget, "loop budget exceeded"}};
      }
      return;
    }
    case Stmt::Kind::While: {
      while (true) {
        Value c = eval_expr(*s.cond, inst, budget);
        if (c.v == 0) break;
        for (const auto& st : s.body) exec_stmt(st, inst, budget);
        if (budget.spent(4))
          throw EvalAbort{{EvalIssue::Kind::Budget, "loop budget exceeded"}};
      }
      return;
    }
    case Stmt::Kind::Repeat: {
      Value n = eval_expr(*s.cond, inst, budget);
      for (uint64_t i = 0; i < n.v; ++i) {
        for (const auto& st : s.body) exec_stmt(st, inst, budget);
        if (budget.spent(4))
          throw EvalAbort{{EvalIssue::Kind::Budget, "loop budget exceeded"}};
      }
      return;
    }
  }
}

inline uint64_t eval_const_expr(const Expr& e, const std::map<std::string, uint64_t>& params) {
  ModuleDef def;
  def.params = params;
  Instance inst;
  inst.def = &def;
  Budget budget;
  return eval_expr(e, inst, budget).v;
}

inline std::unique_ptr<Instance> build_instance(const Design& design,
                                                const std::string& module,
                                                const std::string& path, int depth,
                                                int* count) {
  if (depth > 16)
    throw EvalAbort{{EvalIssue::Kind::Elaboration, "instance tree deeper than 16 levels"}};
  if (++*count > 512)
    throw EvalAbort{{EvalIssue::Kind::Elaboration, "instance tree larger than 512 nodes"}};
  auto it = design.modules.find(module);
  if (it == design.modules.end())
    throw EvalAbort{{EvalIssue::Kind::Elaboration,
                     "unknown module '" + module + "' instantiated at " + path}};
  auto inst = std::make_unique<Instance>();
  inst->def = &it->second;
  inst->path = path;
  for (const auto& child : it->second.instances) {
    inst->children.push_back(
        build_instance(design, child.module, path + "." + child.name, depth + 1, count));
  }
  return inst;
}

// Binds formals to child ports; positional connections use port order.
inline void check_connections(const Design& design, const Instance& inst) {
  for (size_t ci = 0; ci < inst.def->instances.size(); ++ci) {
    const InstanceDef& idf = inst.def->instances[ci];
    const ModuleDef& child = *inst.children[ci]->def;
    size_t positional = 0;
    for (const auto& conn : idf.connections) {
      if (conn.named) {
        if (!child.port_dirs.count(conn.formal))
          throw EvalAbort{{EvalIssue::Kind::Elaboration,
                           "module '" + child.name + "' has no port '" + conn.formal +
                               "' (instance " + idf.name + ")"}};
      } else {
        if (positional >= child.port_order.size())
          throw EvalAbort{{EvalIssue::Kind::Elaboration,
                           "too many connections on instance '" + idf.name + "'"}};
        ++positional;
      }
    }
    check_connections(design, *inst.children[ci]);
  }
}

inline bool envs_equal(const Instance& a, std::vector<std::map<std::string, uint64_t>>& snap,
                       size_t& i) {
  bool same = snap[i] == a.env;
  snap[i] = a.env;
  ++i;
  for (const auto& c : a.children)
    if (!envs_equal(*c, snap, i)) same = false;
  return same;
}

inline size_t count_instances(const Instance& a) {
  size_t n = 1;
  for (const auto& c : a.children) n += count_instances(*c);
  return n;
}

inline void settle(Instance& inst, Budget& budget, int depth = 0) {
  if (depth > 16) throw EvalAbort{{EvalIssue::Kind::Elaboration, "settle recursion"}};
  const ModuleDef& def = *inst.def;
  for (const auto& ca : def.assigns) {
    Value v = eval_expr(*ca.rhs, inst, budget);
    write_lvalue(ca.lhs, v.v, inst, budget);
  }
  for (const auto& body : def.always_bodies)
    for (const auto& st : body) exec_stmt(st, inst, budget);
  for (size_t ci = 0; ci < def.instances.size(); ++ci) {
    const InstanceDef& idf = def.instances[ci];
    Instance& child = *inst.children[ci];
    size_t positional = 0;
    // inputs down
    for (const auto& conn : idf.connections) {
      std::string formal = conn.formal;
      if (!conn.named) {
        if (positional >= child.def->port_order.size()) break;
        formal = child.def->port_order[positional++];
      }
      auto dir_it = child.def->port_dirs.find(formal);
      if (dir_it == child.def->port_dirs.end()) continue;
      if (dir_it->second == rtl::PortDir::Output) continue;
      uint64_t v = 0;
      if (conn.connected && conn.actual) v = eval_expr(*conn.actual, inst, budget).v;
      write_net(child, formal, v);
    }
    settle(child, budget, depth + 1);
    // outputs up
    positional = 0;
    for (const auto& conn : idf.connections) {
      std::string formal = conn.formal;
      if (!conn.named) {
        if (positional >= child.def->port_order.size()) break;
        formal = child.def->port_order[positional++];
      }
      auto dir_it = child.def->port_dirs.find(formal);
      if (dir_it == child.def->port_dirs.end()) continue;
      if (dir_it->second != rtl::PortDir::Output) continue;
      if (!conn.connected || !conn.actual_lv) continue;
      int w = 1;
      uint64_t v = read_net(child, formal, &w);
      write_lvalue(*conn.actual_lv, v, inst, budget);
    }
  }
}

inline void settle_to_fixpoint(Instance& top, Budget& budget) {
  size_t n = count_instances(top);
  std::vector<std::map<std::string, uint64_t>> snap(n);
  for (int pass = 0; pass < 64; ++pass) {
    settle(top, budget, 0);
    size_t i = 0;
    if (envs_equal(top, snap, i)) return;
  }
  throw EvalAbort{{EvalIssue::Kind::Budget, "combinational network did not settle"}};
}

}  // namespace eval_detail

// Evaluates every row of the table against the design. Never throws for
// design-caused problems; they come back as SimResult.issue.
inline SimResult simulate_vectors(std::string_view rtl_source, const VectorTable& table) {
  using namespace eval_detail;
  SimResult result;

  Design design;
  try {
    design = elaborate(rtl_source);
  } catch (const ParseError& e) {
    result.issue = EvalIssue{EvalIssue::Kind::Unsupported, e.detail};
    return result;
  } catch (const EvalAbort& a) {
    result.issue = a.issue;
    return result;
  }

  if (!design.modules.count(table.module_name)) {
    result.issue = EvalIssue{EvalIssue::Kind::Elaboration,
                             "top module '" + table.module_name + "' not found"};
    return result;
  }

  for (const VectorRow& row : table.rows) {
    RowOutcome out;
    out.id = row.id;
    out.expected = row.expected;
    try {
      int count = 0;
      std::unique_ptr<Instance> top =
          build_instance(design, table.module_name, table.module_name, 0, &count);
      check_connections(design, *top);
      Budget budget;
      for (const auto& [name, value] : row.inputs) {
        write_net(*top, name, value);  // masked to the declared port width
      }
      settle_to_fixpoint(*top, budget);
      bool pass = true;
      for (const auto& p : table.ports) {
        if (p.is_input) continue;
        int w = 1;
        uint64_t got = read_net(*top, p.name, &w) & width_mask(p.width);
        out.got[p.name] = got;
        auto eit = row.expected.find(p.name);
        if (eit != row.expected.end() && eit->second != got) pass = false;
      }
      out.pass = pass;
      out.evaluated = true;
      result.rows.push_back(std::move(out));
    } catch (const EvalAbort& a) {
      result.issue = a.issue;
      result.rows.push_back(std::move(out));
      return result;  // same failure would repeat for every row
    }
  }
  result.completed = true;
  return result;
}

}  // namespace meic::tool
