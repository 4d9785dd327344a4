#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "meic/common.hpp"
#include "meic/tool/syntax_rules.hpp"
#include "test_util.hpp"

using meic::tool::check_syntax;
using meic::tool::Diagnostic;
using meic::tool::format_compile_log;

namespace {

bool any_rule(const std::vector<Diagnostic>& diags, const std::string& rule) {
  for (const auto& d : diags)
    if (d.rule == rule) return true;
  return false;
}

bool any_message(const std::vector<Diagnostic>& diags, const std::string& needle) {
  for (const auto& d : diags)
    if (d.message.find(needle) != std::string::npos) return true;
  return false;
}

std::string dump(const std::vector<Diagnostic>& diags) { return format_compile_log(diags); }

}  // namespace

TEST_CASE("every reference design in the corpus checks clean") {
  for (const auto& name : meic_test::corpus_designs()) {
    auto diags = check_syntax(meic_test::corpus_source(name));
    INFO(name << ":\n" << dump(diags));
    CHECK(diags.empty());
  }
}

TEST_CASE("sequential fixtures check clean, including non-ANSI output reg redeclaration") {
  for (const char* file : {"seq/counter8.v", "seq/fsm_stepper.v"}) {
    auto diags = check_syntax(meic::read_file(meic_test::fixture_path(file)));
    INFO(file << ":\n" << dump(diags));
    CHECK(diags.empty());
  }
}

TEST_CASE("missing statement terminator after a continuous assignment") {
  std::string src =
      "module t (input a, output y);\n"
      "  assign y = a\n"
      "endmodule\n";
  auto diags = check_syntax(src);
  REQUIRE_FALSE(diags.empty());
  INFO(dump(diags));
  CHECK(any_rule(diags, "terminator"));
  CHECK(any_message(diags, "missing ';' after assignment to 'y'"));
}

TEST_CASE("missing statement terminator after a declaration") {
  std::string src =
      "module t (input a, output y);\n"
      "  wire [8:0] total\n"
      "  assign y = a;\n"
      "endmodule\n";
  auto diags = check_syntax(src);
  INFO(dump(diags));
  CHECK(any_message(diags, "missing ';' at end of declaration of 'total'"));
}

TEST_CASE("missing semicolon after the module header") {
  std::string src =
      "module t (input a, output y)\n"
      "  assign y = a;\n"
      "endmodule\n";
  auto diags = check_syntax(src);
  INFO(dump(diags));
  CHECK(any_message(diags, "expected ';' after module header of 't'"));
}

TEST_CASE("missing semicolon in a procedural assignment") {
  std::string src =
      "module t (input a, output reg y);\n"
      "  always @(*) begin\n"
      "    y = a\n"
      "  end\n"
      "endmodule\n";
  auto diags = check_syntax(src);
  INFO(dump(diags));
  CHECK(any_rule(diags, "terminator"));
}

TEST_CASE("transposed identifier is reported as undeclared") {
  std::string src = meic_test::corpus_source("alu8");
  // corrupt exactly one use of 'result'
  size_t pos = src.find("result = a + b");
  REQUIRE(pos != std::string::npos);
  src.replace(pos, 6, "resutl");
  auto diags = check_syntax(src);
  INFO(dump(diags));
  REQUIRE_FALSE(diags.empty());
  CHECK(any_rule(diags, "undeclared"));
  CHECK(any_message(diags, "'resutl'"));
}

TEST_CASE("assignment inside an if condition") {
  std::string src =
      "module t (input [1:0] a, output reg b);\n"
      "  always @(*) begin\n"
      "    if (a = 2'b10)\n"
      "      b = 1'b1;\n"
      "    else\n"
      "      b = 1'b0;\n"
      "  end\n"
      "endmodule\n";
  auto diags = check_syntax(src);
  INFO(dump(diags));
  CHECK(any_rule(diags, "condition-assign"));
  CHECK(any_message(diags, "did you mean '=='"));
}

TEST_CASE("assignment buried in a right-hand side") {
  std::string src =
      "module t (input a, input b, output y);\n"
      "  assign y = (a = b);\n"
      "endmodule\n";
  auto diags = check_syntax(src);
  INFO(dump(diags));
  CHECK(any_rule(diags, "expression-assign"));
}

TEST_CASE("body declaration that shadows an ANSI port") {
  std::string src = meic_test::corpus_source("mux2");
  size_t pos = src.find("  always");
  REQUIRE(pos != std::string::npos);
  src.insert(pos, "  wire [3:0] a;\n");
  auto diags = check_syntax(src);
  INFO(dump(diags));
  CHECK(any_rule(diags, "duplicate"));
  CHECK(any_message(diags, "'a' is already declared as a port"));
}

TEST_CASE("non-ASCII bytes in an identifier") {
  std::string src =
      "module t (input a, output y);\n"
      "  wire t\xC3\xA2tal;\n"
      "  assign y = a;\n"
      "endmodule\n";
  auto diags = check_syntax(src);
  INFO(dump(diags));
  CHECK(any_rule(diags, "encoding"));
  CHECK(any_message(diags, "non-ASCII"));
}

TEST_CASE("continuous assignment to a variable") {
  std::string src =
      "module t (input a, output reg y);\n"
      "  assign y = a;\n"
      "endmodule\n";
  auto diags = check_syntax(src);
  INFO(dump(diags));
  CHECK(any_rule(diags, "assignment-target"));
  CHECK(any_message(diags, "continuous assignment to variable 'y'"));
}

TEST_CASE("procedural assignment to a net") {
  std::string src =
      "module t (input a, output y);\n"
      "  always @(*) begin\n"
      "    y = a;\n"
      "  end\n"
      "endmodule\n";
  auto diags = check_syntax(src);
  INFO(dump(diags));
  CHECK(any_rule(diags, "assignment-target"));
  CHECK(any_message(diags, "procedural assignment to net 'y'"));
}

TEST_CASE("port with a deleted direction declaration") {
  std::string src = meic_test::corpus_source("parity");
  size_t pos = src.find("  input  [3:0] a;");
  REQUIRE(pos != std::string::npos);
  src.replace(pos, std::string("  input  [3:0] a;").size(),
              "  //Declaration for a is missing.");
  auto diags = check_syntax(src);
  INFO(dump(diags));
  CHECK(any_rule(diags, "port-direction"));
  CHECK(any_message(diags, "port 'a' of module 'parity' has no direction declaration"));
}

TEST_CASE("constant index past the declared range") {
  std::string src = meic_test::corpus_source("adder8");
  src = meic::replace_all(src, "total[8]", "total[9]");
  auto diags = check_syntax(src);
  INFO(dump(diags));
  CHECK(any_rule(diags, "index-bounds"));
  CHECK(any_message(diags, "index 9 is outside [8:0] of 'total'"));
}

TEST_CASE("part select dropping below the declared range") {
  std::string src = meic_test::corpus_source("adder8");
  src = meic::replace_all(src, "total[7:0]", "total[6:-1]");
  auto diags = check_syntax(src);
  INFO(dump(diags));
  CHECK(any_rule(diags, "index-bounds"));
}

TEST_CASE("bit select of a scalar signal") {
  std::string src =
      "module t (input a, output y);\n"
      "  assign y = a[0];\n"
      "endmodule\n";
  auto diags = check_syntax(src);
  INFO(dump(diags));
  CHECK(any_message(diags, "bit-select of scalar"));
}

TEST_CASE("reserved word used as a declaration name") {
  std::string src =
      "module t (input a, output y);\n"
      "  wire always;\n"
      "  assign y = a;\n"
      "endmodule\n";
  auto diags = check_syntax(src);
  INFO(dump(diags));
  CHECK(any_rule(diags, "reserved-word"));
}

TEST_CASE("unbalanced structure is reported") {
  auto one = check_syntax(
      "module t (input a, output reg y);\n"
      "  always @(*) begin\n"
      "    y = a;\n"
      "endmodule\n");
  INFO(dump(one));
  CHECK(any_rule(one, "balance"));

  auto two = check_syntax("module t (input a, output y));\n  assign y = a;\nendmodule\n");
  INFO(dump(two));
  CHECK_FALSE(two.empty());

  auto three = check_syntax("module t (input a, output y);\n  assign y = a;\n");
  INFO(dump(three));
  CHECK(any_rule(three, "balance"));
}

TEST_CASE("bare fragments are checked by wrapping, keeping line numbers") {
  auto diags = check_syntax("reg q;\nreg [7:0] data\n");
  INFO(dump(diags));
  REQUIRE_FALSE(diags.empty());
  CHECK(any_rule(diags, "terminator"));
  bool line_two = false;
  for (const auto& d : diags)
    if (d.rule == "terminator" && d.line == 2 &&
        d.message.find("'data'") != std::string::npos)
      line_two = true;
  CHECK(line_two);
}

TEST_CASE("empty and comment-only sources produce no diagnostics") {
  CHECK(check_syntax("").empty());
  CHECK(check_syntax("// nothing here\n/* still nothing */\n").empty());
}

TEST_CASE("compile log format is file:line: error: message [rule]") {
  std::string src =
      "module t (input a, output y);\n"
      "  assign y = a\n"
      "endmodule\n";
  auto diags = check_syntax(src);
  REQUIRE_FALSE(diags.empty());
  std::string log = format_compile_log(diags, "design.v");
  CHECK(log.find("design.v:2: error: missing ';' after assignment to 'y' [terminator]") !=
        std::string::npos);
  // deterministic across calls
  CHECK(log == format_compile_log(check_syntax(src), "design.v"));
}

TEST_CASE("diagnostics come out sorted by line") {
  std::string src =
      "module t (input a, output y);\n"
      "  wire w\n"
      "  assign y = a\n"
      "endmodule\n";
  auto diags = check_syntax(src);
  REQUIRE(diags.size() >= 2);
  for (size_t i = 1; i < diags.size(); ++i) CHECK(diags[i - 1].line <= diags[i].line);
}
