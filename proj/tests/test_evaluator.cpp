#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "meic/common.hpp"
#include "meic/rng.hpp"
#include "meic/tool/evaluator.hpp"
#include "test_util.hpp"

using meic::SplitMix64;
using meic::tool::EvalIssue;
using meic::tool::simulate_vectors;
using meic::tool::SimResult;
using meic::tool::VectorRow;
using meic::tool::VectorTable;

namespace {

using Env = std::map<std::string, uint64_t>;
using Oracle = std::function<Env(const Env&)>;

// Native reimplementations of each corpus design, used as ground truth.
const std::map<std::string, Oracle>& oracles() {
  static const std::map<std::string, Oracle> table = {
      {"adder8",
       [](const Env& in) -> Env {
         uint64_t t = in.at("a") + in.at("b") + in.at("cin");
         return {{"sum", t & 0xFF}, {"cout", (t >> 8) & 1}};
       }},
      {"rca4",
       [](const Env& in) -> Env {
         uint64_t t = in.at("a") + in.at("b") + in.at("cin");
         return {{"sum", t & 0xF}, {"cout", (t >> 4) & 1}};
       }},
      {"shifter",
       [](const Env& in) -> Env {
         uint64_t d = in.at("din"), m = in.at("mode");
         uint64_t out = 0;
         if (m == 0) out = d;
         else if (m == 1) out = ((d & 0xF) << 4) | (d >> 4);
         else if (m == 2) out = ((d & 1) << 7) | (d >> 1);
         else out = ~d & 0xFF;
         return {{"dout", out}};
       }},
      {"popcount8",
       [](const Env& in) -> Env {
         uint64_t d = in.at("din"), n = 0;
         while (d) {
           n += d & 1;
           d >>= 1;
         }
         return {{"ones", n}};
       }},
      {"alu8",
       [](const Env& in) -> Env {
         uint64_t a = in.at("a"), b = in.at("b"), op = in.at("op"), y = 0;
         if (op == 0) y = (a + b) & 0xFF;
         else if (op == 1) y = (a - b) & 0xFF;
         else if (op == 2) y = a & b;
         else y = a | b;
         return {{"y", y}};
       }},
      {"mux2",
       [](const Env& in) -> Env {
         return {{"y", in.at("sel") ? in.at("b") : in.at("a")}};
       }},
      {"parity",
       [](const Env& in) -> Env {
         uint64_t bits = (in.at("a") << 4) | in.at("b");
         int ones = 0;
         for (int i = 0; i < 8; ++i) ones += (bits >> i) & 1;
         uint64_t odd = ones & 1;
         return {{"odd", odd}, {"even", odd ^ 1}};
       }},
      {"comparator",
       [](const Env& in) -> Env {
         uint64_t a = in.at("a"), b = in.at("b");
         return {{"eq", a == b ? 1ULL : 0ULL},
                 {"gt", a > b ? 1ULL : 0ULL},
                 {"all_ones", (a == 15 && b == 15) ? 1ULL : 0ULL}};
       }},
  };
  return table;
}

// Replaces the table's rows with randomized inputs whose expectations come
// from the native oracle.
VectorTable randomized_rows(const std::string& design, int count, uint64_t seed) {
  VectorTable t = meic_test::corpus_table(design);
  const Oracle& oracle = oracles().at(design);
  SplitMix64 rng(seed);
  std::vector<VectorRow> rows;
  for (int i = 0; i < count; ++i) {
    VectorRow r;
    r.id = "q" + std::to_string(i);
    Env in;
    for (const auto& p : t.ports) {
      if (!p.is_input) continue;
      in[p.name] = rng.next() & meic::tool::width_mask(p.width);
    }
    r.inputs = in;
    for (const auto& [k, v] : oracle(in))
      r.expected[k] = v & meic::tool::width_mask(t.find_port(k)->width);
    rows.push_back(std::move(r));
  }
  t.rows = std::move(rows);
  return t;
}

}  // namespace

TEST_CASE("evaluator matches native oracles on randomized inputs") {
  for (const auto& name : meic_test::corpus_designs()) {
    INFO(name);
    VectorTable t = randomized_rows(name, 100, 0x5EED0 + name.size());
    SimResult r = simulate_vectors(meic_test::corpus_source(name), t);
    INFO((r.issue ? r.issue->detail : std::string("no issue")));
    REQUIRE(r.completed);
    REQUIRE(r.rows.size() == t.rows.size());
    int failing = 0;
    for (const auto& row : r.rows) {
      if (!row.pass) {
        ++failing;
        INFO("row " << row.id);
        for (const auto& [k, v] : row.got)
          UNSCOPED_INFO("  got " << k << "=" << v << " exp " << row.expected.at(k));
      }
    }
    CHECK(failing == 0);
  }
}

TEST_CASE("every corpus design passes its shipped vector table") {
  for (const auto& name : meic_test::corpus_designs()) {
    INFO(name);
    SimResult r = simulate_vectors(meic_test::corpus_source(name),
                                   meic_test::corpus_table(name));
    INFO((r.issue ? r.issue->detail : std::string("no issue")));
    REQUIRE(r.completed);
    for (const auto& row : r.rows) {
      INFO("row " << row.id);
      CHECK(row.pass);
    }
  }
}

TEST_CASE("a wrong expectation fails with the actual value reported") {
  VectorTable t = meic_test::corpus_table("adder8");
  t.rows[0].expected["sum"] = 9;  // 3 + 5 + 0 is 8
  SimResult r = simulate_vectors(meic_test::corpus_source("adder8"), t);
  REQUIRE(r.completed);
  CHECK_FALSE(r.rows[0].pass);
  CHECK(r.rows[0].got.at("sum") == 8);
  CHECK(r.rows[0].expected.at("sum") == 9);
  // later rows still evaluate
  CHECK(r.rows[1].pass);
}

TEST_CASE("an operator swap in the ALU fails exactly the affected rows") {
  std::string src = meic_test::corpus_source("alu8");
  src = meic::replace_all(src, "result = a & b;", "result = a + b;");
  SimResult r = simulate_vectors(src, meic_test::corpus_table("alu8"));
  REQUIRE(r.completed);
  std::map<std::string, bool> by_id;
  for (const auto& row : r.rows) by_id[row.id] = row.pass;
  CHECK(by_id.at("r0"));        // op 0 unaffected
  CHECK_FALSE(by_id.at("r3"));  // 3 & 5 became 3 + 5
  CHECK_FALSE(by_id.at("r5"));  // 255 & 170 became 255 + 170
}

TEST_CASE("a dangling port connection breaks the carry chain") {
  std::string src = meic_test::corpus_source("rca4");
  src = meic::replace_all(src, ".cin(c1)", ".cin()");
  SimResult r = simulate_vectors(src, meic_test::corpus_table("rca4"));
  REQUIRE(r.completed);
  int failing = 0;
  for (const auto& row : r.rows)
    if (!row.pass) ++failing;
  CHECK(failing > 0);
  CHECK(failing < static_cast<int>(r.rows.size()));  // r3 (0+0+0) still passes
}

TEST_CASE("an unknown module name is an elaboration issue failing every row") {
  std::string src = meic_test::corpus_source("rca4");
  src = meic::replace_all(src, "full_add fa2", "full_dad fa2");
  SimResult r = simulate_vectors(src, meic_test::corpus_table("rca4"));
  CHECK_FALSE(r.completed);
  REQUIRE(r.issue.has_value());
  CHECK(r.issue->kind == EvalIssue::Kind::Elaboration);
  CHECK(r.issue->detail.find("full_dad") != std::string::npos);
}

TEST_CASE("a connection to a port that does not exist is an elaboration issue") {
  std::string src = meic_test::corpus_source("rca4");
  src = meic::replace_all(src, ".cin(c1)", ".carry_in(c1)");
  SimResult r = simulate_vectors(src, meic_test::corpus_table("rca4"));
  CHECK_FALSE(r.completed);
  REQUIRE(r.issue.has_value());
  CHECK(r.issue->kind == EvalIssue::Kind::Elaboration);
  CHECK(r.issue->detail.find("carry_in") != std::string::npos);
}

TEST_CASE("a self-assigning loop step exhausts the budget") {
  std::string src = meic_test::corpus_source("popcount8");
  src = meic::replace_all(src, "i = i + 1", "i = i");
  SimResult r = simulate_vectors(src, meic_test::corpus_table("popcount8"));
  CHECK_FALSE(r.completed);
  REQUIRE(r.issue.has_value());
  CHECK(r.issue->kind == EvalIssue::Kind::Budget);
}

TEST_CASE("edge-triggered blocks are out of scope and say so") {
  std::string src = meic::read_file(meic_test::fixture_path("seq/counter8.v"));
  auto j = meic::tool::Json::parse(
      meic::read_file(meic_test::fixture_path("seq/counter8_vectors.json")));
  VectorTable t = meic::tool::vector_table_from_json(j);
  SimResult r = simulate_vectors(src, t);
  CHECK_FALSE(r.completed);
  REQUIRE(r.issue.has_value());
  CHECK(r.issue->kind == EvalIssue::Kind::Unsupported);
  CHECK(r.issue->detail.find("edge-triggered") != std::string::npos);
}

TEST_CASE("a narrowed internal bus corrupts at least one row") {
  std::string src = meic_test::corpus_source("adder8");
  src = meic::replace_all(src, "wire [8:0] total;", "wire [8:1] total;");
  SimResult r = simulate_vectors(src, meic_test::corpus_table("adder8"));
  REQUIRE(r.completed);
  int failing = 0;
  for (const auto& row : r.rows)
    if (!row.pass) ++failing;
  CHECK(failing > 0);
}

TEST_CASE("missing top module is an elaboration issue") {
  VectorTable t = meic_test::corpus_table("adder8");
  SimResult r = simulate_vectors("module other (input x, output y);\n"
                                 "  assign y = x;\nendmodule\n",
                                 t);
  CHECK_FALSE(r.completed);
  REQUIRE(r.issue.has_value());
  CHECK(r.issue->kind == EvalIssue::Kind::Elaboration);
}

TEST_CASE("parameters participate in expressions") {
  VectorTable t;
  t.module_name = "scaled";
  t.ports.push_back({"x", true, 8, meic::tool::PortRole::Data, false});
  t.ports.push_back({"y", false, 8, meic::tool::PortRole::Data, false});
  VectorRow r;
  r.id = "r0";
  r.inputs["x"] = 5;
  r.expected["y"] = 20;
  t.rows.push_back(r);
  std::string src =
      "module scaled (input [7:0] x, output [7:0] y);\n"
      "  parameter FACTOR = 2 * 2;\n"
      "  assign y = x * FACTOR;\n"
      "endmodule\n";
  SimResult res = simulate_vectors(src, t);
  INFO((res.issue ? res.issue->detail : std::string("no issue")));
  REQUIRE(res.completed);
  CHECK(res.rows[0].pass);
}

TEST_CASE("values wider than any declared net are masked at write time") {
  VectorTable t;
  t.module_name = "narrow";
  t.ports.push_back({"x", true, 8, meic::tool::PortRole::Data, false});
  t.ports.push_back({"y", false, 4, meic::tool::PortRole::Data, false});
  VectorRow r;
  r.id = "r0";
  r.inputs["x"] = 0xFF;
  r.expected["y"] = 0xF;
  t.rows.push_back(r);
  std::string src =
      "module narrow (input [7:0] x, output [3:0] y);\n"
      "  assign y = x;\n"
      "endmodule\n";
  SimResult res = simulate_vectors(src, t);
  REQUIRE(res.completed);
  CHECK(res.rows[0].pass);
}

TEST_CASE("case statements select the matching arm or the default") {
  VectorTable t;
  t.module_name = "dec";
  t.ports.push_back({"s", true, 2, meic::tool::PortRole::Data, false});
  t.ports.push_back({"y", false, 4, meic::tool::PortRole::Data, false});
  auto expect = [&](uint64_t s, uint64_t y, const std::string& id) {
    VectorRow r;
    r.id = id;
    r.inputs["s"] = s;
    r.expected["y"] = y;
    t.rows.push_back(r);
  };
  expect(0, 1, "r0");
  expect(1, 2, "r1");
  expect(2, 4, "r2");
  expect(3, 15, "r3");
  std::string src =
      "module dec (input [1:0] s, output reg [3:0] y);\n"
      "  always @(*) begin\n"
      "    case (s)\n"
      "      2'b00: y = 4'd1;\n"
      "      2'b01: y = 4'd2;\n"
      "      2'b10: y = 4'd4;\n"
      "      default: y = 4'd15;\n"
      "    endcase\n"
      "  end\n"
      "endmodule\n";
  SimResult res = simulate_vectors(src, t);
  INFO((res.issue ? res.issue->detail : std::string("no issue")));
  REQUIRE(res.completed);
  for (const auto& row : res.rows) {
    INFO(row.id);
    CHECK(row.pass);
  }
}
