#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "meic/common.hpp"
#include "meic/tool/vectors.hpp"
#include "test_util.hpp"

using meic::Error;
using meic::tool::Json;
using meic::tool::kIfaceTag;
using meic::tool::kVectorTag;
using meic::tool::parse_vector_annotations;
using meic::tool::PortRole;
using meic::tool::validate;
using meic::tool::vector_table_from_json;
using meic::tool::vector_table_to_json;
using meic::tool::VectorTable;
using meic::tool::width_mask;

TEST_CASE("width_mask covers 1 through 64 bits") {
  CHECK(width_mask(1) == 0x1ULL);
  CHECK(width_mask(4) == 0xFULL);
  CHECK(width_mask(8) == 0xFFULL);
  CHECK(width_mask(63) == 0x7FFFFFFFFFFFFFFFULL);
  CHECK(width_mask(64) == ~0ULL);
}

TEST_CASE("every corpus vector table loads, validates, and round-trips") {
  for (const auto& name : meic_test::corpus_designs()) {
    INFO(name);
    VectorTable t = meic_test::corpus_table(name);
    REQUIRE_NOTHROW(validate(t));
    Json j1 = vector_table_to_json(t);
    VectorTable t2 = vector_table_from_json(j1);
    Json j2 = vector_table_to_json(t2);
    CHECK(j1.dump() == j2.dump());
  }
}

TEST_CASE("clock and reset roles round-trip through json") {
  auto j = Json::parse(
      meic::read_file(meic_test::fixture_path("seq/counter8_vectors.json")));
  VectorTable t = vector_table_from_json(j);
  REQUIRE_NOTHROW(validate(t));
  CHECK(t.has_clock());
  const auto* clk = t.find_port("clk");
  REQUIRE(clk != nullptr);
  CHECK(clk->role == PortRole::Clock);
  const auto* rst = t.find_port("rst_n");
  REQUIRE(rst != nullptr);
  CHECK(rst->role == PortRole::Reset);
  CHECK(rst->reset_active_low);
  CHECK(vector_table_to_json(vector_table_from_json(vector_table_to_json(t))).dump() ==
        vector_table_to_json(t).dump());
}

namespace {

VectorTable small_table() {
  VectorTable t;
  t.module_name = "m";
  t.ports.push_back({"a", true, 4, PortRole::Data, false});
  t.ports.push_back({"y", false, 4, PortRole::Data, false});
  meic::tool::VectorRow r;
  r.id = "r0";
  r.inputs["a"] = 3;
  r.expected["y"] = 3;
  t.rows.push_back(r);
  return t;
}

}  // namespace

TEST_CASE("validate names the offending row and port") {
  SECTION("value wider than the port") {
    VectorTable t = small_table();
    t.rows[0].inputs["a"] = 16;
    try {
      validate(t);
      FAIL("expected an error");
    } catch (const Error& e) {
      std::string msg = e.what();
      CHECK(msg.find("r0") != std::string::npos);
      CHECK(msg.find("'a'") != std::string::npos);
      CHECK(msg.find("4 bits") != std::string::npos);
    }
  }
  SECTION("expectation wider than the port") {
    VectorTable t = small_table();
    t.rows[0].expected["y"] = 255;
    CHECK_THROWS_AS(validate(t), Error);
  }
  SECTION("duplicate row ids") {
    VectorTable t = small_table();
    t.rows.push_back(t.rows[0]);
    CHECK_THROWS_WITH(validate(t), Catch::Matchers::ContainsSubstring("duplicate row id"));
  }
  SECTION("missing input drive") {
    VectorTable t = small_table();
    t.rows[0].inputs.clear();
    CHECK_THROWS_WITH(validate(t), Catch::Matchers::ContainsSubstring("missing input 'a'"));
  }
  SECTION("missing output expectation") {
    VectorTable t = small_table();
    t.rows[0].expected.clear();
    CHECK_THROWS_WITH(validate(t),
                      Catch::Matchers::ContainsSubstring("missing expectation for 'y'"));
  }
  SECTION("unknown port in a row") {
    VectorTable t = small_table();
    t.rows[0].inputs["zz"] = 1;
    CHECK_THROWS_WITH(validate(t), Catch::Matchers::ContainsSubstring("'zz'"));
  }
  SECTION("driving a clock port") {
    VectorTable t = small_table();
    t.ports.push_back({"clk", true, 1, PortRole::Clock, false});
    t.rows[0].inputs["clk"] = 1;
    CHECK_THROWS_WITH(validate(t),
                      Catch::Matchers::ContainsSubstring("clock/reset port 'clk'"));
  }
  SECTION("output port with a driver role") {
    VectorTable t = small_table();
    t.ports[1].role = PortRole::Clock;
    CHECK_THROWS_AS(validate(t), Error);
  }
  SECTION("port width out of range") {
    VectorTable t = small_table();
    t.ports[0].width = 65;
    CHECK_THROWS_WITH(validate(t), Catch::Matchers::ContainsSubstring("outside 1..64"));
  }
  SECTION("no rows") {
    VectorTable t = small_table();
    t.rows.clear();
    CHECK_THROWS_WITH(validate(t), Catch::Matchers::ContainsSubstring("no rows"));
  }
  SECTION("row id with hostile characters") {
    VectorTable t = small_table();
    t.rows[0].id = "r0\"%h";
    CHECK_THROWS_AS(validate(t), Error);
  }
  SECTION("module name must be an identifier") {
    VectorTable t = small_table();
    t.module_name = "bad name";
    CHECK_THROWS_AS(validate(t), Error);
  }
  SECTION("negative latency") {
    VectorTable t = small_table();
    t.rows[0].latency_cycles = -2;
    CHECK_THROWS_WITH(validate(t), Catch::Matchers::ContainsSubstring("negative latency"));
  }
}

TEST_CASE("malformed vector json is rejected with context") {
  CHECK_THROWS_WITH(vector_table_from_json(Json::parse("{\"module\": 3}")),
                    Catch::Matchers::ContainsSubstring("malformed vector table json"));
}

TEST_CASE("annotation lines round-trip a table") {
  VectorTable t = meic_test::corpus_table("adder8");
  Json iface = vector_table_to_json(t);
  iface.erase("rows");
  std::string text = std::string(kIfaceTag) + iface.dump() + "\n";
  for (const auto& r : t.rows) {
    Json jr = Json::object();
    jr["id"] = r.id;
    jr["in"] = Json::object();
    for (const auto& [k, v] : r.inputs) jr["in"][k] = v;
    jr["out"] = Json::object();
    for (const auto& [k, v] : r.expected) jr["out"][k] = v;
    text += std::string(kVectorTag) + jr.dump() + "\n";
  }
  auto parsed = parse_vector_annotations(text);
  REQUIRE(parsed.has_value());
  CHECK(vector_table_to_json(*parsed).dump() == vector_table_to_json(t).dump());
}

TEST_CASE("annotations without an interface line parse to nothing") {
  CHECK_FALSE(parse_vector_annotations("// some testbench\nmodule tb; endmodule\n").has_value());
  CHECK_FALSE(parse_vector_annotations("").has_value());
}

TEST_CASE("vector rows without ids are numbered in file order") {
  VectorTable t = small_table();
  Json iface = vector_table_to_json(t);
  iface.erase("rows");
  std::string text = std::string(kIfaceTag) + iface.dump() + "\n";
  text += std::string(kVectorTag) + R"({"in":{"a":1},"out":{"y":1}})" + "\n";
  text += std::string(kVectorTag) + R"({"in":{"a":2},"out":{"y":2}})" + "\n";
  auto parsed = parse_vector_annotations(text);
  REQUIRE(parsed.has_value());
  REQUIRE(parsed->rows.size() == 2);
  CHECK(parsed->rows[0].id == "r0");
  CHECK(parsed->rows[1].id == "r1");
}
