#pragma once

// Check-vector tables: the stimulus/expectation data a generated testbench
// encodes and the builtin simulator consumes. Tables round-trip through JSON
// and ride along inside generated testbenches as comment annotations so that
// a bundle stays self-contained on disk.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "meic/common.hpp"

namespace meic::tool {

using Json = nlohmann::ordered_json;

enum class PortRole { Data, Clock, Reset };

struct PortSpec {
  std::string name;
  bool is_input = true;
  int width = 1;
  PortRole role = PortRole::Data;
  bool reset_active_low = true;
};

struct VectorRow {
  std::string id;
  std::map<std::string, uint64_t> inputs;
  std::map<std::string, uint64_t> expected;
  int latency_cycles = 1;  // clocked designs: cycles to wait before checking
};

struct VectorTable {
  std::string module_name;
  std::vector<PortSpec> ports;
  std::vector<VectorRow> rows;

  const PortSpec* find_port(std::string_view n) const {
    for (const auto& p : ports)
      if (p.name == n) return &p;
    return nullptr;
  }
  std::vector<const PortSpec*> data_inputs() const {
    std::vector<const PortSpec*> out;
    for (const auto& p : ports)
      if (p.is_input && p.role == PortRole::Data) out.push_back(&p);
    return out;
  }
  std::vector<const PortSpec*> outputs() const {
    std::vector<const PortSpec*> out;
    for (const auto& p : ports)
      if (!p.is_input) out.push_back(&p);
    return out;
  }
  bool has_clock() const {
    for (const auto& p : ports)
      if (p.role == PortRole::Clock) return true;
    return false;
  }
};

inline uint64_t width_mask(int width) {
  return width >= 64 ? ~0ULL : ((1ULL << width) - 1ULL);
}

inline Json vector_table_to_json(const VectorTable& t) {
  Json j;
  j["module"] = t.module_name;
  j["ports"] = Json::array();
  for (const auto& p : t.ports) {
    Json jp;
    jp["name"] = p.name;
    jp["dir"] = p.is_input ? "in" : "out";
    jp["width"] = p.width;
    if (p.role == PortRole::Clock) jp["role"] = "clock";
    if (p.role == PortRole::Reset) {
      jp["role"] = "reset";
      jp["active_low"] = p.reset_active_low;
    }
    j["ports"].push_back(std::move(jp));
  }
  j["rows"] = Json::array();
  for (const auto& r : t.rows) {
    Json jr;
    jr["id"] = r.id;
    jr["in"] = Json::object();
    for (const auto& [k, v] : r.inputs) jr["in"][k] = v;
    jr["out"] = Json::object();
    for (const auto& [k, v] : r.expected) jr["out"][k] = v;
    if (r.latency_cycles != 1) jr["latency"] = r.latency_cycles;
    j["rows"].push_back(std::move(jr));
  }
  return j;
}

inline VectorTable vector_table_from_json(const Json& j) {
  VectorTable t;
  try {
    t.module_name = j.at("module").get<std::string>();
    for (const auto& jp : j.at("ports")) {
      PortSpec p;
      p.name = jp.at("name").get<std::string>();
      p.is_input = jp.at("dir").get<std::string>() == "in";
      p.width = jp.at("width").get<int>();
      std::string role = jp.value("role", "data");
      if (role == "clock") p.role = PortRole::Clock;
      else if (role == "reset") p.role = PortRole::Reset;
      p.reset_active_low = jp.value("active_low", true);
      t.ports.push_back(std::move(p));
    }
    int next_id = 0;
    for (const auto& jr : j.at("rows")) {
      VectorRow r;
      r.id = jr.value("id", "");
      if (r.id.empty()) r.id = "r" + std::to_string(next_id);
      ++next_id;
      if (jr.contains("in"))
        for (auto it = jr["in"].begin(); it != jr["in"].end(); ++it)
          r.inputs[it.key()] = it.value().get<uint64_t>();
      if (jr.contains("out"))
        for (auto it = jr["out"].begin(); it != jr["out"].end(); ++it)
          r.expected[it.key()] = it.value().get<uint64_t>();
      r.latency_cycles = jr.value("latency", 1);
      t.rows.push_back(std::move(r));
    }
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed vector table json: ") + e.what());
  }
  return t;
}

// Structural validation; throws naming the offending row and port.
inline bool is_verilog_identifier(std::string_view s) {
  if (s.empty()) return false;
  char c0 = s[0];
  if (!((c0 >= 'a' && c0 <= 'z') || (c0 >= 'A' && c0 <= 'Z') || c0 == '_')) return false;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '$';
    if (!ok) return false;
  }
  return true;
}

inline void validate(const VectorTable& t) {
  if (t.module_name.empty()) throw Error("vector table: module name is empty");
  if (!is_verilog_identifier(t.module_name))
    throw Error("vector table: module name '" + t.module_name +
                "' is not a plain identifier");
  if (t.ports.empty()) throw Error("vector table: no ports");
  std::map<std::string, const PortSpec*> by_name;
  int data_in = 0, outs = 0;
  for (const auto& p : t.ports) {
    if (p.name.empty()) throw Error("vector table: unnamed port");
    if (!is_verilog_identifier(p.name))
      throw Error("vector table: port name '" + p.name + "' is not a plain identifier");
    if (!by_name.emplace(p.name, &p).second)
      throw Error("vector table: duplicate port '" + p.name + "'");
    if (p.width < 1 || p.width > 64)
      throw Error("vector table: port '" + p.name + "' width " +
                  std::to_string(p.width) + " outside 1..64");
    if (p.is_input && p.role == PortRole::Data) ++data_in;
    if (!p.is_input) ++outs;
    if (!p.is_input && p.role != PortRole::Data)
      throw Error("vector table: port '" + p.name + "' is an output with a driver role");
  }
  if (data_in == 0) throw Error("vector table: no data input ports");
  if (outs == 0) throw Error("vector table: no output ports");
  if (t.rows.empty()) throw Error("vector table: no rows");
  std::map<std::string, int> seen_ids;
  for (const auto& r : t.rows) {
    if (r.id.empty()) throw Error("vector table: row with empty id");
    for (char c : r.id) {
      bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
      if (!ok)
        throw Error("vector table: row id '" + r.id + "' contains '" +
                    std::string(1, c) + "'; use letters, digits, '_', '-', '.'");
    }
    if (++seen_ids[r.id] > 1) throw Error("vector table: duplicate row id '" + r.id + "'");
    if (r.latency_cycles < 0)
      throw Error("vector table: row '" + r.id + "' has negative latency");
    for (const auto& [name, value] : r.inputs) {
      auto it = by_name.find(name);
      if (it == by_name.end() || !it->second->is_input)
        throw Error("vector table: row '" + r.id + "' drives unknown input '" + name + "'");
      if (it->second->role != PortRole::Data)
        throw Error("vector table: row '" + r.id + "' drives clock/reset port '" + name + "'");
      if (value & ~width_mask(it->second->width))
        throw Error("vector table: row '" + r.id + "' value for '" + name +
                    "' exceeds " + std::to_string(it->second->width) + " bits");
    }
    for (const auto& p : t.ports) {
      if (!p.is_input || p.role != PortRole::Data) continue;
      if (!r.inputs.count(p.name))
        throw Error("vector table: row '" + r.id + "' missing input '" + p.name + "'");
    }
    for (const auto& [name, value] : r.expected) {
      auto it = by_name.find(name);
      if (it == by_name.end() || it->second->is_input)
        throw Error("vector table: row '" + r.id + "' expects unknown output '" + name + "'");
      if (value & ~width_mask(it->second->width))
        throw Error("vector table: row '" + r.id + "' expectation for '" + name +
                    "' exceeds " + std::to_string(it->second->width) + " bits");
    }
    for (const auto& p : t.ports) {
      if (p.is_input) continue;
      if (!r.expected.count(p.name))
        throw Error("vector table: row '" + r.id + "' missing expectation for '" +
                    p.name + "'");
    }
  }
}

inline constexpr std::string_view kIfaceTag = "// MEIC_IFACE ";
inline constexpr std::string_view kVectorTag = "// MEIC_VECTOR ";

// Reads the table a generated testbench carries as comment annotations.
inline std::optional<VectorTable> parse_vector_annotations(std::string_view testbench) {
  std::optional<VectorTable> table;
  std::vector<VectorRow> rows;
  int next_id = 0;
  for (const std::string& raw : split_lines(testbench)) {
    std::string line = trim(raw);
    try {
      if (starts_with(line, kIfaceTag)) {
        Json j = Json::parse(line.substr(kIfaceTag.size()));
        VectorTable t;
        t.module_name = j.at("module").get<std::string>();
        Json full;
        full["module"] = j.at("module");
        full["ports"] = j.at("ports");
        full["rows"] = Json::array();
        table = vector_table_from_json(full);
      } else if (starts_with(line, kVectorTag)) {
        Json j = Json::parse(line.substr(kVectorTag.size()));
        Json wrap;
        wrap["module"] = "x";
        wrap["ports"] = Json::array();
        wrap["rows"] = Json::array({j});
        VectorTable t = vector_table_from_json(wrap);
        VectorRow r = t.rows.at(0);
        // keep explicit ids; number id-less rows in file order
        if (!j.contains("id")) r.id = "r" + std::to_string(next_id);
        ++next_id;
        rows.push_back(std::move(r));
      }
    } catch (const Json::exception& e) {
      throw Error(std::string("bad vector annotation: ") + e.what() + " in line: " + line);
    }
  }
  if (!table) return std::nullopt;
  table->rows = std::move(rows);
  return table;
}

}  // namespace meic::tool
