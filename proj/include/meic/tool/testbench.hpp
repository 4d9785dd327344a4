#pragma once

// Self-checking testbench generation. The bench drives each vector row,
// compares outputs, and reports through a fixed line protocol:
//
//   MEIC_CHECK <row-id> PASS|FAIL got=<hex> exp=<hex>
//   MEIC_SUMMARY pass=<p> fail=<f>
//
// The table itself rides along as comment annotations (MEIC_IFACE /
// MEIC_VECTOR) so a bench file alone is enough to re-derive its vectors.

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "meic/common.hpp"
#include "meic/rtl/structure.hpp"
#include "meic/tool/vectors.hpp"

namespace meic::tool {

namespace tb_detail {

inline std::string hex_literal(int width, uint64_t value) {
  std::ostringstream os;
  os << width << "'h" << std::hex << value;
  return os.str();
}

// Builds "{sum, cout}" over the given ports, or the bare name for one port.
inline std::string concat_of(const std::vector<const PortSpec*>& ports) {
  if (ports.size() == 1) return ports[0]->name;
  std::vector<std::string> names;
  names.reserve(ports.size());
  for (const PortSpec* p : ports) names.push_back(p->name);
  return "{" + join(names, ", ") + "}";
}

inline uint64_t concat_value(const std::vector<const PortSpec*>& ports,
                             const std::map<std::string, uint64_t>& values) {
  uint64_t acc = 0;
  for (const PortSpec* p : ports) {
    auto it = values.find(p->name);
    uint64_t v = it == values.end() ? 0 : it->second;
    acc = (acc << p->width) | (v & width_mask(p->width));
  }
  return acc;
}

inline std::string concat_literal(const std::vector<const PortSpec*>& ports,
                                  const std::map<std::string, uint64_t>& values) {
  std::vector<std::string> parts;
  parts.reserve(ports.size());
  for (const PortSpec* p : ports) {
    auto it = values.find(p->name);
    uint64_t v = it == values.end() ? 0 : it->second;
    parts.push_back(hex_literal(p->width, v & width_mask(p->width)));
  }
  if (parts.size() == 1) return parts[0];
  return "{" + join(parts, ", ") + "}";
}

// Zero-padded lowercase hex, one digit per started nibble, matching what
// $display("%h") prints for a vector of the same width.
inline std::string padded_hex(uint64_t value, int width_bits) {
  int digits = (width_bits + 3) / 4;
  if (digits < 1) digits = 1;
  static const char* kHex = "0123456789abcdef";
  std::string s(static_cast<size_t>(digits), '0');
  for (int i = digits - 1; i >= 0 && value; --i) {
    s[static_cast<size_t>(i)] = kHex[value & 0xF];
    value >>= 4;
  }
  return s;
}

}  // namespace tb_detail

// Builds a self-checking bench for the table. The bench module is always
// named `meic_tb` so simulator command lines stay uniform. Throws on an
// invalid table, naming the offending row or port.
inline std::string generate_testbench(const VectorTable& table) {
  using namespace tb_detail;
  validate(table);

  std::vector<const PortSpec*> data_in;
  std::vector<const PortSpec*> outs;
  const PortSpec* clock = nullptr;
  const PortSpec* reset = nullptr;
  for (const auto& p : table.ports) {
    if (p.is_input && p.role == PortRole::Data) data_in.push_back(&p);
    if (p.is_input && p.role == PortRole::Clock) clock = &p;
    if (p.is_input && p.role == PortRole::Reset) reset = &p;
    if (!p.is_input) outs.push_back(&p);
  }

  int out_bits = 0;
  for (const PortSpec* p : outs) out_bits += p->width;
  if (out_bits > 64)
    throw Error("testbench: combined output width " + std::to_string(out_bits) +
                " exceeds 64 bits");

  Json iface = vector_table_to_json(table);
  iface.erase("rows");

  std::ostringstream os;
  os << "// Generated check bench for module " << table.module_name << "\n";
  os << std::string(kIfaceTag) << iface.dump() << "\n";
  os << "`timescale 1ns/1ps\n\n";
  os << "module meic_tb;\n";
  for (const auto& p : table.ports) {
    const char* kw = p.is_input ? "reg" : "wire";
    os << "  " << kw;
    if (p.width > 1) os << " [" << (p.width - 1) << ":0]";
    os << " " << p.name << ";\n";
  }
  os << "  integer meic_pass;\n";
  os << "  integer meic_fail;\n\n";

  os << "  " << table.module_name << " dut (";
  for (size_t i = 0; i < table.ports.size(); ++i) {
    if (i) os << ", ";
    os << "." << table.ports[i].name << "(" << table.ports[i].name << ")";
  }
  os << ");\n\n";

  if (clock) {
    os << "  always #5 " << clock->name << " = ~" << clock->name << ";\n\n";
  }

  os << "  initial begin\n";
  os << "    meic_pass = 0;\n";
  os << "    meic_fail = 0;\n";
  if (clock) os << "    " << clock->name << " = 1'b0;\n";
  if (reset) {
    // hold reset active across the first two cycles, then release
    const char* active = reset->reset_active_low ? "1'b0" : "1'b1";
    const char* inactive = reset->reset_active_low ? "1'b1" : "1'b0";
    os << "    " << reset->name << " = " << active << ";\n";
    if (clock) {
      os << "    repeat (2) @(posedge " << clock->name << ");\n";
    } else {
      os << "    #10;\n";
    }
    os << "    " << reset->name << " = " << inactive << ";\n";
  }
  os << "\n";

  for (const VectorRow& row : table.rows) {
    Json annot = Json::object();
    annot["id"] = row.id;
    annot["in"] = Json::object();
    for (const PortSpec* p : data_in) annot["in"][p->name] = row.inputs.at(p->name);
    annot["out"] = Json::object();
    for (const PortSpec* p : outs) annot["out"][p->name] = row.expected.at(p->name);
    if (row.latency_cycles != 1) annot["latency"] = row.latency_cycles;
    os << "    " << std::string(kVectorTag) << annot.dump() << "\n";

    for (const PortSpec* p : data_in) {
      os << "    " << p->name << " = "
         << hex_literal(p->width, row.inputs.at(p->name)) << ";\n";
    }
    if (clock) {
      int cycles = row.latency_cycles > 0 ? row.latency_cycles : 1;
      os << "    repeat (" << cycles << ") @(posedge " << clock->name << ");\n";
      os << "    #1;\n";
    } else {
      os << "    #1;\n";
    }
    std::string got = concat_of(outs);
    std::string exp = concat_literal(outs, row.expected);
    os << "    if (" << got << " === " << exp << ") begin\n";
    os << "      $display(\"MEIC_CHECK " << row.id << " PASS got=%h exp=%h\", " << got
       << ", " << exp << ");\n";
    os << "      meic_pass = meic_pass + 1;\n";
    os << "    end else begin\n";
    os << "      $display(\"MEIC_CHECK " << row.id << " FAIL got=%h exp=%h\", " << got
       << ", " << exp << ");\n";
    os << "      meic_fail = meic_fail + 1;\n";
    os << "    end\n\n";
  }

  os << "    $display(\"MEIC_SUMMARY pass=%0d fail=%0d\", meic_pass, meic_fail);\n";
  os << "    $finish;\n";
  os << "  end\n";
  os << "endmodule\n";
  return os.str();
}

struct AssertionCheckpoint {
  std::string signal;     // must exist in the target source
  std::string condition;  // expression that must hold
  std::string message;    // printed as "MEIC_ASSERT <message>" on failure
};

// Drops one immediate assertion per checkpoint into the module that declares
// the checkpoint's signal. An empty checkpoint list returns the source
// unchanged; an unknown signal is an error naming it.
inline std::string instrument_assertions(std::string_view source,
                                         const std::vector<AssertionCheckpoint>& checkpoints) {
  if (checkpoints.empty()) return std::string(source);

  rtl::StructureIndex index = rtl::scan_structure(source);
  struct Insertion {
    size_t offset;  // byte offset of the module's 'endmodule'
    std::string text;
  };
  std::vector<Insertion> insertions;

  for (const auto& cp : checkpoints) {
    const rtl::ModuleInfo* home = nullptr;
    for (const auto& m : index.modules) {
      bool declares = m.find_port(cp.signal) != nullptr || m.find_decl(cp.signal) != nullptr;
      if (declares) {
        home = &m;
        break;
      }
    }
    if (!home)
      throw Error("assertion checkpoint names unknown signal '" + cp.signal + "'");

    // the module span ends after 'endmodule'; back up to its start
    std::string_view kw = "endmodule";
    size_t end = home->span.end;
    size_t insert_at = end >= kw.size() ? end - kw.size() : end;

    std::ostringstream os;
    os << "\n  // checkpoint on " << cp.signal << "\n";
    os << "  always @(*) begin\n";
    os << "    assert (" << cp.condition << ") else begin\n";
    os << "      $display(\"MEIC_ASSERT " << cp.message << "\");\n";
    os << "      $finish;\n";
    os << "    end\n";
    os << "  end\n";
    insertions.push_back({insert_at, os.str()});
  }

  // apply from the back so earlier offsets stay valid
  std::sort(insertions.begin(), insertions.end(),
            [](const Insertion& a, const Insertion& b) { return a.offset > b.offset; });
  std::string out(source);
  for (const auto& ins : insertions) {
    out.insert(ins.offset, ins.text);
  }
  return out;
}

}  // namespace meic::tool
