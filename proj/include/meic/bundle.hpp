#pragma once

// The unit of work the rest of the framework operates on: a natural-language
// spec, one Verilog source file, and a self-checking testbench.

#include <string>

#include "meic/common.hpp"

namespace meic {

struct DesignBundle {
  std::string spec_text;
  std::string rtl_source;
  std::string testbench_source;
};

enum class ModuleType { Arithmetic, Logic };

inline std::string to_string(ModuleType t) {
  return t == ModuleType::Arithmetic ? "arithmetic" : "logic";
}

inline ModuleType module_type_from_string(const std::string& s) {
  if (s == "arithmetic") return ModuleType::Arithmetic;
  if (s == "logic") return ModuleType::Logic;
  throw Error("unknown module type: '" + s + "' (expected arithmetic|logic)");
}

struct DesignMeta {
  std::string design_id;
  ModuleType module_type = ModuleType::Logic;
};

}  // namespace meic
