#pragma once

// Verilog numeric literal parsing shared by the structure scanner, the rule
// checker and the expression evaluator. Values are carried in 64 bits.

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

namespace meic::rtl {

struct Literal {
  uint64_t value = 0;
  int width = 32;       // declared size, or 32 for unsized
  bool sized = false;   // had an explicit size prefix
  bool has_xz = false;  // contained x/z/? digits (value bits read as 0)
};

// Parses the text of a Number token: 42, 8'hFF, 2'b10, 'd9, 4'sb1010.
// Returns nullopt for reals and malformed text.
inline std::optional<Literal> parse_literal(std::string_view text) {
  Literal lit;
  std::string digits;
  size_t i = 0;
  while (i < text.size() &&
         ((text[i] >= '0' && text[i] <= '9') || text[i] == '_')) {
    if (text[i] != '_') digits += text[i];
    ++i;
  }
  if (i == text.size()) {
    if (digits.empty()) return std::nullopt;
    lit.value = std::strtoull(digits.c_str(), nullptr, 10);
    lit.width = 32;
    lit.sized = false;
    return lit;
  }
  if (text[i] != '\'') return std::nullopt;  // real or exponent form
  ++i;
  if (i < text.size() && (text[i] == 's' || text[i] == 'S')) ++i;
  if (i >= text.size()) return std::nullopt;
  int base = 0;
  switch (text[i]) {
    case 'd': case 'D': base = 10; break;
    case 'b': case 'B': base = 2; break;
    case 'o': case 'O': base = 8; break;
    case 'h': case 'H': base = 16; break;
    default: return std::nullopt;
  }
  ++i;
  if (!digits.empty()) {
    lit.width = static_cast<int>(std::strtoull(digits.c_str(), nullptr, 10));
    if (lit.width <= 0) return std::nullopt;
    if (lit.width > 64) lit.width = 64;
    lit.sized = true;
  } else {
    lit.width = 32;
    lit.sized = false;
  }
  uint64_t value = 0;
  bool any = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c == '_') continue;
    if (c == 'x' || c == 'X' || c == 'z' || c == 'Z' || c == '?') {
      lit.has_xz = true;
      value *= static_cast<uint64_t>(base);
      any = true;
      continue;
    }
    int digit = -1;
    if (c >= '0' && c <= '9') digit = c - '0';
    else if (c >= 'a' && c <= 'f') digit = 10 + (c - 'a');
    else if (c >= 'A' && c <= 'F') digit = 10 + (c - 'A');
    else return std::nullopt;
    if (digit >= base) return std::nullopt;
    value = value * static_cast<uint64_t>(base) + static_cast<uint64_t>(digit);
    any = true;
  }
  if (!any) return std::nullopt;
  if (lit.sized && lit.width < 64) value &= (1ULL << lit.width) - 1ULL;
  lit.value = value;
  return lit;
}

}  // namespace meic::rtl
