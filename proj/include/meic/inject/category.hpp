#pragma once

// The error taxonomy: 18 categories of common Verilog bugs, split into 9
// syntax categories (caught at compile time) and 9 function categories
// (compile fine, simulate wrong). Each category carries a canonical
// before/after example pair that pins down exactly what the injector is
// supposed to do to a matching construct.

#include <string>
#include <string_view>
#include <vector>

#include "meic/common.hpp"

namespace meic::inject {

enum class ErrorCategory {
  // syntax
  PrematureTermination,
  UndefinedVariable,
  OperatorMisuse,
  RedundantVariableDeclaration,
  IncorrectEncoding,
  IncorrectDataTypeAssignment,
  PortModeDeclarationError,
  DataIndexOutOfBounds,
  ImproperKeywordUse,
  // function
  InsufficientBitWidth,
  IncompletePortConnection,
  FlawedSensitivityList,
  MisuseOfAssignments,
  LogicalErrorInExpression,
  ConcurrentVariableUse,
  MismatchedAssignmentValues,
  IncorrectModuleInstantiation,
  InfiniteLoopConstruct,
};

enum class ErrorKind { Syntax, Function };

inline ErrorKind kind_of(ErrorCategory c) {
  return static_cast<int>(c) < static_cast<int>(ErrorCategory::InsufficientBitWidth)
             ? ErrorKind::Syntax
             : ErrorKind::Function;
}

inline std::string to_string(ErrorKind k) {
  return k == ErrorKind::Syntax ? "syntax" : "function";
}

inline ErrorKind kind_from_string(const std::string& s) {
  if (s == "syntax") return ErrorKind::Syntax;
  if (s == "function") return ErrorKind::Function;
  throw Error("unknown error kind: '" + s + "'");
}

inline const std::vector<ErrorCategory>& all_categories() {
  static const std::vector<ErrorCategory> cats = {
      ErrorCategory::PrematureTermination,
      ErrorCategory::UndefinedVariable,
      ErrorCategory::OperatorMisuse,
      ErrorCategory::RedundantVariableDeclaration,
      ErrorCategory::IncorrectEncoding,
      ErrorCategory::IncorrectDataTypeAssignment,
      ErrorCategory::PortModeDeclarationError,
      ErrorCategory::DataIndexOutOfBounds,
      ErrorCategory::ImproperKeywordUse,
      ErrorCategory::InsufficientBitWidth,
      ErrorCategory::IncompletePortConnection,
      ErrorCategory::FlawedSensitivityList,
      ErrorCategory::MisuseOfAssignments,
      ErrorCategory::LogicalErrorInExpression,
      ErrorCategory::ConcurrentVariableUse,
      ErrorCategory::MismatchedAssignmentValues,
      ErrorCategory::IncorrectModuleInstantiation,
      ErrorCategory::InfiniteLoopConstruct,
  };
  return cats;
}

inline std::string to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::PrematureTermination: return "premature-termination";
    case ErrorCategory::UndefinedVariable: return "undefined-variable";
    case ErrorCategory::OperatorMisuse: return "operator-misuse";
    case ErrorCategory::RedundantVariableDeclaration: return "redundant-variable-declaration";
    case ErrorCategory::IncorrectEncoding: return "incorrect-encoding";
    case ErrorCategory::IncorrectDataTypeAssignment: return "incorrect-data-type-assignment";
    case ErrorCategory::PortModeDeclarationError: return "port-mode-declaration-error";
    case ErrorCategory::DataIndexOutOfBounds: return "data-index-out-of-bounds";
    case ErrorCategory::ImproperKeywordUse: return "improper-keyword-use";
    case ErrorCategory::InsufficientBitWidth: return "insufficient-bit-width";
    case ErrorCategory::IncompletePortConnection: return "incomplete-port-connection";
    case ErrorCategory::FlawedSensitivityList: return "flawed-sensitivity-list";
    case ErrorCategory::MisuseOfAssignments: return "misuse-of-assignments";
    case ErrorCategory::LogicalErrorInExpression: return "logical-error-in-expression";
    case ErrorCategory::ConcurrentVariableUse: return "concurrent-variable-use";
    case ErrorCategory::MismatchedAssignmentValues: return "mismatched-assignment-values";
    case ErrorCategory::IncorrectModuleInstantiation: return "incorrect-module-instantiation";
    case ErrorCategory::InfiniteLoopConstruct: return "infinite-loop-construct";
  }
  throw Error("invalid error category value");
}

// Human-facing name, used in prompts and report tables.
inline std::string title_of(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::PrematureTermination: return "Premature Termination";
    case ErrorCategory::UndefinedVariable: return "Undefined Variable";
    case ErrorCategory::OperatorMisuse: return "Operator Misuse";
    case ErrorCategory::RedundantVariableDeclaration: return "Redundant Variable Declaration";
    case ErrorCategory::IncorrectEncoding: return "Incorrect Encoding";
    case ErrorCategory::IncorrectDataTypeAssignment: return "Incorrect Data Type Assignment";
    case ErrorCategory::PortModeDeclarationError: return "Port Mode Declaration Error";
    case ErrorCategory::DataIndexOutOfBounds: return "Data Index Out of Bounds";
    case ErrorCategory::ImproperKeywordUse: return "Improper Keyword Use";
    case ErrorCategory::InsufficientBitWidth: return "Insufficient Bit Width";
    case ErrorCategory::IncompletePortConnection: return "Incomplete Port Connection";
    case ErrorCategory::FlawedSensitivityList: return "Flawed Sensitivity List";
    case ErrorCategory::MisuseOfAssignments: return "Misuse of Assignments";
    case ErrorCategory::LogicalErrorInExpression: return "Logical Error in Expression";
    case ErrorCategory::ConcurrentVariableUse: return "Concurrent Variable Use";
    case ErrorCategory::MismatchedAssignmentValues: return "Mismatched Assignment Values";
    case ErrorCategory::IncorrectModuleInstantiation: return "Incorrect Module Instantiation";
    case ErrorCategory::InfiniteLoopConstruct: return "Infinite Loop Construct";
  }
  throw Error("invalid error category value");
}

inline ErrorCategory category_from_string(const std::string& s) {
  for (ErrorCategory c : all_categories()) {
    if (to_string(c) == s) return c;
  }
  throw Error("unknown error category: '" + s + "'");
}

// One canonical example per category: a correct snippet and the same snippet
// with the category's bug applied. The injector is required to reproduce the
// buggy form (up to whitespace) when pointed at the correct form, which keeps
// every mutation rule honest about what it claims to generate.
struct CategoryExample {
  ErrorCategory category;
  std::string correct_form;
  std::string buggy_form;
};

inline const std::vector<CategoryExample>& category_examples() {
  static const std::vector<CategoryExample> rows = {
      {ErrorCategory::PrematureTermination,
       "module A(input a, output b);",
       "module A(input a, output b)"},
      {ErrorCategory::UndefinedVariable,
       "assign result = temp;",
       "assign resutl = temp;"},
      {ErrorCategory::OperatorMisuse,
       "if (a == 2'b10)\nbegin b <= 1'b1; end",
       "if (a = 2'b10)\nbegin b <= 1'b1; end"},
      {ErrorCategory::RedundantVariableDeclaration,
       "module A(input a, output b);\nreg a_temp;",
       "module A(input a, output b);\nreg a;"},
      {ErrorCategory::IncorrectEncoding,
       "module A(input a, output b);",
       "module A(input \xC3\xA2, output b);"},
      {ErrorCategory::IncorrectDataTypeAssignment,
       "reg a;\nalways @(*) begin a = b; end",
       "reg a;\nassign a = b;"},
      {ErrorCategory::PortModeDeclarationError,
       "module A(a, b);\ninput a;\noutput b;",
       "module A(a, b);\ninput a;\n//Declaration for b is missing."},
      {ErrorCategory::DataIndexOutOfBounds,
       "reg [32:1]a;\nassign b = a[16:1];",
       "reg [32:1]a;\nassign b = a[15:0];"},
      {ErrorCategory::ImproperKeywordUse,
       "reg alway;",
       "reg always;"},
      {ErrorCategory::InsufficientBitWidth,
       "wire [3:0] a;\nassign a = 4'b1000;",
       "wire [3:1] a;\nassign a = 4'b1000;"},
      {ErrorCategory::IncompletePortConnection,
       "mod md(.a(a), .b(b));",
       "mod md(.a(a), .b());"},
      {ErrorCategory::FlawedSensitivityList,
       "always @(posedge clk or negedge rst_n)\nbegin a <= b + c; end",
       "always @(posedge clk or posedge rst_n)\nbegin a <= b + c; end"},
      {ErrorCategory::MisuseOfAssignments,
       "always @(posedge clk or negedge rst_n)\nbegin a <= b + c; end",
       "always @(posedge clk or negedge rst_n)\nbegin a = b + c; end"},
      {ErrorCategory::LogicalErrorInExpression,
       "assign a = b + c;",
       "assign a = b & c;"},
      {ErrorCategory::ConcurrentVariableUse,
       "always @(*) begin a=1'b1; end",
       "always @(*) begin a=1'b1; end\nalways @(*) begin a=1'b0; end"},
      {ErrorCategory::MismatchedAssignmentValues,
       "if (a == 2'b10)\nbegin b <= 1'b1; end",
       "if (a == 10)\nbegin b <= 1'b1; end"},
      {ErrorCategory::IncorrectModuleInstantiation,
       "mod md(.a(a), .b(b));",
       "mdo md(.a(a), .b(b));"},
      {ErrorCategory::InfiniteLoopConstruct,
       "next_stage <= next_stage_temp;",
       "next_stage <= current_stage;"},
  };
  return rows;
}

inline const CategoryExample& example_for(ErrorCategory c) {
  for (const CategoryExample& e : category_examples()) {
    if (e.category == c) return e;
  }
  throw Error("no example recorded for category " + to_string(c));
}

// Collapses every whitespace run to a single space and trims the ends, so
// example comparisons ignore layout but nothing else.
inline std::string normalize_space(std::string_view s) {
  std::string out;
  bool in_ws = false;
  for (char ch : s) {
    bool ws = ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r';
    if (ws) {
      in_ws = true;
      continue;
    }
    if (in_ws && !out.empty()) out += ' ';
    in_ws = false;
    out += ch;
  }
  return out;
}

inline bool same_modulo_space(std::string_view a, std::string_view b) {
  return normalize_space(a) == normalize_space(b);
}

}  // namespace meic::inject
