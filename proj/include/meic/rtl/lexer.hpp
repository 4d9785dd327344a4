#pragma once

// Lossless Verilog-2001 lexer. Concatenating the text of every token (in
// order) reproduces the input byte for byte; whitespace and comments are
// tokens, not gaps. Bytes outside 7-bit ASCII are preserved verbatim and the
// containing token is flagged `non_ansi` so downstream checks can report them
// without destroying the original text.

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace meic::rtl {

enum class TokenKind {
  Keyword,
  Identifier,
  Number,
  Operator,
  Punct,
  String,
  Comment,
  Whitespace,
  Other,
};

inline const char* kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Number: return "number";
    case TokenKind::Operator: return "operator";
    case TokenKind::Punct: return "punctuation";
    case TokenKind::String: return "string";
    case TokenKind::Comment: return "comment";
    case TokenKind::Whitespace: return "whitespace";
    case TokenKind::Other: return "other";
  }
  return "?";
}

struct Token {
  TokenKind kind = TokenKind::Other;
  std::string text;
  int line = 1;        // 1-based line of the first byte
  int column = 1;      // 1-based byte column of the first byte
  size_t offset = 0;   // byte offset of the first byte in the source
  bool non_ansi = false;
};

inline const std::unordered_set<std::string>& keywords() {
  static const std::unordered_set<std::string> kw = {
      "always", "and", "assign", "automatic", "begin", "buf", "bufif0", "bufif1",
      "case", "casex", "casez", "cell", "cmos", "config", "deassign", "default",
      "defparam", "design", "disable", "edge", "else", "end", "endcase",
      "endconfig", "endfunction", "endgenerate", "endmodule", "endprimitive",
      "endspecify", "endtable", "endtask", "event", "for", "force", "forever",
      "fork", "function", "generate", "genvar", "highz0", "highz1", "if",
      "ifnone", "incdir", "include", "initial", "inout", "input", "instance",
      "integer", "join", "large", "liblist", "library", "localparam",
      "macromodule", "medium", "module", "nand", "negedge", "nmos", "nor",
      "noshowcancelled", "not", "notif0", "notif1", "or", "output", "parameter",
      "pmos", "posedge", "primitive", "pull0", "pull1", "pulldown", "pullup",
      "pulsestyle_ondetect", "pulsestyle_onevent", "rcmos", "real", "realtime",
      "reg", "release", "repeat", "rnmos", "rpmos", "rtran", "rtranif0",
      "rtranif1", "scalared", "showcancelled", "signed", "small", "specify",
      "specparam", "strong0", "strong1", "supply0", "supply1", "table", "task",
      "time", "tran", "tranif0", "tranif1", "tri", "tri0", "tri1", "triand",
      "trior", "trireg", "unsigned", "use", "vectored", "wait", "wand", "weak0",
      "weak1", "while", "wire", "wor", "xnor", "xor",
  };
  return kw;
}

inline bool is_keyword(std::string_view s) {
  return keywords().count(std::string(s)) != 0;
}

namespace detail {

inline bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
inline bool is_digit_byte(unsigned char c) { return c >= '0' && c <= '9'; }
inline bool is_ident_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}
inline bool is_ident_char(unsigned char c) {
  return is_ident_start(c) || is_digit_byte(c) || c == '$';
}
inline bool is_base_letter(unsigned char c) {
  return c == 'd' || c == 'D' || c == 'b' || c == 'B' || c == 'o' || c == 'O' ||
         c == 'h' || c == 'H';
}
inline bool is_value_char(unsigned char c) {
  return is_digit_byte(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F') ||
         c == 'x' || c == 'X' || c == 'z' || c == 'Z' || c == '?' || c == '_';
}
// True when s[i] begins a based-literal tail: ' [sS]? [dbohDBOH]
inline bool at_based_tail(std::string_view s, size_t i) {
  if (i >= s.size() || s[i] != '\'') return false;
  size_t k = i + 1;
  if (k < s.size() && (s[k] == 's' || s[k] == 'S')) ++k;
  return k < s.size() && is_base_letter(static_cast<unsigned char>(s[k]));
}

inline const std::vector<std::string>& multi_char_operators() {
  static const std::vector<std::string> ops = {
      "<<<", ">>>", "===", "!==",
      "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "**",
      "~&", "~|", "~^", "^~", "->", "+:", "-:",
  };
  return ops;
}

inline bool is_single_operator(char c) {
  switch (c) {
    case '+': case '-': case '*': case '/': case '%':
    case '&': case '|': case '^': case '~': case '!':
    case '<': case '>': case '=': case '?':
      return true;
    default:
      return false;
  }
}

inline bool is_punct(char c) {
  switch (c) {
    case '(': case ')': case '[': case ']': case '{': case '}':
    case ';': case ',': case '.': case ':': case '#': case '@':
      return true;
    default:
      return false;
  }
}

}  // namespace detail

inline std::vector<Token> tokenize(std::string_view src) {
  using namespace detail;
  std::vector<Token> tokens;
  size_t i = 0;
  int line = 1, column = 1;

  auto emit = [&](TokenKind kind, size_t begin, size_t end) {
    Token t;
    t.kind = kind;
    t.text.assign(src.substr(begin, end - begin));
    t.line = line;
    t.column = column;
    t.offset = begin;
    for (char c : t.text) {
      if (static_cast<unsigned char>(c) >= 0x80) t.non_ansi = true;
      if (c == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    tokens.push_back(std::move(t));
  };

  while (i < src.size()) {
    unsigned char c = static_cast<unsigned char>(src[i]);

    if (is_space_byte(c)) {
      size_t j = i;
      while (j < src.size() && is_space_byte(static_cast<unsigned char>(src[j]))) ++j;
      emit(TokenKind::Whitespace, i, j);
      i = j;
      continue;
    }

    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      size_t j = i;
      while (j < src.size() && src[j] != '\n') ++j;
      emit(TokenKind::Comment, i, j);
      i = j;
      continue;
    }

    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      size_t j = src.find("*/", i + 2);
      j = (j == std::string_view::npos) ? src.size() : j + 2;
      emit(TokenKind::Comment, i, j);
      i = j;
      continue;
    }

    if (c == '"') {
      size_t j = i + 1;
      while (j < src.size() && src[j] != '"' && src[j] != '\n') {
        if (src[j] == '\\' && j + 1 < src.size()) ++j;
        ++j;
      }
      if (j < src.size() && src[j] == '"') ++j;
      emit(TokenKind::String, i, j);
      i = j;
      continue;
    }

    if (is_digit_byte(c) || at_based_tail(src, i)) {
      size_t j = i;
      while (j < src.size() && (is_digit_byte(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      if (at_based_tail(src, j)) {
        ++j;  // '
        if (j < src.size() && (src[j] == 's' || src[j] == 'S')) ++j;
        ++j;  // base letter
        while (j < src.size() && is_value_char(static_cast<unsigned char>(src[j]))) ++j;
      } else {
        if (j + 1 < src.size() && src[j] == '.' &&
            is_digit_byte(static_cast<unsigned char>(src[j + 1]))) {
          ++j;
          while (j < src.size() && (is_digit_byte(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
        }
        if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
          size_t k = j + 1;
          if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
          if (k < src.size() && is_digit_byte(static_cast<unsigned char>(src[k]))) {
            j = k;
            while (j < src.size() && (is_digit_byte(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
          }
        }
      }
      emit(TokenKind::Number, i, j);
      i = j;
      continue;
    }

    if (is_ident_start(c) || c == '$') {
      size_t j = i + (c == '$' ? 1 : 0);
      if (c == '$' && (j >= src.size() || !is_ident_start(static_cast<unsigned char>(src[j])))) {
        emit(TokenKind::Other, i, i + 1);
        i += 1;
        continue;
      }
      while (j < src.size() && is_ident_char(static_cast<unsigned char>(src[j]))) ++j;
      std::string_view text = src.substr(i, j - i);
      TokenKind kind = (c != '$' && is_keyword(text)) ? TokenKind::Keyword : TokenKind::Identifier;
      emit(kind, i, j);
      i = j;
      continue;
    }

    if (c == '\\') {  // escaped identifier: backslash up to next whitespace
      size_t j = i + 1;
      while (j < src.size() && !is_space_byte(static_cast<unsigned char>(src[j]))) ++j;
      emit(j > i + 1 ? TokenKind::Identifier : TokenKind::Other, i, j > i + 1 ? j : i + 1);
      i = (j > i + 1) ? j : i + 1;
      continue;
    }

    if (c == '`') {  // compiler directive name
      size_t j = i + 1;
      while (j < src.size() && is_ident_char(static_cast<unsigned char>(src[j]))) ++j;
      emit(TokenKind::Other, i, j);
      i = j;
      continue;
    }

    {
      bool matched = false;
      for (const std::string& op : multi_char_operators()) {
        if (src.substr(i, op.size()) == op) {
          emit(TokenKind::Operator, i, i + op.size());
          i += op.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }

    if (is_single_operator(static_cast<char>(c))) {
      emit(TokenKind::Operator, i, i + 1);
      ++i;
      continue;
    }

    if (is_punct(static_cast<char>(c))) {
      emit(TokenKind::Punct, i, i + 1);
      ++i;
      continue;
    }

    emit(TokenKind::Other, i, i + 1);
    ++i;
  }

  return tokens;
}

inline std::string join_tokens(const std::vector<Token>& tokens) {
  std::string out;
  for (const Token& t : tokens) out += t.text;
  return out;
}

// True when the token participates in syntax (not whitespace or comment).
inline bool is_significant(const Token& t) {
  return t.kind != TokenKind::Whitespace && t.kind != TokenKind::Comment;
}

}  // namespace meic::rtl
