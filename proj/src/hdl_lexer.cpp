// SPDX-License-Identifier: Apache-2.0
#include "srr/hdl_lexer.hpp"

#include <algorithm>
#include <iterator>

namespace srr {

namespace {

// IEEE 1364-2005 reserved words, sorted for binary search.
constexpr std::string_view kKeywords[] = {
    "always", "and", "assign", "automatic", "begin", "buf", "bufif0", "bufif1", "case", "casex",
    "casez", "cell", "cmos", "config", "deassign", "default", "defparam", "design", "disable",
    "edge", "else", "end", "endcase", "endconfig", "endfunction", "endgenerate", "endmodule",
    "endprimitive", "endspecify", "endtable", "endtask", "event", "for", "force", "forever",
    "fork", "function", "generate", "genvar", "highz0", "highz1", "if", "ifnone", "incdir",
    "include", "initial", "inout", "input", "instance", "integer", "join", "large", "liblist",
    "library", "localparam", "macromodule", "medium", "module", "nand", "negedge", "nmos", "nor",
    "noshowcancelled", "not", "notif0", "notif1", "or", "output", "parameter", "pmos", "posedge",
    "primitive", "pull0", "pull1", "pulldown", "pullup", "pulsestyle_ondetect",
    "pulsestyle_onevent", "rcmos", "real", "realtime", "reg", "release", "repeat", "rnmos",
    "rpmos", "rtran", "rtranif0", "rtranif1", "scalared", "showcancelled", "signed", "small",
    "specify", "specparam", "strong0", "strong1", "supply0", "supply1", "table", "task", "time",
    "tran", "tranif0", "tranif1", "tri", "tri0", "tri1", "triand", "trior", "trireg", "unsigned",
    "use", "uwire", "vectored", "wait", "wand", "weak0", "weak1", "while", "wire", "wor", "xnor",
    "xor"};

// Longest first so greedy matching picks e.g. "<<<" over "<<".
constexpr std::string_view kMultiCharOperators[] = {
    "<<<", ">>>", "===", "!==", "<<", ">>", "<=", ">=", "==", "!=", "&&",
    "||",  "**",  "~&",  "~|",  "~^", "^~", "->", "+:", "-:", "@*", "##"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ident_start(char c) { return is_alpha(c) || c == '_'; }
bool is_ident_char(char c) { return is_alpha(c) || is_digit(c) || c == '_' || c == '$'; }
bool is_base_char(char c) {
  switch (c) {
    case 'b': case 'B': case 'o': case 'O': case 'd': case 'D': case 'h': case 'H': return true;
    default: return false;
  }
}
bool is_based_digit(char c) {
  return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F') || c == 'x' || c == 'X' ||
         c == 'z' || c == 'Z' || c == '?' || c == '_';
}

class Scanner {
 public:
  explicit Scanner(std::string_view src) : src_(src) {}

  TokenizeResult run() {
    TokenizeResult result;
    while (pos_ < src_.size()) {
      const std::size_t start = pos_;
      const int line = line_, column = column_;
      TokenKind kind = scan_one(result);
      advance_to(start);
      result.tokens.push_back(HdlToken{kind, std::string(src_.substr(start, end_ - start)), line, column});
      pos_ = end_;
    }
    return result;
  }

 private:
  char peek(std::size_t off = 0) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }

  // Moves line/column from `start` to end_.
  void advance_to(std::size_t start) {
    for (std::size_t i = start; i < end_; ++i) {
      if (src_[i] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
    }
  }

  TokenKind scan_one(TokenizeResult& result) {
    std::size_t p = pos_;
    const char c = src_[p];

    if (is_space(c)) {
      while (p < src_.size() && is_space(src_[p])) ++p;
      end_ = p;
      return TokenKind::kWhitespace;
    }
    if (c == '/' && peek(1) == '/') {
      while (p < src_.size() && src_[p] != '\n') ++p;
      end_ = p;
      return TokenKind::kComment;
    }
    if (c == '/' && peek(1) == '*') {
      auto close = src_.find("*/", p + 2);
      if (close == std::string_view::npos) {
        flag(result, "unterminated block comment");
        end_ = src_.size();
      } else {
        end_ = close + 2;
      }
      return TokenKind::kComment;
    }
    if (c == '"') {
      ++p;
      while (p < src_.size()) {
        if (src_[p] == '\\' && p + 1 < src_.size()) {
          p += 2;
          continue;
        }
        if (src_[p] == '"' || src_[p] == '\n') break;
        ++p;
      }
      if (p < src_.size() && src_[p] == '"') {
        end_ = p + 1;
      } else {
        flag(result, "unterminated string literal");
        end_ = src_.size();
      }
      return TokenKind::kStringLiteral;
    }
    if (is_ident_start(c) || (c == '$' && is_ident_char(peek(1)))) {
      ++p;
      while (p < src_.size() && is_ident_char(src_[p])) ++p;
      end_ = p;
      return is_verilog_keyword(src_.substr(pos_, p - pos_)) ? TokenKind::kKeyword : TokenKind::kIdentifier;
    }
    if (c == '\\') {
      ++p;
      while (p < src_.size() && !is_space(src_[p])) ++p;
      if (p == pos_ + 1) {  // lone backslash
        end_ = p;
        return TokenKind::kOperator;
      }
      end_ = p;
      return TokenKind::kIdentifier;
    }
    if (is_digit(c)) {
      while (p < src_.size() && (is_digit(src_[p]) || src_[p] == '_')) ++p;
      if (p < src_.size() && src_[p] == '\'') {
        if (std::size_t q = scan_base(p); q != p) {
          end_ = q;
          return TokenKind::kNumber;
        }
      }
      // Real literal: fraction and/or exponent.
      if (p + 1 < src_.size() && src_[p] == '.' && is_digit(src_[p + 1])) {
        ++p;
        while (p < src_.size() && (is_digit(src_[p]) || src_[p] == '_')) ++p;
      }
      if (p < src_.size() && (src_[p] == 'e' || src_[p] == 'E')) {
        std::size_t q = p + 1;
        if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
        if (q < src_.size() && is_digit(src_[q])) {
          while (q < src_.size() && (is_digit(src_[q]) || src_[q] == '_')) ++q;
          p = q;
        }
      }
      end_ = p;
      return TokenKind::kNumber;
    }
    if (c == '\'') {
      if (std::size_t q = scan_base(p); q != p) {
        end_ = q;
        return TokenKind::kNumber;
      }
    }
    for (auto op : kMultiCharOperators) {
      if (src_.substr(p, op.size()) == op) {
        end_ = p + op.size();
        return TokenKind::kOperator;
      }
    }
    if (static_cast<unsigned char>(c) >= 0x80) {
      // Keep a run of non-ASCII bytes together so UTF-8 sequences are never split.
      while (p < src_.size() && static_cast<unsigned char>(src_[p]) >= 0x80) ++p;
      end_ = p;
      return TokenKind::kOperator;
    }
    end_ = p + 1;
    return TokenKind::kOperator;
  }

  // `p` points at an apostrophe. Returns the end of a based literal, or `p`
  // if what follows is not one.
  std::size_t scan_base(std::size_t p) const {
    std::size_t q = p + 1;
    if (q < src_.size() && (src_[q] == 's' || src_[q] == 'S')) ++q;
    if (q >= src_.size() || !is_base_char(src_[q])) return p;
    ++q;
    const std::size_t digits = q;
    while (q < src_.size() && is_based_digit(src_[q])) ++q;
    return q == digits ? p : q;
  }

  void flag(TokenizeResult& result, const char* message) {
    if (!result.error) result.error = UnterminatedConstruct{message, line_, column_};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
  int line_ = 1;
  int column_ = 1;
};

}  // namespace

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::kIdentifier: return "identifier";
    case TokenKind::kKeyword: return "keyword";
    case TokenKind::kNumber: return "number";
    case TokenKind::kOperator: return "operator";
    case TokenKind::kStringLiteral: return "string_literal";
    case TokenKind::kComment: return "comment";
    case TokenKind::kWhitespace: return "whitespace";
  }
  return "operator";
}

std::string UnterminatedConstruct::message() const {
  return what + " at line " + std::to_string(line) + ", column " + std::to_string(column);
}

bool is_verilog_keyword(std::string_view word) {
  return std::binary_search(std::begin(kKeywords), std::end(kKeywords), word);
}

TokenizeResult tokenize(std::string_view source) { return Scanner(source).run(); }

}  // namespace srr
