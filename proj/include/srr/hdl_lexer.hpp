// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace srr {

enum class TokenKind { kIdentifier, kKeyword, kNumber, kOperator, kStringLiteral, kComment, kWhitespace };

std::string_view to_string(TokenKind kind);

struct HdlToken {
  TokenKind kind;
  std::string text;
  int line;    // 1-based
  int column;  // 1-based, in bytes

  friend bool operator==(const HdlToken&, const HdlToken&) = default;
};

/// An unclosed block comment or string literal. The offending construct is
/// still emitted as the final token (running to end of input), so the token
/// stream stays lossless.
struct UnterminatedConstruct {
  std::string what;
  int line;
  int column;

  std::string message() const;
};

struct TokenizeResult {
  std::vector<HdlToken> tokens;
  std::optional<UnterminatedConstruct> error;
};

/// Verilog-2005 lexical scan. Concatenating the token texts reproduces the
/// input byte-for-byte. Preprocessor directives are not interpreted: the
/// backtick is an operator and the directive name an identifier.
TokenizeResult tokenize(std::string_view source);

bool is_verilog_keyword(std::string_view word);

}  // namespace srr
