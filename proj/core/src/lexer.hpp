#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fsj/ast.hpp"

namespace fsj::detail {

enum class TokenKind { Ident, Keyword, Punct, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    SourceSpan span;
};

/// Splits source text into tokens. `//` and `/* */` comments are skipped.
/// Throws ParseError on characters outside the grammar.
std::vector<Token> tokenize(std::string_view text);

std::string describe(const Token& tok);

}  // namespace fsj::detail
