#include "lexer.hpp"

#include <array>
#include <cctype>

#include "fsj/syntax.hpp"

namespace fsj {

namespace {

constexpr std::array<std::string_view, 12> kReserved = {
    "class", "extends", "signal", "super", "this",   "let",
    "in",    "subscribe", "unit", "Unit",  "Object", "new"};

}  // namespace

bool is_reserved_word(std::string_view word) {
    for (auto r : kReserved)
        if (r == word) return true;
    return false;
}

namespace detail {

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::uint32_t line = 1;
    std::uint32_t col = 1;
    std::size_t i = 0;

    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };

    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i < text.size() && text[i] != '\n') advance(1);
            continue;
        }
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
            SourceSpan start{line, col};
            advance(2);
            while (i < text.size() && !(text[i] == '*' && i + 1 < text.size() && text[i + 1] == '/')) advance(1);
            if (i >= text.size()) throw ParseError(start, {"*/"}, "end of input");
            advance(2);
            continue;
        }
        SourceSpan span{line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
            std::string word(text.substr(i, j - i));
            TokenKind kind = is_reserved_word(word) ? TokenKind::Keyword : TokenKind::Ident;
            out.push_back({kind, std::move(word), span});
            advance(j - i);
            continue;
        }
        switch (c) {
            case '{':
            case '}':
            case '(':
            case ')':
            case ';':
            case ',':
            case '.':
            case '=':
                out.push_back({TokenKind::Punct, std::string(1, c), span});
                advance(1);
                continue;
            default:
                break;
        }
        throw ParseError(span, {}, std::string("character '") + c + "'");
    }
    out.push_back({TokenKind::End, "", SourceSpan{line, col}});
    return out;
}

std::string describe(const Token& tok) {
    switch (tok.kind) {
        case TokenKind::End:
            return "end of input";
        case TokenKind::Ident:
            return "identifier '" + tok.text + "'";
        default:
            return "'" + tok.text + "'";
    }
}

}  // namespace detail
}  // namespace fsj
