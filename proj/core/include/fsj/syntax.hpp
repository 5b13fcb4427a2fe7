#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fsj/ast.hpp"

namespace fsj {

/// Syntax error with the position of the offending token and the tokens
/// that would have been accepted there.
class ParseError : public std::runtime_error {
public:
    ParseError(SourceSpan where, std::vector<std::string> expected, std::string found);

    SourceSpan where() const { return where_; }
    const std::vector<std::string>& expected() const { return expected_; }
    const std::string& found() const { return found_; }

private:
    SourceSpan where_;
    std::vector<std::string> expected_;
    std::string found_;
};

/// Parses a whole `.fsj` file: class declarations followed by the main
/// expression. Throws ParseError.
Program parse_program(std::string_view text);

/// Parses a single expression. Throws ParseError.
Expr parse_expression(std::string_view text);

/// True for words that cannot be used as identifiers.
bool is_reserved_word(std::string_view word);

std::string render(const Expr& e);
std::string render(const ClassDecl& cl);
std::string render(const Program& p);

}  // namespace fsj
