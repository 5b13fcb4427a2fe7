#include <string>
#include <sstream>

#include "fsj/syntax.hpp"
#include "lexer.hpp"

namespace fsj {

namespace {

std::string format_parse_error(SourceSpan where, const std::vector<std::string>& expected,
                               const std::string& found) {
    std::ostringstream os;
    os << where.line << ":" << where.column << ": unexpected " << found;
    if (!expected.empty()) {
        os << ", expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) os << (i + 1 == expected.size() ? " or " : ", ");
            os << expected[i];
        }
    }
    return os.str();
}

}  // namespace

ParseError::ParseError(SourceSpan where, std::vector<std::string> expected, std::string found)
    : std::runtime_error(format_parse_error(where, expected, found)),
      where_(where),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

namespace {

using detail::Token;
using detail::TokenKind;

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(detail::tokenize(text)) {}

    Program program() {
        Program p;
        while (is_keyword("class")) p.classes.push_back(class_decl());
        p.main = seq_expr();
        skip_trailing_semicolon();
        expect_end();
        return p;
    }

    Expr single_expression() {
        Expr e = seq_expr();
        skip_trailing_semicolon();
        expect_end();
        return e;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }
    const Token& next() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }

    bool is_punct(std::string_view p, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::Punct && t.text == p;
    }
    bool is_keyword(std::string_view k, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::Keyword && t.text == k;
    }
    bool is_ident(std::size_t ahead = 0) const { return peek(ahead).kind == TokenKind::Ident; }
    bool is_class_name(std::size_t ahead = 0) const { return is_ident(ahead) || is_keyword("Object", ahead); }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        throw ParseError(peek().span, std::move(expected), detail::describe(peek()));
    }

    void expect_punct(std::string_view p) {
        if (!is_punct(p)) fail({"'" + std::string(p) + "'"});
        next();
    }
    void expect_keyword(std::string_view k) {
        if (!is_keyword(k)) fail({"'" + std::string(k) + "'"});
        next();
    }
    std::string expect_ident() {
        if (!is_ident()) fail({"identifier"});
        return next().text;
    }
    std::string expect_class_name() {
        if (!is_class_name()) fail({"class name"});
        return next().text;
    }
    void expect_end() {
        if (peek().kind != TokenKind::End) fail({"end of input"});
    }
    void skip_trailing_semicolon() {
        if (is_punct(";") && ends_sequence(1)) next();
    }

    ClassDecl class_decl() {
        ClassDecl cl;
        cl.span = peek().span;
        expect_keyword("class");
        cl.name = expect_ident();
        expect_keyword("extends");
        cl.parent = expect_class_name();
        expect_punct("{");
        bool have_ctor = false;
        while (!is_punct("}")) {
            SourceSpan span = peek().span;
            if (is_keyword("signal")) {
                next();
                std::string type = expect_class_name();
                std::string name = expect_ident();
                if (is_punct("=")) {
                    next();
                    Expr init = unit_expr();
                    expect_punct(";");
                    cl.composite_fields.push_back({Modifier::Signal, type, name, init, span});
                } else {
                    expect_punct(";");
                    cl.source_fields.push_back({Modifier::Signal, type, name, span});
                }
            } else if (is_ident() && peek().text == cl.name && is_punct("(", 1)) {
                if (have_ctor) throw ParseError(span, {"field or method declaration"}, "second constructor");
                have_ctor = true;
                cl.ctor = constructor(cl.name);
            } else if (is_keyword("Unit")) {
                next();
                cl.methods.push_back(method_rest(TypeName::unit(), span));
            } else if (is_class_name()) {
                std::string type = next().text;
                if (is_ident() && is_punct("(", 1)) {
                    cl.methods.push_back(method_rest(TypeName::of(type), span));
                } else {
                    std::string name = expect_ident();
                    if (is_punct("=")) {
                        next();
                        Expr init = unit_expr();
                        expect_punct(";");
                        cl.composite_fields.push_back({Modifier::Plain, type, name, init, span});
                    } else if (is_punct(";")) {
                        next();
                        cl.source_fields.push_back({Modifier::Plain, type, name, span});
                    } else {
                        fail({"'='", "';'", "'('"});
                    }
                }
            } else {
                fail({"'signal'", "'Unit'", "class name", "'}'"});
            }
        }
        expect_punct("}");
        return cl;
    }

    std::vector<Parameter> params() {
        std::vector<Parameter> out;
        expect_punct("(");
        if (!is_punct(")")) {
            while (true) {
                if (is_keyword("Unit")) fail({"class name"});
                std::string type = expect_class_name();
                std::string name = expect_ident();
                out.push_back({type, name});
                if (!is_punct(",")) break;
                next();
            }
        }
        expect_punct(")");
        return out;
    }

    ConstructorDecl constructor(const std::string& cls) {
        ConstructorDecl k;
        k.span = peek().span;
        if (expect_ident() != cls) fail({cls});
        k.params = params();
        expect_punct("{");
        expect_keyword("super");
        expect_punct("(");
        if (!is_punct(")")) {
            while (true) {
                k.super_args.push_back(expect_ident());
                if (!is_punct(",")) break;
                next();
            }
        }
        expect_punct(")");
        expect_punct(";");
        while (is_keyword("this")) {
            next();
            expect_punct(".");
            std::string field = expect_ident();
            expect_punct("=");
            std::string param = expect_ident();
            expect_punct(";");
            k.field_inits.push_back({field, param});
        }
        expect_punct("}");
        return k;
    }

    MethodDecl method_rest(TypeName ret, SourceSpan span) {
        MethodDecl m;
        m.span = span;
        m.return_type = std::move(ret);
        m.name = expect_ident();
        m.params = params();
        expect_punct("{");
        m.body = seq_expr();
        skip_trailing_semicolon();
        expect_punct("}");
        return m;
    }

    Expr seq_expr() {
        Nesting guard(*this);
        SourceSpan span = peek().span;
        Expr first = unit_expr();
        if (is_punct(";") && !ends_sequence(1)) {
            next();
            return Expr::seq(first, seq_expr(), span);
        }
        return first;
    }

    // A `;` followed by a closing token is a trailing separator, not a Seq.
    bool ends_sequence(std::size_t ahead) const {
        const Token& t = peek(ahead);
        if (t.kind == TokenKind::End) return true;
        return t.kind == TokenKind::Punct && (t.text == "}" || t.text == ")");
    }

    Expr unit_expr() {
        Nesting guard(*this);
        SourceSpan span = peek().span;
        if (is_keyword("let")) {
            next();
            std::string var = expect_ident();
            expect_punct("=");
            Expr bound = seq_expr();
            expect_keyword("in");
            Expr body = seq_expr();
            return Expr::let(var, bound, body, span);
        }
        Expr lhs = postfix();
        if (is_punct("=")) {
            const auto* fa = lhs.as<expr::FieldAccess>();
            if (!fa) fail({"';'", "end of expression"});
            next();
            Expr value = unit_expr();
            return Expr::assign(fa->recv, fa->field, value, span);
        }
        return lhs;
    }

    Expr postfix() {
        SourceSpan span = peek().span;
        Expr e = primary();
        while (is_punct(".")) {
            next();
            if (is_keyword("subscribe")) {
                const auto* fa = e.as<expr::FieldAccess>();
                if (!fa) fail({"field name"});
                next();
                expect_punct("(");
                Expr handler = seq_expr();
                expect_punct(")");
                e = Expr::subscribe(fa->recv, fa->field, handler, span);
                continue;
            }
            std::string name = expect_ident();
            if (is_punct("(")) {
                e = Expr::invoke(e, name, args(), span);
            } else {
                e = Expr::field(e, name, span);
            }
        }
        return e;
    }

    std::vector<Expr> args() {
        std::vector<Expr> out;
        expect_punct("(");
        if (!is_punct(")")) {
            while (true) {
                out.push_back(seq_expr());
                if (!is_punct(",")) break;
                next();
            }
        }
        expect_punct(")");
        return out;
    }

    Expr primary() {
        SourceSpan span = peek().span;
        if (is_ident()) return Expr::var(next().text, span);
        if (is_keyword("this")) {
            next();
            return Expr::var(std::string(kThis), span);
        }
        if (is_keyword("unit")) {
            next();
            return Expr::empty(span);
        }
        if (is_keyword("new")) {
            next();
            std::string cls = expect_class_name();
            return Expr::make_new(cls, args(), span);
        }
        if (is_punct("(")) {
            next();
            Expr inner = seq_expr();
            expect_punct(")");
            return inner;
        }
        fail({"identifier", "'this'", "'unit'", "'new'", "'let'", "'('"});
    }

    // Bounds recursion so that adversarial input fails with a ParseError
    // instead of exhausting the stack.
    static constexpr std::size_t kMaxNesting = 2000;

    struct Nesting {
        explicit Nesting(Parser& p) : parser(p) {
            if (++parser.depth_ > kMaxNesting)
                throw ParseError(parser.peek().span, {}, "nesting beyond the depth limit");
        }
        ~Nesting() { --parser.depth_; }
        Nesting(const Nesting&) = delete;
        Nesting& operator=(const Nesting&) = delete;
        Parser& parser;
    };

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::size_t depth_ = 0;
};

}  // namespace

Program parse_program(std::string_view text) {
    return Parser(text).program();
}

Expr parse_expression(std::string_view text) {
    return Parser(text).single_expression();
}

}  // namespace fsj
