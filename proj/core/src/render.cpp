#include <sstream>

#include "fsj/syntax.hpp"

namespace fsj {

namespace {

// Where an expression is printed decides which forms need parentheses:
// Tail positions accept anything, operands reject `;` and `let` (a let
// body would swallow the rest of the sequence), receivers accept only
// postfix forms.
enum class Position { Tail, Operand, Receiver };

void emit(std::ostream& os, const Expr& e, Position pos);

void emit_list(std::ostream& os, const std::vector<Expr>& args) {
    os << '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) os << ", ";
        emit(os, args[i], Position::Tail);
    }
    os << ')';
}

void emit_parenthesized(std::ostream& os, const Expr& e) {
    os << '(';
    emit(os, e, Position::Tail);
    os << ')';
}

void emit(std::ostream& os, const Expr& e, Position pos) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, expr::Var>) {
                os << n.name;
            } else if constexpr (std::is_same_v<T, expr::FieldAccess>) {
                emit(os, n.recv, Position::Receiver);
                os << '.' << n.field;
            } else if constexpr (std::is_same_v<T, expr::Invoke>) {
                emit(os, n.recv, Position::Receiver);
                os << '.' << n.method;
                emit_list(os, n.args);
            } else if constexpr (std::is_same_v<T, expr::New>) {
                os << "new " << n.cls;
                emit_list(os, n.args);
            } else if constexpr (std::is_same_v<T, expr::Assign>) {
                if (pos == Position::Receiver) return emit_parenthesized(os, e);
                emit(os, n.recv, Position::Receiver);
                os << '.' << n.field << " = ";
                emit(os, n.value, Position::Operand);
            } else if constexpr (std::is_same_v<T, expr::Seq>) {
                if (pos != Position::Tail) return emit_parenthesized(os, e);
                emit(os, n.first, Position::Operand);
                os << "; ";
                emit(os, n.second, Position::Tail);
            } else if constexpr (std::is_same_v<T, expr::Subscribe>) {
                emit(os, n.recv, Position::Receiver);
                os << '.' << n.field << ".subscribe(";
                emit(os, n.handler, Position::Tail);
                os << ')';
            } else if constexpr (std::is_same_v<T, expr::Loc>) {
                os << to_string(n.loc);
            } else if constexpr (std::is_same_v<T, expr::EffectBrace>) {
                os << "{ ";
                emit(os, n.body, Position::Tail);
                os << " }" << to_string(n.key);
            } else if constexpr (std::is_same_v<T, expr::Empty>) {
                os << "unit";
            } else {
                if (pos != Position::Tail) return emit_parenthesized(os, e);
                os << "let " << n.var << " = ";
                emit(os, n.bound, Position::Tail);
                os << " in ";
                emit(os, n.body, Position::Tail);
            }
        },
        e.rep().node);
}

void emit_params(std::ostream& os, const std::vector<Parameter>& params) {
    os << '(';
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) os << ", ";
        os << params[i].type << ' ' << params[i].name;
    }
    os << ')';
}

void emit_modifier(std::ostream& os, Modifier m) {
    if (m == Modifier::Signal) os << "signal ";
}

}  // namespace

std::string render(const Expr& e) {
    std::ostringstream os;
    emit(os, e, Position::Tail);
    return os.str();
}

std::string render(const ClassDecl& cl) {
    std::ostringstream os;
    os << "class " << cl.name << " extends " << cl.parent << " {\n";
    for (const auto& f : cl.composite_fields) {
        os << "    ";
        emit_modifier(os, f.modifier);
        os << f.type << ' ' << f.name << " = ";
        emit(os, f.init, Position::Operand);
        os << ";\n";
    }
    for (const auto& f : cl.source_fields) {
        os << "    ";
        emit_modifier(os, f.modifier);
        os << f.type << ' ' << f.name << ";\n";
    }
    os << "    " << cl.name;
    emit_params(os, cl.ctor.params);
    os << " { super(";
    for (std::size_t i = 0; i < cl.ctor.super_args.size(); ++i) {
        if (i) os << ", ";
        os << cl.ctor.super_args[i];
    }
    os << ");";
    for (const auto& init : cl.ctor.field_inits) os << " this." << init.field << " = " << init.param << ';';
    os << " }\n";
    for (const auto& m : cl.methods) {
        os << "    " << m.return_type.str() << ' ' << m.name;
        emit_params(os, m.params);
        os << " { ";
        emit(os, m.body, Position::Tail);
        os << " }\n";
    }
    os << "}\n";
    return os.str();
}

std::string render(const Program& p) {
    std::ostringstream os;
    for (const auto& cl : p.classes) os << render(cl) << '\n';
    os << render(p.main) << '\n';
    return os.str();
}

}  // namespace fsj
