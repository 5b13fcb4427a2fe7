#pragma once

// One accepting and one rejecting instance per typing rule, shared by the
// unit tests and the acceptance binary.

#include <map>
#include <string>
#include <vector>

#include "fsj/class_table.hpp"
#include "fsj/eval.hpp"
#include "fsj/syntax.hpp"
#include "fsj/typecheck.hpp"

namespace fsj::conformance {

inline const char* const kPrelude = R"(
class A extends Object {
    signal A c = this.s;
    signal A s;
    A p;
    A(A s, A p) { super(); this.s = s; this.p = p; }
    A id(A x) { x }
    Unit poke() { unit }
}
class B extends A {
    B(A s, A p) { super(s, p); }
}
unit)";

/// Expression rules are checked under a : A, b : B and @0 : A, @1 : B.
/// Free variables l0 ... l9 stand for locations; a leading `brace ` wraps
/// the rest in an effect brace keyed by @0.s.
struct ExprCase {
    const char* rule;
    const char* accept;
    const char* accept_type;
    const char* reject;
    TypeErrorKind reject_kind;
};

inline const std::vector<ExprCase>& expr_cases() {
    static const std::vector<ExprCase> cases = {
        {"T-VAR", "b", "B", "z", TypeErrorKind::UnboundVar},
        {"T-FIELD", "a.c", "A", "a.missing", TypeErrorKind::UnknownField},
        {"T-INVK", "a.id(b)", "A", "a.id(new Object())", TypeErrorKind::ArgSubtype},
        {"T-NEW", "new B(a, b)", "B", "new A(a)", TypeErrorKind::ArgArity},
        {"T-ASSIGN", "a.s = b", "Unit", "a.c = a", TypeErrorKind::AssignToComposite},
        {"T-ASSIGNCONT", "brace l0.p = l1", "Unit", "brace l0", TypeErrorKind::BraceBodyNotUnit},
        {"T-CAT", "a.p = a; b", "B", "a; b", TypeErrorKind::SeqLeftNotUnit},
        {"T-SUBSCRIBE", "a.s.subscribe(a.p = b)", "Unit", "a.p.subscribe(unit)", TypeErrorKind::SubscribeOnNonSignal},
        {"T-LET", "let x = b in x.id(x)", "A", "let x = unit in x", TypeErrorKind::UnitMisuse},
        {"T-LOC", "l1", "B", "l7", TypeErrorKind::UnknownLocation},
        {"T-EMPTY", "unit", "Unit", "a.id(unit)", TypeErrorKind::UnitMisuse},
    };
    return cases;
}

/// Class-level rules: members of `class B extends A` where A has one
/// source signal `s`.
struct ClassCase {
    const char* rule;
    const char* accept;
    const char* reject;
    TypeErrorKind reject_kind;
};

inline const std::vector<ClassCase>& class_cases() {
    static const std::vector<ClassCase> cases = {
        {"T-METHOD", "B(A s) { super(s); }\n A narrow(B x) { x }", "B(A s) { super(s); }\n B widen(A x) { x }",
         TypeErrorKind::MethodBodyType},
        {"T-CLASS", "signal A t = this.s;\n B(A s) { super(s); }", "A t = this.s;\n B(A s) { super(s); }",
         TypeErrorKind::BadCompositeModifier},
    };
    return cases;
}

struct Outcome {
    std::string rule;
    std::string instance;
    bool passed;
    std::string detail;
};

inline Expr build_expr(std::string text) {
    bool brace = text.rfind("brace ", 0) == 0;
    if (brace) text = text.substr(6);
    std::map<std::string, Expr> locs;
    for (std::uint64_t i = 0; i < 10; ++i) locs["l" + std::to_string(i)] = Expr::loc(Location{i});
    Expr e = substitute(parse_expression(text), locs);
    return brace ? Expr::effect_brace(e, FieldKey{Location{0}, "s"}) : e;
}

inline std::vector<Outcome> run_all() {
    std::vector<Outcome> out;
    Program prelude = parse_program(kPrelude);
    ClassTable ct = ClassTable::build(prelude);
    TypeEnv env = TypeEnv().bind("a", "A").bind("b", "B");
    StoreTyping sigma{{Location{0}, "A"}, {Location{1}, "B"}};

    for (const auto& c : expr_cases()) {
        TypeResult ok = type_expr(ct, env, sigma, build_expr(c.accept));
        bool accepted = ok.ok() && ok.type().str() == c.accept_type;
        out.push_back({c.rule, c.accept, accepted,
                       ok.ok() ? "typed " + ok.type().str() + ", expected " + c.accept_type : ok.error().message});
        TypeResult bad = type_expr(ct, env, sigma, build_expr(c.reject));
        bool rejected = !bad.ok() && bad.error().kind == c.reject_kind;
        out.push_back({c.rule, c.reject, rejected,
                       bad.ok() ? "accepted at " + bad.type().str()
                                : std::string(to_string(bad.error().kind)) + ", expected " +
                                      std::string(to_string(c.reject_kind))});
    }

    auto class_errors = [](const std::string& members) {
        Program p = parse_program(std::string("class A extends Object { signal A s; A(A s) { super(); this.s = s; } }\n"
                                              "class B extends A {\n") +
                                  members + "\n}\nunit");
        ClassTable table = ClassTable::build(p);
        return check_program(table, p).errors;
    };
    for (const auto& c : class_cases()) {
        auto ok = class_errors(c.accept);
        out.push_back({c.rule, c.accept, ok.empty(), ok.empty() ? "" : ok.front().message});
        auto bad = class_errors(c.reject);
        bool rejected = bad.size() == 1 && bad.front().kind == c.reject_kind;
        out.push_back({c.rule, c.reject, rejected,
                       bad.empty() ? "accepted" : std::string(to_string(bad.front().kind)) + ": " + bad.front().message});
    }
    return out;
}

}  // namespace fsj::conformance
