#include "fsj/typecheck.hpp"

namespace fsj {

std::string_view to_string(TypeErrorKind k) {
    switch (k) {
        case TypeErrorKind::UnboundVar: return "UnboundVar";
        case TypeErrorKind::UnknownField: return "UnknownField";
        case TypeErrorKind::UnknownMethod: return "UnknownMethod";
        case TypeErrorKind::ArgArity: return "ArgArity";
        case TypeErrorKind::ArgSubtype: return "ArgSubtype";
        case TypeErrorKind::AssignToComposite: return "AssignToComposite";
        case TypeErrorKind::AssignTypeMismatch: return "AssignTypeMismatch";
        case TypeErrorKind::SubscribeOnNonSignal: return "SubscribeOnNonSignal";
        case TypeErrorKind::SubscribeHandlerNotUnit: return "SubscribeHandlerNotUnit";
        case TypeErrorKind::SeqLeftNotUnit: return "SeqLeftNotUnit";
        case TypeErrorKind::BraceBodyNotUnit: return "BraceBodyNotUnit";
        case TypeErrorKind::UnitMisuse: return "UnitMisuse";
        case TypeErrorKind::UnknownLocation: return "UnknownLocation";
        case TypeErrorKind::BadInitializer: return "BadInitializer";
        case TypeErrorKind::BadCompositeModifier: return "BadCompositeModifier";
        case TypeErrorKind::CtorShape: return "CtorShape";
        case TypeErrorKind::MethodBodyType: return "MethodBodyType";
        case TypeErrorKind::UnknownClassType: return "UnknownClassType";
    }
    return "?";
}

TypeCheckFailure::TypeCheckFailure(TypeError error)
    : std::runtime_error(std::string(to_string(error.kind)) + ": " + error.message), error_(std::move(error)) {}

TypeEnv TypeEnv::bind(const std::string& var, const std::string& cls) const {
    TypeEnv out = *this;
    out.bindings_[var] = cls;
    return out;
}

const std::string* TypeEnv::lookup(const std::string& var) const {
    auto it = bindings_.find(var);
    return it == bindings_.end() ? nullptr : &it->second;
}

namespace {

[[noreturn]] void fail(TypeErrorKind kind, std::string message, SourceSpan span) {
    throw TypeCheckFailure(TypeError{kind, std::move(message), span});
}

void require_class(const ClassTable& ct, const std::string& cls, SourceSpan span) {
    if (!ct.contains(cls)) fail(TypeErrorKind::UnknownClassType, "unknown class " + cls, span);
}

class ExprChecker {
public:
    ExprChecker(const ClassTable& ct, const StoreTyping& store) : ct_(ct), store_(store) {}

    TypeName type(const TypeEnv& env, const Expr& e) const {
        return std::visit([&](const auto& n) { return rule(env, e, n); }, e.rep().node);
    }

private:
    // Type of an expression that is used as a value: must be a class.
    std::string class_of(const TypeEnv& env, const Expr& e, std::string_view role) const {
        TypeName t = type(env, e);
        if (t.is_unit())
            fail(TypeErrorKind::UnitMisuse, "expression of type Unit used as " + std::string(role), e.span());
        return t.class_name();
    }

    // T-VAR
    TypeName rule(const TypeEnv& env, const Expr& e, const expr::Var& n) const {
        const std::string* cls = env.lookup(n.name);
        if (!cls) fail(TypeErrorKind::UnboundVar, "unbound variable " + n.name, e.span());
        return TypeName::of(*cls);
    }

    // T-FIELD
    TypeName rule(const TypeEnv& env, const Expr& e, const expr::FieldAccess& n) const {
        std::string recv = class_of(env, n.recv, "receiver");
        auto ft = ct_.ftype(recv, n.field);
        if (!ft) fail(TypeErrorKind::UnknownField, "class " + recv + " has no field " + n.field, e.span());
        return TypeName::of(ft->type);
    }

    // T-INVK
    TypeName rule(const TypeEnv& env, const Expr& e, const expr::Invoke& n) const {
        std::string recv = class_of(env, n.recv, "receiver");
        auto mt = ct_.mtype(n.method, recv);
        if (!mt) fail(TypeErrorKind::UnknownMethod, "class " + recv + " has no method " + n.method, e.span());
        if (mt->param_types.size() != n.args.size())
            fail(TypeErrorKind::ArgArity,
                 n.method + " expects " + std::to_string(mt->param_types.size()) + " arguments, got " +
                     std::to_string(n.args.size()),
                 e.span());
        for (std::size_t i = 0; i < n.args.size(); ++i) {
            std::string arg = class_of(env, n.args[i], "argument");
            if (!ct_.inherits(arg, mt->param_types[i]))
                fail(TypeErrorKind::ArgSubtype,
                     "argument " + std::to_string(i + 1) + " of " + n.method + " has type " + arg +
                         ", not a subtype of " + mt->param_types[i],
                     n.args[i].span());
        }
        return mt->ret;
    }

    // T-NEW
    TypeName rule(const TypeEnv& env, const Expr& e, const expr::New& n) const {
        require_class(ct_, n.cls, e.span());
        const auto& src = ct_.source(n.cls);
        if (src.size() != n.args.size())
            fail(TypeErrorKind::ArgArity,
                 "new " + n.cls + " expects " + std::to_string(src.size()) + " arguments, got " +
                     std::to_string(n.args.size()),
                 e.span());
        for (std::size_t i = 0; i < n.args.size(); ++i) {
            std::string arg = class_of(env, n.args[i], "constructor argument");
            if (!ct_.inherits(arg, src[i].type))
                fail(TypeErrorKind::ArgSubtype,
                     "argument for " + n.cls + "." + src[i].name + " has type " + arg + ", not a subtype of " +
                         src[i].type,
                     n.args[i].span());
        }
        return TypeName::of(n.cls);
    }

    // T-ASSIGN: only source fields are assignable.
    TypeName rule(const TypeEnv& env, const Expr& e, const expr::Assign& n) const {
        std::string recv = class_of(env, n.recv, "receiver");
        auto idx = ct_.source_index(recv, n.field);
        if (!idx) {
            if (ct_.composite_index(recv, n.field))
                fail(TypeErrorKind::AssignToComposite,
                     "composite signal " + recv + "." + n.field + " cannot be reassigned", e.span());
            fail(TypeErrorKind::UnknownField, "class " + recv + " has no field " + n.field, e.span());
        }
        std::string value = class_of(env, n.value, "assigned value");
        const std::string& declared = ct_.source(recv)[*idx].type;
        if (!ct_.inherits(value, declared))
            fail(TypeErrorKind::AssignTypeMismatch,
                 "cannot assign " + value + " to field " + n.field + " of type " + declared, e.span());
        return TypeName::unit();
    }

    // T-CAT
    TypeName rule(const TypeEnv& env, const Expr& e, const expr::Seq& n) const {
        if (!type(env, n.first).is_unit())
            fail(TypeErrorKind::SeqLeftNotUnit, "left operand of ';' must have type Unit", n.first.span());
        (void)e;
        return type(env, n.second);
    }

    // T-SUBSCRIBE
    TypeName rule(const TypeEnv& env, const Expr& e, const expr::Subscribe& n) const {
        std::string recv = class_of(env, n.recv, "receiver");
        auto ft = ct_.ftype(recv, n.field);
        if (!ft) fail(TypeErrorKind::UnknownField, "class " + recv + " has no field " + n.field, e.span());
        if (ft->modifier != Modifier::Signal)
            fail(TypeErrorKind::SubscribeOnNonSignal, recv + "." + n.field + " is not a signal", e.span());
        if (!type(env, n.handler).is_unit())
            fail(TypeErrorKind::SubscribeHandlerNotUnit, "handler must have type Unit", n.handler.span());
        return TypeName::unit();
    }

    // T-LOC
    TypeName rule(const TypeEnv&, const Expr& e, const expr::Loc& n) const {
        auto it = store_.find(n.loc);
        if (it == store_.end()) fail(TypeErrorKind::UnknownLocation, "untyped location " + to_string(n.loc), e.span());
        return TypeName::of(it->second);
    }

    // T-ASSIGNCONT
    TypeName rule(const TypeEnv& env, const Expr& e, const expr::EffectBrace& n) const {
        if (!type(env, n.body).is_unit())
            fail(TypeErrorKind::BraceBodyNotUnit, "effect body must have type Unit", e.span());
        return TypeName::unit();
    }

    // T-EMPTY
    TypeName rule(const TypeEnv&, const Expr&, const expr::Empty&) const { return TypeName::unit(); }

    // T-LET, with the variable typed at exactly the bound expression's class.
    TypeName rule(const TypeEnv& env, const Expr&, const expr::Let& n) const {
        std::string bound = class_of(env, n.bound, "let-bound value");
        return type(env.bind(n.var, bound), n.body);
    }

    const ClassTable& ct_;
    const StoreTyping& store_;
};

template <class F>
void collect(std::vector<TypeError>& errors, F&& f) {
    try {
        f();
    } catch (const TypeCheckFailure& failure) {
        errors.push_back(failure.error());
    } catch (const WellFormednessError& wf) {
        errors.push_back(TypeError{TypeErrorKind::UnknownClassType, wf.what(), wf.where()});
    }
}

}  // namespace

bool is_subtype(const ClassTable& ct, const TypeName& sub, const TypeName& super) {
    if (sub.is_unit() || super.is_unit()) return sub == super;
    require_class(ct, sub.class_name(), {});
    require_class(ct, super.class_name(), {});
    return ct.inherits(sub.class_name(), super.class_name());
}

TypeResult type_expr(const ClassTable& ct, const TypeEnv& env, const StoreTyping& store, const Expr& e) {
    try {
        return ExprChecker(ct, store).type(env, e);
    } catch (const TypeCheckFailure& failure) {
        return failure.error();
    } catch (const WellFormednessError& wf) {
        return TypeError{TypeErrorKind::UnknownClassType, wf.what(), e.span()};
    }
}

bool check_init(const Expr& e) {
    if (e.is<expr::Var>()) return true;
    if (const auto* fa = e.as<expr::FieldAccess>()) return check_init(fa->recv);
    if (const auto* inv = e.as<expr::Invoke>()) {
        if (!check_init(inv->recv)) return false;
        for (const auto& a : inv->args)
            if (!check_init(a)) return false;
        return true;
    }
    if (const auto* nw = e.as<expr::New>()) {
        for (const auto& a : nw->args)
            if (!check_init(a)) return false;
        return true;
    }
    return false;
}

std::vector<TypeError> check_class(const ClassTable& ct, const ClassDecl& cl) {
    std::vector<TypeError> errors;
    const StoreTyping no_locations;
    ExprChecker checker(ct, no_locations);
    const TypeEnv self = TypeEnv().bind(std::string(kThis), cl.name);

    for (const auto& f : cl.source_fields) collect(errors, [&] { require_class(ct, f.type, f.span); });

    for (const auto& f : cl.composite_fields) {
        collect(errors, [&] {
            require_class(ct, f.type, f.span);
            if (f.modifier != Modifier::Signal)
                fail(TypeErrorKind::BadCompositeModifier,
                     "initialized field " + cl.name + "." + f.name + " must be declared signal", f.span);
            if (!check_init(f.init))
                fail(TypeErrorKind::BadInitializer,
                     "initializer of " + cl.name + "." + f.name +
                         " may only use variables, field accesses, invocations and instance creations",
                     f.span);
            TypeName t = checker.type(self, f.init);
            if (!is_subtype(ct, t, TypeName::of(f.type)))
                fail(TypeErrorKind::BadInitializer,
                     "initializer of " + cl.name + "." + f.name + " has type " + t.str() + ", not a subtype of " +
                         f.type,
                     f.span);
        });
    }

    collect(errors, [&] {
        std::vector<Parameter> expected;
        for (const auto& g : ct.source(cl.parent)) expected.push_back({g.type, g.name});
        std::vector<std::string> super_expected;
        for (const auto& g : ct.source(cl.parent)) super_expected.push_back(g.name);
        for (const auto& f : cl.source_fields) expected.push_back({f.type, f.name});
        if (cl.ctor.params != expected || cl.ctor.super_args != super_expected) {
            std::string want = cl.name + "(";
            for (std::size_t i = 0; i < expected.size(); ++i)
                want += (i ? ", " : "") + expected[i].type + " " + expected[i].name;
            want += ") { super(";
            for (std::size_t i = 0; i < super_expected.size(); ++i) want += (i ? ", " : "") + super_expected[i];
            want += "); ... }";
            fail(TypeErrorKind::CtorShape, "constructor of " + cl.name + " must have the shape " + want,
                 cl.ctor.span);
        }
    });

    for (const auto& m : cl.methods) {
        collect(errors, [&] {
            TypeEnv env = self;
            for (const auto& p : m.params) {
                require_class(ct, p.type, m.span);
                env = env.bind(p.name, p.type);
            }
            if (m.return_type.is_class()) require_class(ct, m.return_type.class_name(), m.span);
            TypeName body = checker.type(env, m.body);
            if (!is_subtype(ct, body, m.return_type))
                fail(TypeErrorKind::MethodBodyType,
                     "body of " + cl.name + "." + m.name + " has type " + body.str() + ", declared " +
                         m.return_type.str(),
                     m.span);
        });
    }
    return errors;
}

ProgramCheck check_program(const ClassTable& ct, const Program& p) {
    ProgramCheck out;
    for (const auto& name : ct.class_names()) {
        auto errs = check_class(ct, ct.decl(name));
        out.errors.insert(out.errors.end(), errs.begin(), errs.end());
    }
    auto main = type_expr(ct, TypeEnv(), StoreTyping(), p.main);
    if (main.ok()) {
        out.main_type = main.type();
    } else {
        out.errors.push_back(main.error());
    }
    return out;
}

}  // namespace fsj
