#include "fsj/ast.hpp"

#include <functional>

namespace fsj {

std::string_view to_string(Modifier m) {
    return m == Modifier::Signal ? "signal" : "";
}

std::string to_string(Location loc) {
    return "@" + std::to_string(loc.id);
}

std::string to_string(const FieldKey& key) {
    return to_string(key.loc) + "." + key.field;
}

Expr::Expr() : rep_(std::make_shared<const ExprRep>(ExprRep{expr::Empty{}, {}})) {}

Expr Expr::var(std::string name, SourceSpan span) {
    return Expr(std::make_shared<const ExprRep>(ExprRep{expr::Var{std::move(name)}, span}));
}

Expr Expr::field(Expr recv, std::string field, SourceSpan span) {
    return Expr(std::make_shared<const ExprRep>(
        ExprRep{expr::FieldAccess{std::move(recv), std::move(field)}, span}));
}

Expr Expr::invoke(Expr recv, std::string method, std::vector<Expr> args, SourceSpan span) {
    return Expr(std::make_shared<const ExprRep>(
        ExprRep{expr::Invoke{std::move(recv), std::move(method), std::move(args)}, span}));
}

Expr Expr::make_new(std::string cls, std::vector<Expr> args, SourceSpan span) {
    return Expr(std::make_shared<const ExprRep>(ExprRep{expr::New{std::move(cls), std::move(args)}, span}));
}

Expr Expr::assign(Expr recv, std::string field, Expr value, SourceSpan span) {
    return Expr(std::make_shared<const ExprRep>(
        ExprRep{expr::Assign{std::move(recv), std::move(field), std::move(value)}, span}));
}

Expr Expr::seq(Expr first, Expr second, SourceSpan span) {
    return Expr(std::make_shared<const ExprRep>(ExprRep{expr::Seq{std::move(first), std::move(second)}, span}));
}

Expr Expr::subscribe(Expr recv, std::string field, Expr handler, SourceSpan span) {
    return Expr(std::make_shared<const ExprRep>(
        ExprRep{expr::Subscribe{std::move(recv), std::move(field), std::move(handler)}, span}));
}

Expr Expr::loc(Location l, SourceSpan span) {
    return Expr(std::make_shared<const ExprRep>(ExprRep{expr::Loc{l}, span}));
}

Expr Expr::effect_brace(Expr body, FieldKey key, SourceSpan span) {
    return Expr(std::make_shared<const ExprRep>(ExprRep{expr::EffectBrace{std::move(body), std::move(key)}, span}));
}

Expr Expr::empty(SourceSpan span) {
    return Expr(std::make_shared<const ExprRep>(ExprRep{expr::Empty{}, span}));
}

Expr Expr::let(std::string var, Expr bound, Expr body, SourceSpan span) {
    return Expr(std::make_shared<const ExprRep>(
        ExprRep{expr::Let{std::move(var), std::move(bound), std::move(body)}, span}));
}

bool Expr::is_value() const { return is<expr::Loc>(); }
bool Expr::is_empty() const { return is<expr::Empty>(); }
Location Expr::location() const { return as<expr::Loc>()->loc; }
const SourceSpan& Expr::span() const { return rep_->span; }

namespace {

bool equal_lists(const std::vector<Expr>& a, const std::vector<Expr>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] == b[i])) return false;
    return true;
}

template <class F>
void for_each_child(const Expr& e, F&& f) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, expr::FieldAccess>) {
                f(n.recv);
            } else if constexpr (std::is_same_v<T, expr::Invoke>) {
                f(n.recv);
                for (const auto& a : n.args) f(a);
            } else if constexpr (std::is_same_v<T, expr::New>) {
                for (const auto& a : n.args) f(a);
            } else if constexpr (std::is_same_v<T, expr::Assign>) {
                f(n.recv);
                f(n.value);
            } else if constexpr (std::is_same_v<T, expr::Seq>) {
                f(n.first);
                f(n.second);
            } else if constexpr (std::is_same_v<T, expr::Subscribe>) {
                f(n.recv);
                f(n.handler);
            } else if constexpr (std::is_same_v<T, expr::EffectBrace>) {
                f(n.body);
            } else if constexpr (std::is_same_v<T, expr::Let>) {
                f(n.bound);
                f(n.body);
            }
        },
        e.rep().node);
}

}  // namespace

bool operator==(const Expr& a, const Expr& b) {
    if (a.rep_ == b.rep_) return true;
    const ExprNode& x = a.rep_->node;
    const ExprNode& y = b.rep_->node;
    if (x.index() != y.index()) return false;
    return std::visit(
        [&](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            const T& m = std::get<T>(y);
            if constexpr (std::is_same_v<T, expr::Var>) {
                return n.name == m.name;
            } else if constexpr (std::is_same_v<T, expr::FieldAccess>) {
                return n.field == m.field && n.recv == m.recv;
            } else if constexpr (std::is_same_v<T, expr::Invoke>) {
                return n.method == m.method && n.recv == m.recv && equal_lists(n.args, m.args);
            } else if constexpr (std::is_same_v<T, expr::New>) {
                return n.cls == m.cls && equal_lists(n.args, m.args);
            } else if constexpr (std::is_same_v<T, expr::Assign>) {
                return n.field == m.field && n.recv == m.recv && n.value == m.value;
            } else if constexpr (std::is_same_v<T, expr::Seq>) {
                return n.first == m.first && n.second == m.second;
            } else if constexpr (std::is_same_v<T, expr::Subscribe>) {
                return n.field == m.field && n.recv == m.recv && n.handler == m.handler;
            } else if constexpr (std::is_same_v<T, expr::Loc>) {
                return n.loc == m.loc;
            } else if constexpr (std::is_same_v<T, expr::EffectBrace>) {
                return n.key == m.key && n.body == m.body;
            } else if constexpr (std::is_same_v<T, expr::Empty>) {
                return true;
            } else {
                return n.var == m.var && n.bound == m.bound && n.body == m.body;
            }
        },
        x);
}

bool has_runtime_forms(const Expr& e) {
    if (e.is<expr::Loc>() || e.is<expr::EffectBrace>()) return true;
    bool found = false;
    for_each_child(e, [&](const Expr& c) { found = found || has_runtime_forms(c); });
    return found;
}

std::size_t expr_size(const Expr& e) {
    std::size_t n = 1;
    for_each_child(e, [&](const Expr& c) { n += expr_size(c); });
    return n;
}

bool is_subterm(const Expr& needle, const Expr& haystack) {
    if (needle == haystack) return true;
    bool found = false;
    for_each_child(haystack, [&](const Expr& c) { found = found || is_subterm(needle, c); });
    return found;
}

std::vector<Expr> children(const Expr& e) {
    std::vector<Expr> out;
    for_each_child(e, [&](const Expr& c) { out.push_back(c); });
    return out;
}

Expr with_children(const Expr& e, const std::vector<Expr>& kids) {
    std::size_t i = 0;
    auto next = [&]() -> const Expr& { return kids.at(i++); };
    auto take = [&](std::size_t n) {
        std::vector<Expr> out;
        for (std::size_t k = 0; k < n; ++k) out.push_back(next());
        return out;
    };
    return std::visit(
        [&](const auto& n) -> Expr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, expr::FieldAccess>) {
                return Expr::field(next(), n.field, e.span());
            } else if constexpr (std::is_same_v<T, expr::Invoke>) {
                Expr recv = next();
                return Expr::invoke(recv, n.method, take(n.args.size()), e.span());
            } else if constexpr (std::is_same_v<T, expr::New>) {
                return Expr::make_new(n.cls, take(n.args.size()), e.span());
            } else if constexpr (std::is_same_v<T, expr::Assign>) {
                Expr recv = next();
                return Expr::assign(recv, n.field, next(), e.span());
            } else if constexpr (std::is_same_v<T, expr::Seq>) {
                Expr first = next();
                return Expr::seq(first, next(), e.span());
            } else if constexpr (std::is_same_v<T, expr::Subscribe>) {
                Expr recv = next();
                return Expr::subscribe(recv, n.field, next(), e.span());
            } else if constexpr (std::is_same_v<T, expr::EffectBrace>) {
                return Expr::effect_brace(next(), n.key, e.span());
            } else if constexpr (std::is_same_v<T, expr::Let>) {
                Expr bound = next();
                return Expr::let(n.var, bound, next(), e.span());
            } else {
                return e;
            }
        },
        e.rep().node);
}

}  // namespace fsj
