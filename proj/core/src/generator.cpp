#include "fsj/generator.hpp"

#include <functional>
#include <limits>
#include <map>
#include <random>

namespace fsj {

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, n); n must be positive.
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
    /// Uniform in [lo, hi].
    int between(int lo, int hi) { return hi <= lo ? lo : lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1))); }
    bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_) < p; }

    template <class T>
    const T& pick(const std::vector<T>& xs) {
        return xs[below(xs.size())];
    }

private:
    std::mt19937_64 engine_;
};

struct FieldInfo {
    std::string owner;
    Modifier modifier;
    std::string type;
    std::string name;
    bool composite;
    int rank;
};

struct MethodInfo {
    std::string owner;
    std::string name;
    std::vector<std::string> param_types;
    TypeName ret = TypeName::unit();
    int rank;
};

struct Scope {
    std::vector<std::pair<std::string, std::string>> vars;
    int rank_limit = std::numeric_limits<int>::max();
    bool init_only = false;
    bool in_handler = false;
};

class Generator {
public:
    explicit Generator(const GenConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

    Program run() {
        declare_classes();
        Program p;
        for (auto& pending : classes_) p.classes.push_back(build_class(pending));
        p.main = build_main();
        return p;
    }

private:
    struct PendingMethod {
        MethodInfo info;
        std::vector<std::string> param_names;
    };
    struct PendingClass {
        std::string name;
        std::string parent;
        std::vector<FieldInfo> sources;
        std::vector<FieldInfo> composites;
        std::vector<PendingMethod> methods;
    };

    // Skeletons first: hierarchy, fields and signatures, with ranks.
    void declare_classes() {
        int n = cfg_.max_classes <= 0 ? 0 : rng_.between(0, cfg_.max_classes);
        for (int i = 0; i < n; ++i) names_.push_back("C" + std::to_string(i));
        parent_[std::string(kObject)] = "";
        for (int i = 0; i < n; ++i) {
            PendingClass c;
            c.name = names_[i];
            c.parent = i == 0 || rng_.chance(0.5) ? std::string(kObject) : names_[rng_.below(i)];
            parent_[c.name] = c.parent;

            std::vector<std::string> lower{std::string(kObject)};
            for (int j = 0; j < i; ++j) lower.push_back(names_[j]);
            std::vector<std::string> any = all_classes();

            int n_sources = rng_.between(0, cfg_.max_fields_per_class);
            for (int k = 0; k < n_sources; ++k) {
                Modifier m = rng_.chance(cfg_.signal_probability) ? Modifier::Signal : Modifier::Plain;
                c.sources.push_back({c.name, m, rng_.pick(lower), "f" + std::to_string(next_field_++), false, -1});
            }
            int n_composites = rng_.between(0, cfg_.max_fields_per_class);
            for (int k = 0; k < n_composites; ++k)
                c.composites.push_back(
                    {c.name, Modifier::Signal, rng_.pick(any), "f" + std::to_string(next_field_++), true, next_rank_++});

            int n_methods = rng_.between(0, cfg_.max_methods_per_class);
            std::vector<MethodInfo> inherited = visible_methods(c.parent);
            for (int k = 0; k < n_methods; ++k) {
                PendingMethod m;
                bool overriding = !inherited.empty() && rng_.chance(0.3);
                if (overriding) {
                    m.info = rng_.pick(inherited);
                    bool dup = false;
                    for (const auto& prev : c.methods) dup = dup || prev.info.name == m.info.name;
                    if (dup) continue;
                    m.info.owner = c.name;
                } else {
                    m.info.owner = c.name;
                    m.info.name = "m" + std::to_string(next_method_++);
                    int n_params = rng_.between(0, 2);
                    for (int q = 0; q < n_params; ++q) m.info.param_types.push_back(rng_.pick(any));
                    m.info.ret = rng_.chance(0.4) ? TypeName::unit() : TypeName::of(rng_.pick(any));
                    m.info.rank = next_rank_++;
                }
                for (std::size_t q = 0; q < m.info.param_types.size(); ++q)
                    m.param_names.push_back("p" + std::to_string(q));
                c.methods.push_back(m);
            }

            for (const auto& f : c.sources) fields_[c.name].push_back(f);
            for (const auto& f : c.composites) fields_[c.name].push_back(f);
            for (const auto& m : c.methods) methods_[c.name].push_back(m.info);
            classes_.push_back(std::move(c));
        }
    }

    ClassDecl build_class(const PendingClass& c) {
        ClassDecl cl;
        cl.name = c.name;
        cl.parent = c.parent;
        for (const auto& g : source_chain(c.parent)) {
            cl.ctor.params.push_back({g.type, g.name});
            cl.ctor.super_args.push_back(g.name);
        }
        for (const auto& f : c.sources) {
            cl.source_fields.push_back({f.modifier, f.type, f.name, {}});
            cl.ctor.params.push_back({f.type, f.name});
            cl.ctor.field_inits.push_back({f.name, f.name});
        }
        for (const auto& f : c.composites) {
            Scope s;
            s.vars = {{std::string(kThis), c.name}};
            s.rank_limit = f.rank;
            s.init_only = true;
            cl.composite_fields.push_back({Modifier::Signal, f.type, f.name, gen_class(f.type, s, cfg_.max_method_depth), {}});
        }
        for (const auto& m : c.methods) {
            MethodDecl decl;
            decl.return_type = m.info.ret;
            decl.name = m.info.name;
            Scope s;
            s.vars = {{std::string(kThis), c.name}};
            for (std::size_t q = 0; q < m.param_names.size(); ++q) {
                decl.params.push_back({m.info.param_types[q], m.param_names[q]});
                s.vars.push_back({m.param_names[q], m.info.param_types[q]});
            }
            s.rank_limit = m.info.rank;
            decl.body = m.info.ret.is_unit() ? gen_unit(s, cfg_.max_method_depth)
                                             : gen_class(m.info.ret.class_name(), s, cfg_.max_method_depth);
            cl.methods.push_back(std::move(decl));
        }
        return cl;
    }

    Expr build_main() {
        Scope s;
        int depth = std::max(1, cfg_.max_main_depth / 2 + 1);
        std::vector<std::pair<std::string, Expr>> lets;
        int n_lets = rng_.between(1, std::max(1, cfg_.max_main_depth));
        for (int i = 0; i < n_lets; ++i) {
            std::string cls = rng_.pick(all_classes());
            Expr bound = gen_class(cls, s, depth);
            std::string x = fresh_var();
            lets.push_back({x, bound});
            s.vars.push_back({x, cls});
        }
        std::vector<Expr> stmts;
        int n_stmts = rng_.between(1, std::max(1, cfg_.max_main_depth));
        for (int i = 0; i < n_stmts; ++i) stmts.push_back(gen_statement(s, depth));
        stmts.push_back(rng_.chance(0.2) ? Expr::empty() : gen_class(rng_.pick(all_classes()), s, depth));
        Expr body = seq_all(stmts);
        for (auto it = lets.rbegin(); it != lets.rend(); ++it) body = Expr::let(it->first, it->second, body);
        return body;
    }

    // Main-level statements lean towards the interesting pairs: subscriptions
    // followed by writes to signals.
    Expr gen_statement(const Scope& s, int depth) {
        if (rng_.chance(cfg_.subscribe_probability)) {
            if (auto e = gen_subscribe(s, depth)) return *e;
        }
        if (rng_.chance(0.6)) {
            if (auto e = gen_assign(s, depth)) return *e;
        }
        return gen_unit(s, depth);
    }

    static Expr seq_all(const std::vector<Expr>& xs) {
        Expr out = xs.back();
        for (auto it = xs.rbegin() + 1; it != xs.rend(); ++it) out = Expr::seq(*it, out);
        return out;
    }

    std::vector<std::string> all_classes() const {
        std::vector<std::string> out{std::string(kObject)};
        out.insert(out.end(), names_.begin(), names_.end());
        return out;
    }

    bool is_sub(std::string a, const std::string& b) const {
        while (!a.empty()) {
            if (a == b) return true;
            a = parent_.at(a);
        }
        return false;
    }

    std::vector<std::string> subclasses_of(const std::string& t) const {
        std::vector<std::string> out;
        for (const auto& c : all_classes())
            if (is_sub(c, t)) out.push_back(c);
        return out;
    }

    std::vector<FieldInfo> source_chain(const std::string& cls) const {
        if (cls == kObject) return {};
        auto out = source_chain(parent_.at(cls));
        auto it = fields_.find(cls);
        if (it != fields_.end())
            for (const auto& f : it->second)
                if (!f.composite) out.push_back(f);
        return out;
    }

    std::vector<MethodInfo> visible_methods(const std::string& cls) const {
        std::map<std::string, MethodInfo> by_name;
        for (std::string c = cls; !c.empty(); c = parent_.at(c)) {
            auto it = methods_.find(c);
            if (it == methods_.end()) continue;
            for (const auto& m : it->second) by_name.emplace(m.name, m);
        }
        std::vector<MethodInfo> out;
        for (auto& [_, m] : by_name) out.push_back(m);
        return out;
    }

    std::vector<FieldInfo> all_fields() const {
        std::vector<FieldInfo> out;
        for (const auto& c : names_) {
            auto it = fields_.find(c);
            if (it != fields_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
        }
        return out;
    }

    // Methods as declared at their origin; overrides share name, type and rank.
    std::vector<MethodInfo> all_methods() const {
        std::vector<MethodInfo> out;
        std::map<std::string, bool> seen;
        for (const auto& c : names_) {
            auto it = methods_.find(c);
            if (it == methods_.end()) continue;
            for (const auto& m : it->second)
                if (!seen[m.name]) {
                    seen[m.name] = true;
                    out.push_back(m);
                }
        }
        return out;
    }

    std::string fresh_var() { return "x" + std::to_string(next_var_++); }

    std::vector<Expr> gen_args(const std::vector<std::string>& types, const Scope& s, int depth) {
        std::vector<Expr> args;
        for (const auto& t : types) args.push_back(gen_class(t, s, depth));
        return args;
    }

    std::vector<std::string> source_types(const std::string& cls) const {
        std::vector<std::string> out;
        for (const auto& f : source_chain(cls)) out.push_back(f.type);
        return out;
    }

    // `new T(...)` with minimal arguments; source field types always have a
    // lower class index than their owner, so this bottoms out at Object.
    Expr minimal_new(const std::string& cls) {
        std::vector<Expr> args;
        for (const auto& t : source_types(cls)) args.push_back(minimal_new(t));
        return Expr::make_new(cls, std::move(args));
    }

    /// Expression whose type is a subclass of `t`.
    Expr gen_class(const std::string& t, const Scope& s, int depth) {
        std::vector<std::pair<std::string, std::string>> vars;
        for (const auto& v : s.vars)
            if (is_sub(v.second, t)) vars.push_back(v);

        std::vector<std::function<Expr()>> options;
        auto use_var = [&] { return Expr::var(rng_.pick(vars).first); };
        if (!vars.empty()) {
            options.push_back(use_var);
            options.push_back(use_var);
        }
        if (depth > 0) {
            std::vector<FieldInfo> reads;
            for (const auto& f : all_fields())
                if (is_sub(f.type, t) && (!f.composite || f.rank < s.rank_limit)) reads.push_back(f);
            if (!reads.empty())
                options.push_back([&, reads] {
                    const FieldInfo& f = rng_.pick(reads);
                    return Expr::field(gen_class(f.owner, s, depth - 1), f.name);
                });

            std::vector<MethodInfo> calls;
            for (const auto& m : all_methods())
                if (m.ret.is_class() && is_sub(m.ret.class_name(), t) && m.rank < s.rank_limit) calls.push_back(m);
            if (!calls.empty())
                options.push_back([&, calls] {
                    const MethodInfo& m = rng_.pick(calls);
                    Expr recv = gen_class(m.owner, s, depth - 1);
                    return Expr::invoke(recv, m.name, gen_args(m.param_types, s, depth - 1));
                });

            options.push_back([&] {
                std::string c = rng_.pick(subclasses_of(t));
                return Expr::make_new(c, gen_args(source_types(c), s, depth - 1));
            });

            if (!s.init_only) {
                options.push_back([&] {
                    std::string c = rng_.pick(all_classes());
                    Expr bound = gen_class(c, s, depth - 1);
                    Scope inner = s;
                    std::string x = fresh_var();
                    inner.vars.push_back({x, c});
                    return Expr::let(x, bound, gen_class(t, inner, depth - 1));
                });
                options.push_back([&] {
                    Expr first = gen_unit(s, depth - 1);
                    return Expr::seq(first, gen_class(t, s, depth - 1));
                });
            }
        }
        if (options.empty()) return minimal_new(t);
        if (depth == 0 && vars.empty()) return minimal_new(t);
        return rng_.pick(options)();
    }

    std::optional<Expr> gen_assign(const Scope& s, int depth) {
        std::vector<FieldInfo> targets;
        for (const auto& f : all_fields())
            if (!f.composite) targets.push_back(f);
        if (targets.empty()) return std::nullopt;
        const FieldInfo& f = rng_.pick(targets);
        Expr recv = gen_class(f.owner, s, depth - 1);
        return Expr::assign(recv, f.name, gen_class(f.type, s, depth - 1));
    }

    std::optional<Expr> gen_subscribe(const Scope& s, int depth) {
        if (s.in_handler && !cfg_.subscribe_in_handlers) return std::nullopt;
        std::vector<FieldInfo> targets;
        for (const auto& f : all_fields())
            if (f.modifier == Modifier::Signal) targets.push_back(f);
        if (targets.empty()) return std::nullopt;
        const FieldInfo& f = rng_.pick(targets);
        Expr recv = gen_class(f.owner, s, depth - 1);
        Scope h = s;
        h.in_handler = true;
        return Expr::subscribe(recv, f.name, gen_unit(h, depth - 1));
    }

    /// Expression of type Unit.
    Expr gen_unit(const Scope& s, int depth) {
        std::vector<std::function<Expr()>> options;
        options.push_back([] { return Expr::empty(); });
        if (depth > 0 && !s.init_only) {
            options.push_back([&] {
                auto e = gen_assign(s, depth);
                return e ? *e : Expr::empty();
            });
            options.push_back([&] {
                auto e = gen_assign(s, depth);
                return e ? *e : Expr::empty();
            });
            if (rng_.chance(cfg_.subscribe_probability))
                options.push_back([&] {
                    auto e = gen_subscribe(s, depth);
                    return e ? *e : Expr::empty();
                });
            options.push_back([&] {
                Expr first = gen_unit(s, depth - 1);
                return Expr::seq(first, gen_unit(s, depth - 1));
            });
            std::vector<MethodInfo> calls;
            for (const auto& m : all_methods())
                if (m.ret.is_unit() && m.rank < s.rank_limit) calls.push_back(m);
            if (!calls.empty())
                options.push_back([&, calls] {
                    const MethodInfo& m = rng_.pick(calls);
                    Expr recv = gen_class(m.owner, s, depth - 1);
                    return Expr::invoke(recv, m.name, gen_args(m.param_types, s, depth - 1));
                });
            options.push_back([&] {
                std::string c = rng_.pick(all_classes());
                Expr bound = gen_class(c, s, depth - 1);
                Scope inner = s;
                std::string x = fresh_var();
                inner.vars.push_back({x, c});
                return Expr::let(x, bound, gen_unit(inner, depth - 1));
            });
        }
        return rng_.pick(options)();
    }

    GenConfig cfg_;
    Rng rng_;
    std::vector<std::string> names_;
    std::map<std::string, std::string> parent_;
    std::map<std::string, std::vector<FieldInfo>> fields_;
    std::map<std::string, std::vector<MethodInfo>> methods_;
    std::vector<PendingClass> classes_;
    int next_rank_ = 0;
    int next_field_ = 0;
    int next_method_ = 0;
    int next_var_ = 0;
};

}  // namespace

Program generate_program(const GenConfig& cfg) {
    return Generator(cfg).run();
}

}  // namespace fsj
