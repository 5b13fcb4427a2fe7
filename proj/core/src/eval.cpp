#include "fsj/eval.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace fsj {

Location ObjectStore::allocate(std::string cls, std::vector<Location> args) {
    Location loc{next_++};
    cells_.emplace(loc, ObjectRecord{std::move(cls), std::move(args)});
    return loc;
}

const ObjectRecord* ObjectStore::find(Location loc) const {
    auto it = cells_.find(loc);
    return it == cells_.end() ? nullptr : &it->second;
}

void ObjectStore::set_arg(Location loc, std::size_t index, Location value) {
    cells_.at(loc).args.at(index) = value;
}

Expr concat(const std::vector<Expr>& exprs) {
    if (exprs.empty()) return Expr::empty();
    Expr out = exprs.back();
    for (auto it = exprs.rbegin() + 1; it != exprs.rend(); ++it) out = Expr::seq(*it, out);
    return out;
}

Expr HandlerStore::lookup(const FieldKey& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? Expr::empty() : concat(it->second);
}

std::size_t HandlerStore::handler_count(const FieldKey& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.size();
}

const std::vector<Expr>& HandlerStore::handlers(const FieldKey& key) const {
    static const std::vector<Expr> none;
    auto it = entries_.find(key);
    return it == entries_.end() ? none : it->second;
}

void HandlerStore::subscribe(const FieldKey& key, Expr handler) {
    entries_[key].push_back(std::move(handler));
}

MachineState initial_state(const Expr& main, std::uint64_t fuel) {
    MachineState s;
    s.expr = main;
    s.fuel = fuel;
    return s;
}

std::string_view to_string(Rule r) {
    switch (r) {
        case Rule::Field: return "R-FIELD";
        case Rule::FieldS: return "R-FIELDS";
        case Rule::Invk: return "R-INVK";
        case Rule::New: return "R-NEW";
        case Rule::Assign: return "R-ASSIGN";
        case Rule::AssignS: return "R-ASSIGNS";
        case Rule::AssignCont: return "R-ASSIGNCONT";
        case Rule::Subscribe: return "R-SUBSCRIBE";
        case Rule::Cat: return "R-CAT";
        case Rule::Let: return "R-LET";
    }
    return "?";
}

std::string_view to_string(TraceKind k) {
    switch (k) {
        case TraceKind::Step: return "step";
        case TraceKind::Alloc: return "alloc";
        case TraceKind::SignalWrite: return "signal-write";
        case TraceKind::PlainWrite: return "plain-write";
        case TraceKind::HandlerEnqueue: return "handler-enqueue";
        case TraceKind::SubscribeRegistered: return "subscribe";
    }
    return "?";
}

std::string_view to_string(Mutation m) {
    switch (m) {
        case Mutation::None: return "none";
        case Mutation::SkipThisSubstitution: return "skip-this-subst";
        case Mutation::SwapAssignDispatch: return "swap-assign";
    }
    return "?";
}

std::optional<Mutation> parse_mutation(std::string_view name) {
    for (Mutation m : {Mutation::None, Mutation::SkipThisSubstitution, Mutation::SwapAssignDispatch})
        if (to_string(m) == name) return m;
    return std::nullopt;
}

std::string_view to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Terminal: return "terminal";
        case RunStatus::Stuck: return "stuck";
        case RunStatus::FuelExhausted: return "fuel";
    }
    return "?";
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings) {
    if (bindings.empty()) return e;
    auto sub = [&](const Expr& x) { return substitute(x, bindings); };
    auto sub_all = [&](const std::vector<Expr>& xs) {
        std::vector<Expr> out;
        out.reserve(xs.size());
        for (const auto& x : xs) out.push_back(sub(x));
        return out;
    };
    return std::visit(
        [&](const auto& n) -> Expr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, expr::Var>) {
                auto it = bindings.find(n.name);
                return it == bindings.end() ? e : it->second;
            } else if constexpr (std::is_same_v<T, expr::FieldAccess>) {
                return Expr::field(sub(n.recv), n.field, e.span());
            } else if constexpr (std::is_same_v<T, expr::Invoke>) {
                return Expr::invoke(sub(n.recv), n.method, sub_all(n.args), e.span());
            } else if constexpr (std::is_same_v<T, expr::New>) {
                return Expr::make_new(n.cls, sub_all(n.args), e.span());
            } else if constexpr (std::is_same_v<T, expr::Assign>) {
                return Expr::assign(sub(n.recv), n.field, sub(n.value), e.span());
            } else if constexpr (std::is_same_v<T, expr::Seq>) {
                return Expr::seq(sub(n.first), sub(n.second), e.span());
            } else if constexpr (std::is_same_v<T, expr::Subscribe>) {
                return Expr::subscribe(sub(n.recv), n.field, sub(n.handler), e.span());
            } else if constexpr (std::is_same_v<T, expr::EffectBrace>) {
                return Expr::effect_brace(sub(n.body), n.key, e.span());
            } else if constexpr (std::is_same_v<T, expr::Let>) {
                if (!bindings.count(n.var)) return Expr::let(n.var, sub(n.bound), sub(n.body), e.span());
                auto inner = bindings;
                inner.erase(n.var);
                return Expr::let(n.var, sub(n.bound), substitute(n.body, inner), e.span());
            } else {
                return e;
            }
        },
        e.rep().node);
}

bool contains(const Expr& e, const FieldKey& key) {
    if (const auto* fa = e.as<expr::FieldAccess>()) {
        if (fa->field == key.field) {
            if (const auto* l = fa->recv.as<expr::Loc>(); l && l->loc == key.loc) return true;
        }
        return contains(fa->recv, key);
    }
    if (const auto* inv = e.as<expr::Invoke>()) {
        if (contains(inv->recv, key)) return true;
        return std::any_of(inv->args.begin(), inv->args.end(), [&](const Expr& a) { return contains(a, key); });
    }
    if (const auto* nw = e.as<expr::New>())
        return std::any_of(nw->args.begin(), nw->args.end(), [&](const Expr& a) { return contains(a, key); });
    return false;
}

namespace {

std::vector<FieldKey> direct_sinks(const ClassTable& ct, const ObjectStore& store, const FieldKey& key) {
    std::vector<FieldKey> out;
    for (const auto& [loc, obj] : store.cells()) {
        const std::map<std::string, Expr> self{{std::string(kThis), Expr::loc(loc)}};
        for (const auto& f : ct.composite(obj.cls))
            if (contains(substitute(f.init, self), key)) out.push_back(FieldKey{loc, f.name});
    }
    return out;
}

}  // namespace

std::vector<FieldKey> effect(const ClassTable& ct, const ObjectStore& store, const FieldKey& key) {
    std::set<FieldKey> reached;
    std::deque<FieldKey> work{key};
    while (!work.empty()) {
        FieldKey k = work.front();
        work.pop_front();
        for (auto& sink : direct_sinks(ct, store, k))
            if (reached.insert(sink).second) work.push_back(sink);
    }
    std::vector<std::pair<std::pair<Location, std::size_t>, FieldKey>> ordered;
    for (const auto& k : reached) {
        const ObjectRecord* obj = store.find(k.loc);
        ordered.push_back({{k.loc, *ct.composite_index(obj->cls, k.field)}, k});
    }
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<FieldKey> out;
    out.reserve(ordered.size());
    for (auto& [_, k] : ordered) out.push_back(std::move(k));
    return out;
}

std::vector<Expr> collect_handlers(const ClassTable& ct, const HandlerStore& handlers, const ObjectStore& store,
                                   const FieldKey& key) {
    std::vector<Expr> out;
    for (const auto& sink : effect(ct, store, key)) {
        const auto& hs = handlers.handlers(sink);
        out.insert(out.end(), hs.begin(), hs.end());
    }
    return out;
}

Expr handlers_of(const ClassTable& ct, const HandlerStore& handlers, const ObjectStore& store, const FieldKey& key) {
    return concat(collect_handlers(ct, handlers, store, key));
}

namespace {

struct Stuck {
    std::string reason;
};

enum class Next { Redex, Descend, Stuck };

struct Classified {
    Next next = Next::Redex;
    std::size_t hole = 0;
    std::string reason;
};

// A hole that must hold a location before the node can contract.
bool value_hole(const Expr& child, std::size_t index, Classified& out) {
    if (child.is_value()) return true;
    if (child.is_empty()) {
        out = {Next::Stuck, index, "empty expression in redex position"};
    } else {
        out = {Next::Descend, index, {}};
    }
    return false;
}

// A hole that must hold the empty expression before the node can contract.
Classified unit_hole(const Expr& child) {
    if (child.is_empty()) return {Next::Redex, 0, {}};
    if (child.is_value()) return {Next::Stuck, 0, "location " + to_string(child.location()) + " in redex position"};
    return {Next::Descend, 0, {}};
}

// Evaluation contexts: which hole of `e` evaluation continues in, or
// whether `e` itself is the redex. Holes are numbered as in children().
Classified classify(const Expr& e) {
    Classified out;
    return std::visit(
        [&](const auto& n) -> Classified {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, expr::Var>) {
                return {Next::Stuck, 0, "free variable " + n.name};
            } else if constexpr (std::is_same_v<T, expr::FieldAccess> || std::is_same_v<T, expr::Subscribe>) {
                if (!value_hole(n.recv, 0, out)) return out;
                return {};
            } else if constexpr (std::is_same_v<T, expr::Invoke>) {
                if (!value_hole(n.recv, 0, out)) return out;
                for (std::size_t i = 0; i < n.args.size(); ++i)
                    if (!value_hole(n.args[i], i + 1, out)) return out;
                return {};
            } else if constexpr (std::is_same_v<T, expr::New>) {
                for (std::size_t i = 0; i < n.args.size(); ++i)
                    if (!value_hole(n.args[i], i, out)) return out;
                return {};
            } else if constexpr (std::is_same_v<T, expr::Assign>) {
                if (!value_hole(n.recv, 0, out)) return out;
                if (!value_hole(n.value, 1, out)) return out;
                return {};
            } else if constexpr (std::is_same_v<T, expr::Seq>) {
                return unit_hole(n.first);
            } else if constexpr (std::is_same_v<T, expr::EffectBrace>) {
                return unit_hole(n.body);
            } else if constexpr (std::is_same_v<T, expr::Let>) {
                if (!value_hole(n.bound, 0, out)) return out;
                return {};
            } else if constexpr (std::is_same_v<T, expr::Loc>) {
                return {Next::Stuck, 0, "location " + to_string(n.loc) + " in redex position"};
            } else {
                return {Next::Stuck, 0, "empty expression in redex position"};
            }
        },
        e.rep().node);
}

/// The expression split into the evaluation context (a stack of frames,
/// each a node and the hole evaluation continues in) and the focused
/// subterm. Finding the next redex after a contraction only revisits the
/// frames whose holes were just filled, so a step costs amortized constant
/// work however deep the term is.
class Zipper {
public:
    explicit Zipper(Expr e) : focus_(std::move(e)) {}

    /// Moves the focus to the next redex. Returns false when the whole
    /// expression is a location or empty, and throws Stuck when no rule
    /// applies.
    bool seek() {
        while (true) {
            if (focus_.is_value() || focus_.is_empty()) {
                if (frames_.empty()) return false;
                pop();
            }
            Classified c = classify(focus_);
            if (c.next == Next::Redex) return true;
            if (c.next == Next::Stuck) throw Stuck{c.reason};
            Expr child = children(focus_)[c.hole];
            frames_.push_back({std::move(focus_), c.hole});
            focus_ = std::move(child);
        }
    }

    const Expr& focus() const { return focus_; }
    void replace_focus(Expr e) { focus_ = std::move(e); }

    /// The whole expression, plugging the focus into every frame.
    Expr plug() const {
        Expr out = focus_;
        for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) out = fill(*it, out);
        return out;
    }

private:
    struct Frame {
        Expr node;
        std::size_t hole;
    };

    static Expr fill(const Frame& f, const Expr& e) {
        auto kids = children(f.node);
        kids[f.hole] = e;
        return with_children(f.node, kids);
    }

    void pop() {
        focus_ = fill(frames_.back(), focus_);
        frames_.pop_back();
    }

    Expr focus_;
    std::vector<Frame> frames_;
};

class Reducer {
public:
    Reducer(const ClassTable& ct, MachineState& state, const EvalOptions& options)
        : ct_(ct), state_(state), options_(options) {}

    /// Contracts a redex. Every premise is checked before the stores are
    /// touched, so a Stuck exception leaves the state as it was.
    Expr contract(const Expr& e) {
        info_.reset();
        return std::visit([&](const auto& n) { return rule(e, n); }, e.rep().node);
    }

    StepInfo take_info() { return std::move(*info_); }

private:
    template <class T>
    Expr rule(const Expr&, const T&) {
        throw Stuck{"no reduction rule applies"};
    }

    Expr rule(const Expr& e, const expr::FieldAccess& n) { return contract_field(e, n.recv.location(), n.field); }
    Expr rule(const Expr& e, const expr::Invoke& n) { return contract_invoke(e, n); }
    Expr rule(const Expr& e, const expr::New& n) { return contract_new(e, n); }
    Expr rule(const Expr& e, const expr::Assign& n) {
        return contract_assign(e, n.recv.location(), n.field, n.value.location());
    }

    // R-CAT
    Expr rule(const Expr& e, const expr::Seq& n) { return record(Rule::Cat, e, n.second); }

    // R-SUBSCRIBE
    Expr rule(const Expr& e, const expr::Subscribe& n) {
        FieldKey key{n.recv.location(), n.field};
        object(key.loc);
        state_.handlers.subscribe(key, n.handler);
        Expr out = record(Rule::Subscribe, e, Expr::empty());
        TraceEvent ev;
        ev.kind = TraceKind::SubscribeRegistered;
        ev.key = key;
        ev.handler_count = state_.handlers.handler_count(key);
        info_->events.push_back(ev);
        return out;
    }

    // R-ASSIGNCONT
    Expr rule(const Expr& e, const expr::EffectBrace& n) {
        auto hs = collect_handlers(ct_, state_.handlers, state_.store, n.key);
        Expr out = record(Rule::AssignCont, e, concat(hs));
        if (!hs.empty()) enqueue(n.key, hs.size());
        return out;
    }

    // R-LET
    Expr rule(const Expr& e, const expr::Let& n) { return record(Rule::Let, e, substitute(n.body, {{n.var, n.bound}})); }

    const ObjectRecord& object(Location loc) {
        const ObjectRecord* obj = state_.store.find(loc);
        if (!obj) throw Stuck{"dangling location " + to_string(loc)};
        return *obj;
    }

    // R-FIELD and R-FIELDS
    Expr contract_field(const Expr& e, Location loc, const std::string& field) {
        const ObjectRecord& obj = object(loc);
        if (auto i = ct_.source_index(obj.cls, field)) {
            if (*i >= obj.args.size()) throw Stuck{"object " + to_string(loc) + " lacks field " + field};
            return record(Rule::Field, e, Expr::loc(obj.args[*i]));
        }
        if (auto i = ct_.composite_index(obj.cls, field)) {
            const Expr& init = ct_.composite(obj.cls)[*i].init;
            if (options_.mutation == Mutation::SkipThisSubstitution) return record(Rule::FieldS, e, init);
            return record(Rule::FieldS, e, substitute(init, {{std::string(kThis), Expr::loc(loc)}}));
        }
        throw Stuck{"class " + obj.cls + " has no field " + field};
    }

    // R-INVK
    Expr contract_invoke(const Expr& e, const expr::Invoke& n) {
        Location loc = n.recv.location();
        const ObjectRecord& obj = object(loc);
        auto body = ct_.mbody(n.method, obj.cls);
        if (!body) throw Stuck{"class " + obj.cls + " has no method " + n.method};
        if (body->params.size() != n.args.size()) throw Stuck{"arity mismatch calling " + n.method};
        std::map<std::string, Expr> bindings{{std::string(kThis), n.recv}};
        for (std::size_t i = 0; i < n.args.size(); ++i) bindings[body->params[i]] = n.args[i];
        return record(Rule::Invk, e, substitute(body->body, bindings));
    }

    // R-NEW
    Expr contract_new(const Expr& e, const expr::New& n) {
        if (!ct_.contains(n.cls)) throw Stuck{"unknown class " + n.cls};
        if (ct_.source(n.cls).size() != n.args.size()) throw Stuck{"arity mismatch constructing " + n.cls};
        std::vector<Location> args;
        for (const auto& a : n.args) {
            object(a.location());
            args.push_back(a.location());
        }
        Location loc = state_.store.allocate(n.cls, std::move(args));
        state_.store_typing[loc] = n.cls;
        Expr out = record(Rule::New, e, Expr::loc(loc));
        TraceEvent ev;
        ev.kind = TraceKind::Alloc;
        ev.loc = loc;
        ev.cls = n.cls;
        info_->events.push_back(ev);
        return out;
    }

    // R-ASSIGN and R-ASSIGNS
    Expr contract_assign(const Expr& e, Location loc, const std::string& field, Location value) {
        const ObjectRecord& obj = object(loc);
        object(value);
        auto i = ct_.source_index(obj.cls, field);
        if (!i || *i >= obj.args.size()) throw Stuck{"class " + obj.cls + " has no assignable field " + field};
        bool is_signal = ct_.source(obj.cls)[*i].modifier == Modifier::Signal;
        if (options_.mutation == Mutation::SwapAssignDispatch) is_signal = !is_signal;

        FieldKey key{loc, field};
        Location old = obj.args[*i];
        state_.store.set_arg(loc, *i, value);

        TraceEvent write;
        write.key = key;
        write.old_value = old;
        write.new_value = value;
        if (!is_signal) {
            Expr out = record(Rule::Assign, e, Expr::empty());
            write.kind = TraceKind::PlainWrite;
            info_->events.push_back(write);
            return out;
        }
        Expr out = record(Rule::AssignS, e, Expr::effect_brace(state_.handlers.lookup(key), key));
        write.kind = TraceKind::SignalWrite;
        info_->events.push_back(write);
        if (std::size_t n = state_.handlers.handler_count(key); n > 0) enqueue(key, n);
        return out;
    }

    void enqueue(const FieldKey& key, std::size_t count) {
        TraceEvent ev;
        ev.kind = TraceKind::HandlerEnqueue;
        ev.key = key;
        ev.handler_count = count;
        info_->events.push_back(ev);
    }

    Expr record(Rule rule, const Expr& redex, Expr contractum) {
        info_.emplace(StepInfo{rule, redex, contractum, {}});
        return contractum;
    }

    const ClassTable& ct_;
    MachineState& state_;
    const EvalOptions& options_;
    std::optional<StepInfo> info_;
};

// One reduction at the focus of `z`, which must be a redex. Updates the
// counters and, when tracing, prepends the Step event carrying the whole
// post-step expression.
StepInfo apply(const ClassTable& ct, MachineState& state, Zipper& z, const EvalOptions& options) {
    Reducer reducer(ct, state, options);
    z.replace_focus(reducer.contract(z.focus()));
    --state.fuel;
    ++state.steps;
    StepInfo info = reducer.take_info();
    if (options.record_trace) {
        TraceEvent ev;
        ev.kind = TraceKind::Step;
        ev.rule = info.rule;
        ev.expr = z.plug();
        info.events.insert(info.events.begin(), ev);
    }
    for (auto& ev : info.events) ev.step = state.steps;
    return info;
}

}  // namespace

StepOutcome step(const ClassTable& ct, MachineState& state, const EvalOptions& options) {
    StepOutcome out;
    Zipper z(state.expr);
    try {
        if (!z.seek()) {
            out.status = StepStatus::Terminal;
            return out;
        }
        if (state.fuel == 0) {
            out.status = StepStatus::FuelExhausted;
            out.diagnostic = "step budget exhausted";
            return out;
        }
        StepInfo info = apply(ct, state, z, options);
        state.expr = z.plug();
        out.status = StepStatus::Stepped;
        out.info = std::move(info);
    } catch (const Stuck& stuck) {
        out.status = StepStatus::Stuck;
        out.diagnostic = stuck.reason;
    }
    return out;
}

std::optional<FieldKey> pending_effect(const Expr& e) {
    std::optional<FieldKey> found;
    const Expr* cur = &e;
    while (true) {
        const Expr* nextp = nullptr;
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, expr::EffectBrace>) {
                    found = n.key;
                    nextp = &n.body;
                } else if constexpr (std::is_same_v<T, expr::Seq>) {
                    nextp = &n.first;
                } else if constexpr (std::is_same_v<T, expr::Let>) {
                    nextp = &n.bound;
                } else if constexpr (std::is_same_v<T, expr::FieldAccess> || std::is_same_v<T, expr::Subscribe>) {
                    nextp = &n.recv;
                } else if constexpr (std::is_same_v<T, expr::Assign>) {
                    nextp = n.recv.is_value() ? &n.value : &n.recv;
                } else if constexpr (std::is_same_v<T, expr::Invoke>) {
                    nextp = &n.recv;
                    if (n.recv.is_value()) {
                        nextp = nullptr;
                        for (const auto& a : n.args)
                            if (!a.is_value()) {
                                nextp = &a;
                                break;
                            }
                    }
                } else if constexpr (std::is_same_v<T, expr::New>) {
                    for (const auto& a : n.args)
                        if (!a.is_value()) {
                            nextp = &a;
                            break;
                        }
                }
            },
            cur->rep().node);
        if (!nextp) return found;
        cur = nextp;
    }
}

RunResult run(const ClassTable& ct, const Program& p, std::uint64_t fuel, const EvalOptions& options) {
    RunResult result;
    result.state = initial_state(p.main, fuel);
    MachineState& state = result.state;
    Zipper z(p.main);
    try {
        while (z.seek()) {
            if (state.fuel == 0) {
                state.expr = z.plug();
                result.status = RunStatus::FuelExhausted;
                result.pending_key = pending_effect(state.expr);
                result.diagnostic = "step budget exhausted";
                if (result.pending_key) result.diagnostic += "; pending effect on " + to_string(*result.pending_key);
                return result;
            }
            StepInfo info = apply(ct, state, z, options);
            if (options.record_trace)
                for (auto& ev : info.events) result.trace.push_back(std::move(ev));
        }
        result.status = RunStatus::Terminal;
    } catch (const Stuck& stuck) {
        result.status = RunStatus::Stuck;
        result.diagnostic = stuck.reason;
    }
    state.expr = z.plug();
    return result;
}

}  // namespace fsj
