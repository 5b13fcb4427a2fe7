#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fsj/ast.hpp"
#include "fsj/class_table.hpp"
#include "fsj/typecheck.hpp"

namespace fsj {

inline constexpr std::uint64_t kDefaultFuel = 100'000;

struct ObjectRecord {
    std::string cls;
    std::vector<Location> args;
    friend bool operator==(const ObjectRecord&, const ObjectRecord&) = default;
};

/// Object store: locations to constructed objects `new C(l...)`. Locations
/// are never reused, so the store only grows.
class ObjectStore {
public:
    Location allocate(std::string cls, std::vector<Location> args);
    const ObjectRecord* find(Location loc) const;
    void set_arg(Location loc, std::size_t index, Location value);

    const std::map<Location, ObjectRecord>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }

    friend bool operator==(const ObjectStore&, const ObjectStore&) = default;

private:
    std::map<Location, ObjectRecord> cells_;
    std::uint64_t next_ = 0;
};

/// Handler store. Each key holds the handlers registered to it, in
/// registration order; lookup() concatenates them into one expression.
class HandlerStore {
public:
    /// Right-nested `h1; (h2; ...)`, the single handler itself, or the
    /// empty expression when nothing is registered.
    Expr lookup(const FieldKey& key) const;
    std::size_t handler_count(const FieldKey& key) const;
    const std::vector<Expr>& handlers(const FieldKey& key) const;
    void subscribe(const FieldKey& key, Expr handler);

    const std::map<FieldKey, std::vector<Expr>>& entries() const { return entries_; }

    friend bool operator==(const HandlerStore&, const HandlerStore&) = default;

private:
    std::map<FieldKey, std::vector<Expr>> entries_;
};

/// `e1; e2; ...; en` nested to the right; empty list gives the empty expression.
Expr concat(const std::vector<Expr>& exprs);

struct MachineState {
    HandlerStore handlers;
    ObjectStore store;
    Expr expr;
    StoreTyping store_typing;
    std::uint64_t fuel = kDefaultFuel;
    std::uint64_t steps = 0;
};

MachineState initial_state(const Expr& main, std::uint64_t fuel = kDefaultFuel);

enum class Rule { Field, FieldS, Invk, New, Assign, AssignS, AssignCont, Subscribe, Cat, Let };

inline constexpr Rule kAllRules[] = {Rule::Field,  Rule::FieldS,     Rule::Invk,      Rule::New, Rule::Assign,
                                     Rule::AssignS, Rule::AssignCont, Rule::Subscribe, Rule::Cat, Rule::Let};

/// "R-FIELD", "R-FIELDS", ...
std::string_view to_string(Rule r);

enum class TraceKind { Step, Alloc, SignalWrite, PlainWrite, HandlerEnqueue, SubscribeRegistered };

std::string_view to_string(TraceKind k);

struct TraceEvent {
    TraceKind kind = TraceKind::Step;
    std::uint64_t step = 0;
    // Step
    Rule rule = Rule::Cat;
    Expr expr;
    // Alloc
    Location loc;
    std::string cls;
    // writes, enqueues, subscriptions
    FieldKey key;
    Location old_value;
    Location new_value;
    std::size_t handler_count = 0;
};

/// Deliberate interpreter faults, used to show that the metatheory oracles
/// are not vacuous. Never enabled outside tests and `fsj meta --mutate`.
enum class Mutation { None, SkipThisSubstitution, SwapAssignDispatch };

std::string_view to_string(Mutation m);
std::optional<Mutation> parse_mutation(std::string_view name);

struct EvalOptions {
    Mutation mutation = Mutation::None;
    bool record_trace = true;
};

struct StepInfo {
    Rule rule;
    /// The redex and what it was contracted to, before plugging back into
    /// the evaluation context.
    Expr redex;
    Expr contractum;
    std::vector<TraceEvent> events;
};

enum class StepStatus { Stepped, Terminal, Stuck, FuelExhausted };

struct StepOutcome {
    StepStatus status = StepStatus::Terminal;
    std::optional<StepInfo> info;
    std::string diagnostic;
};

/// Capture-avoiding only in the sense needed here: replacements are closed
/// values, and `let` stops substitution of the variable it rebinds.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings);

/// Lexical occurrence of the field access `key` inside `e`, through field
/// receivers, invocation receivers and arguments, and constructor arguments.
bool contains(const Expr& e, const FieldKey& key);

/// Transitive sinks of `key`: composite fields of objects in `store` whose
/// initializer (with `this` bound to the object) contains `key` or another
/// sink. Sorted by location, then composite declaration order.
std::vector<FieldKey> effect(const ClassTable& ct, const ObjectStore& store, const FieldKey& key);

/// Handlers registered on the sinks of `key`, in effect() order.
std::vector<Expr> collect_handlers(const ClassTable& ct, const HandlerStore& handlers, const ObjectStore& store,
                                   const FieldKey& key);

/// concat(collect_handlers(...)).
Expr handlers_of(const ClassTable& ct, const HandlerStore& handlers, const ObjectStore& store, const FieldKey& key);

/// Applies one reduction at the unique redex picked by the evaluation
/// contexts. Terminal states are locations and the empty expression.
StepOutcome step(const ClassTable& ct, MachineState& state, const EvalOptions& options = {});

/// Key of the innermost effect brace on the evaluation path, if any.
std::optional<FieldKey> pending_effect(const Expr& e);

enum class RunStatus { Terminal, Stuck, FuelExhausted };

std::string_view to_string(RunStatus s);

struct RunResult {
    RunStatus status = RunStatus::Terminal;
    MachineState state;
    std::vector<TraceEvent> trace;
    std::string diagnostic;
    std::optional<FieldKey> pending_key;
};

RunResult run(const ClassTable& ct, const Program& p, std::uint64_t fuel = kDefaultFuel,
              const EvalOptions& options = {});

}  // namespace fsj
