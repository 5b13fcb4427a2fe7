#include <doctest.h>

#include "fsj/trace.hpp"
#include "support.hpp"

using namespace fsj;
using fsj::test::L;

namespace {

const char* kCells = R"(
class A extends Object {
    A() { super(); }
}
class Box extends Object {
    A plain;
    signal A sig;
    signal A view = this.sig;
    Box(A plain, A sig) { super(); this.plain = plain; this.sig = sig; }
    A get() { this.plain }
}
unit)";

EvalOptions quiet() {
    EvalOptions o;
    o.record_trace = false;
    return o;
}

// A state with @0 : A and @1 = new Box(@0, @0), focused on `e`.
MachineState boxed(const Expr& e) {
    MachineState s = initial_state(e);
    s.store.allocate("A", {});
    s.store.allocate("Box", {L(0), L(0)});
    s.store_typing = {{L(0), "A"}, {L(1), "Box"}};
    return s;
}

Expr at(std::uint64_t id) { return Expr::loc(L(id)); }

// Number of Succ wrappers around a Zero, counted by walking the store.
int succ_depth(const ObjectStore& store, Location loc) {
    int depth = 0;
    while (true) {
        const ObjectRecord* obj = store.find(loc);
        REQUIRE(obj != nullptr);
        if (obj->cls == "Zero") return depth;
        REQUIRE(obj->cls == "Succ");
        loc = obj->args.at(0);
        ++depth;
    }
}

std::size_t count_kind(const std::vector<TraceEvent>& trace, TraceKind kind) {
    return static_cast<std::size_t>(
        std::count_if(trace.begin(), trace.end(), [&](const TraceEvent& ev) { return ev.kind == kind; }));
}

std::size_t count_rule(const std::vector<TraceEvent>& trace, Rule rule) {
    return static_cast<std::size_t>(std::count_if(trace.begin(), trace.end(), [&](const TraceEvent& ev) {
        return ev.kind == TraceKind::Step && ev.rule == rule;
    }));
}

}  // namespace

TEST_SUITE("single steps") {
    TEST_CASE("R-CAT peels an empty left operand") {
        auto l = fsj::test::load_source(kCells);
        MachineState s = boxed(Expr::seq(Expr::empty(), at(1)));
        StepOutcome o = step(l.table, s);
        REQUIRE(o.status == StepStatus::Stepped);
        CHECK(o.info->rule == Rule::Cat);
        CHECK(s.expr == at(1));
    }

    TEST_CASE("R-LET substitutes the bound location") {
        auto l = fsj::test::load_source(kCells);
        MachineState s = boxed(Expr::let("x", at(0), Expr::var("x")));
        StepOutcome o = step(l.table, s);
        REQUIRE(o.status == StepStatus::Stepped);
        CHECK(o.info->rule == Rule::Let);
        CHECK(s.expr == at(0));
    }

    TEST_CASE("R-ASSIGN on a plain field yields unit and updates the object") {
        auto l = fsj::test::load_source(kCells);
        MachineState s = boxed(Expr::assign(at(1), "plain", at(2)));
        s.store.allocate("A", {});
        s.store_typing[L(2)] = "A";
        StepOutcome o = step(l.table, s);
        REQUIRE(o.status == StepStatus::Stepped);
        CHECK(o.info->rule == Rule::Assign);
        CHECK(s.expr.is_empty());
        CHECK(s.store.find(L(1))->args == std::vector<Location>{L(2), L(0)});
        CHECK(s.handlers.entries().empty());
    }

    TEST_CASE("R-ASSIGNS with no handlers opens an empty brace, then R-ASSIGNCONT closes it") {
        auto l = fsj::test::load_source(kCells);
        MachineState s = boxed(Expr::assign(at(1), "sig", at(0)));
        StepOutcome first = step(l.table, s);
        REQUIRE(first.status == StepStatus::Stepped);
        CHECK(first.info->rule == Rule::AssignS);
        CHECK(s.expr == Expr::effect_brace(Expr::empty(), FieldKey{L(1), "sig"}));
        StepOutcome second = step(l.table, s);
        REQUIRE(second.status == StepStatus::Stepped);
        CHECK(second.info->rule == Rule::AssignCont);
        CHECK(s.expr.is_empty());
        CHECK(step(l.table, s).status == StepStatus::Terminal);
    }

    TEST_CASE("R-ASSIGNS injects the handlers registered on the written key") {
        auto l = fsj::test::load_source(kCells);
        Expr h1 = Expr::assign(at(1), "plain", at(0));
        MachineState s = boxed(Expr::assign(at(1), "sig", at(0)));
        s.handlers.subscribe(FieldKey{L(1), "sig"}, h1);
        s.handlers.subscribe(FieldKey{L(1), "sig"}, Expr::seq(Expr::empty(), Expr::empty()));
        REQUIRE(step(l.table, s).status == StepStatus::Stepped);
        auto* brace = s.expr.as<expr::EffectBrace>();
        REQUIRE(brace != nullptr);
        CHECK(brace->body == Expr::seq(h1, Expr::seq(Expr::empty(), Expr::empty())));
    }

    TEST_CASE("R-ASSIGNCONT runs the handlers of the sinks") {
        auto l = fsj::test::load_source(kCells);
        Expr h = Expr::assign(at(1), "plain", at(0));
        MachineState s = boxed(Expr::effect_brace(Expr::empty(), FieldKey{L(1), "sig"}));
        s.handlers.subscribe(FieldKey{L(1), "view"}, h);
        REQUIRE(step(l.table, s).status == StepStatus::Stepped);
        CHECK(s.expr == h);
    }

    TEST_CASE("R-FIELD reads a stored value") {
        auto l = fsj::test::load_source(kCells);
        MachineState s = boxed(Expr::field(at(1), "plain"));
        StepOutcome o = step(l.table, s);
        REQUIRE(o.status == StepStatus::Stepped);
        CHECK(o.info->rule == Rule::Field);
        CHECK(s.expr == at(0));
    }

    TEST_CASE("R-FIELDS unfolds the initializer with this bound to the receiver") {
        auto l = fsj::test::load_source(kCells);
        MachineState s = boxed(Expr::field(at(1), "view"));
        ObjectStore before = s.store;
        StepOutcome o = step(l.table, s);
        REQUIRE(o.status == StepStatus::Stepped);
        CHECK(o.info->rule == Rule::FieldS);
        CHECK(s.expr == Expr::field(at(1), "sig"));
        CHECK(s.store == before);
    }

    TEST_CASE("R-INVK substitutes receiver and arguments into the body") {
        auto l = fsj::test::load_source(kCells);
        MachineState s = boxed(Expr::invoke(at(1), "get", {}));
        StepOutcome o = step(l.table, s);
        REQUIRE(o.status == StepStatus::Stepped);
        CHECK(o.info->rule == Rule::Invk);
        CHECK(s.expr == Expr::field(at(1), "plain"));
    }

    TEST_CASE("R-NEW allocates a fresh location and types it") {
        auto l = fsj::test::load_source(kCells);
        MachineState s = boxed(Expr::make_new("Box", {at(0), at(1)}));
        StepOutcome o = step(l.table, s);
        REQUIRE(o.status == StepStatus::Stepped);
        CHECK(o.info->rule == Rule::New);
        CHECK(s.expr == at(2));
        CHECK(s.store.find(L(2))->cls == "Box");
        CHECK(s.store_typing.at(L(2)) == "Box");
    }

    TEST_CASE("R-SUBSCRIBE registers the handler without evaluating it") {
        auto l = fsj::test::load_source(kCells);
        Expr handler = Expr::seq(Expr::assign(at(1), "plain", Expr::make_new("A", {})), Expr::empty());
        MachineState s = boxed(Expr::subscribe(at(1), "sig", handler));
        StepOutcome o = step(l.table, s);
        REQUIRE(o.status == StepStatus::Stepped);
        CHECK(o.info->rule == Rule::Subscribe);
        CHECK(s.expr.is_empty());
        CHECK(s.store.size() == 2);
        CHECK(s.handlers.lookup(FieldKey{L(1), "sig"}) == handler);
    }

    TEST_CASE("handlers concatenate on the right in registration order") {
        HandlerStore hs;
        FieldKey key{L(0), "f"};
        CHECK(hs.lookup(key).is_empty());
        Expr a = Expr::var("a"), b = Expr::var("b"), c = Expr::var("c");
        hs.subscribe(key, a);
        CHECK(hs.lookup(key) == a);
        hs.subscribe(key, b);
        hs.subscribe(key, c);
        CHECK(hs.lookup(key) == Expr::seq(a, Expr::seq(b, c)));
        CHECK(hs.handler_count(key) == 3);
    }

    TEST_CASE("values are terminal") {
        auto l = fsj::test::load_source(kCells);
        MachineState s = boxed(at(0));
        CHECK(step(l.table, s).status == StepStatus::Terminal);
        s.expr = Expr::empty();
        CHECK(step(l.table, s).status == StepStatus::Terminal);
    }

    TEST_CASE("ill-formed states are stuck and left unchanged") {
        auto l = fsj::test::load_source(kCells);
        MachineState s = boxed(Expr::field(at(9), "plain"));
        StepOutcome o = step(l.table, s);
        CHECK(o.status == StepStatus::Stuck);
        CHECK_FALSE(o.diagnostic.empty());
        CHECK(s.expr == Expr::field(at(9), "plain"));
        CHECK(s.steps == 0);
        s.expr = Expr::seq(at(0), Expr::empty());
        CHECK(step(l.table, s).status == StepStatus::Stuck);
        s.expr = Expr::var("free");
        CHECK(step(l.table, s).status == StepStatus::Stuck);
    }

    TEST_CASE("fuel is spent one unit per step") {
        auto l = fsj::test::load_source(kCells);
        MachineState s = boxed(Expr::seq(Expr::empty(), Expr::seq(Expr::empty(), Expr::empty())));
        s.fuel = 1;
        CHECK(step(l.table, s).status == StepStatus::Stepped);
        CHECK(step(l.table, s).status == StepStatus::FuelExhausted);
        CHECK(s.steps == 1);
    }
}

TEST_SUITE("evaluation order") {
    TEST_CASE("constructor arguments evaluate left to right") {
        auto p = fsj::test::load_source(R"(
class A extends Object { A() { super(); } }
class B extends A { B() { super(); } }
class P extends Object { A x; A y; P(A x, A y) { super(); this.x = x; this.y = y; } }
new P(new A(), new B()))");
        RunResult res = run(p.table, p.program);
        REQUIRE(res.status == RunStatus::Terminal);
        CHECK(res.state.store.find(L(0))->cls == "A");
        CHECK(res.state.store.find(L(1))->cls == "B");
        CHECK(res.state.store.find(L(2))->cls == "P");
    }

    TEST_CASE("the receiver evaluates before the arguments") {
        auto p = fsj::test::load_source(R"(
class A extends Object { A() { super(); } A pick(A x) { x } }
class B extends A { B() { super(); } }
new A().pick(new B()))");
        RunResult r = run(p.table, p.program);
        REQUIRE(r.status == RunStatus::Terminal);
        CHECK(r.state.store.find(L(0))->cls == "A");
        CHECK(r.state.store.find(L(1))->cls == "B");
        CHECK(r.state.expr == at(1));
    }

    TEST_CASE("a handler's nested push completes before the outer handlers resume") {
        auto l = fsj::test::load_corpus("nested_push.fsj");
        RunResult r = run(l.table, l.program);
        REQUIRE(r.status == RunStatus::Terminal);
        bool saw_nested = false;
        for (const auto& ev : r.trace) {
            if (ev.kind != TraceKind::Step) continue;
            if (const auto* outer = ev.expr.as<expr::Seq>()) {
                if (const auto* brace = outer->first.as<expr::EffectBrace>())
                    saw_nested = saw_nested || (brace->body.is<expr::Seq>() &&
                                                    brace->body.as<expr::Seq>()->first.is<expr::EffectBrace>());
            }
        }
        CHECK(saw_nested);
        // The outer handler copies what the inner handler logged: the cell itself.
        CHECK(r.state.expr == at(2));
    }
}

TEST_SUITE("whole programs") {
    TEST_CASE("main unit takes no steps") {
        auto l = fsj::test::load_source("unit");
        RunResult r = run(l.table, l.program);
        CHECK(r.status == RunStatus::Terminal);
        CHECK(r.state.expr.is_empty());
        CHECK(r.state.steps == 0);
        CHECK(r.state.store.size() == 0);
        CHECK(r.trace.empty());
    }

    TEST_CASE("a fieldless object") {
        auto l = fsj::test::load_source("class A extends Object { A() { super(); } } new A()");
        RunResult r = run(l.table, l.program);
        CHECK(r.status == RunStatus::Terminal);
        CHECK(r.state.expr == at(0));
        CHECK(r.state.store.find(L(0))->cls == "A");
        CHECK(r.state.store.size() == 1);
    }

    TEST_CASE("pull: the composite is recomputed from the current source") {
        auto l = fsj::test::load_corpus("peano_pull.fsj");
        RunResult r = run(l.table, l.program);
        REQUIRE(r.status == RunStatus::Terminal);
        const ObjectStore& store = r.state.store;
        Location log;
        for (const auto& [loc, obj] : store.cells())
            if (obj.cls == "Log") log = loc;
        CHECK(succ_depth(store, store.find(log)->args.at(0)) == 8);
        CHECK(succ_depth(store, r.state.expr.location()) == 9);
        CHECK(count_rule(r.trace, Rule::FieldS) == 2);
    }

    TEST_CASE("push: one enqueue per signal write, and the handler's write lands") {
        auto l = fsj::test::load_corpus("subscribe_push.fsj");
        RunResult r = run(l.table, l.program);
        REQUIRE(r.status == RunStatus::Terminal);
        CHECK(count_rule(r.trace, Rule::AssignS) == 1);
        CHECK(count_kind(r.trace, TraceKind::HandlerEnqueue) == 1);
        CHECK(succ_depth(r.state.store, r.state.expr.location()) == 6);
    }

    TEST_CASE("late subscription: earlier writes never reach the handler") {
        auto l = fsj::test::load_corpus("late_subscription.fsj");
        RunResult r = run(l.table, l.program);
        REQUIRE(r.status == RunStatus::Terminal);
        CHECK(count_rule(r.trace, Rule::AssignS) == 3);
        CHECK(count_kind(r.trace, TraceKind::HandlerEnqueue) == 2);
        CHECK(succ_depth(r.state.store, r.state.expr.location()) == 2);
        bool subscribed = false;
        for (const auto& ev : r.trace) {
            if (ev.kind == TraceKind::SubscribeRegistered) subscribed = true;
            if (ev.kind == TraceKind::HandlerEnqueue) CHECK(subscribed);
        }
    }

    TEST_CASE("broadcast: handlers run in registration order") {
        auto l = fsj::test::load_corpus("broadcast.fsj");
        RunResult r = run(l.table, l.program);
        REQUIRE(r.status == RunStatus::Terminal);
        CHECK(r.state.handlers.handler_count(FieldKey{L(1), "value"}) == 3);
        CHECK(r.state.expr == at(1));
    }

    TEST_CASE("a self-triggering handler exhausts the fuel and names the pending key") {
        auto l = fsj::test::load_corpus("handler_loop.fsj");
        RunResult r = run(l.table, l.program, 3000, quiet());
        CHECK(r.status == RunStatus::FuelExhausted);
        CHECK(r.state.steps == 3000);
        REQUIRE(r.pending_key);
        CHECK(*r.pending_key == FieldKey{L(1), "state"});
        CHECK(r.diagnostic.find("@1.state") != std::string::npos);
    }

    TEST_CASE("no corpus program gets stuck") {
        for (const auto& path : fsj::test::well_typed_corpus()) {
            CAPTURE(path.filename().string());
            auto l = fsj::test::load_source(fsj::test::read_text(path));
            RunResult r = run(l.table, l.program, 5000, quiet());
            CHECK(r.status != RunStatus::Stuck);
        }
    }
}

TEST_SUITE("evaluator properties") {
    TEST_CASE("runs are deterministic") {
        for (const auto& path : fsj::test::well_typed_corpus()) {
            CAPTURE(path.filename().string());
            auto l = fsj::test::load_source(fsj::test::read_text(path));
            RunResult a = run(l.table, l.program, 3000);
            RunResult b = run(l.table, l.program, 3000);
            CHECK(a.state.expr == b.state.expr);
            CHECK(a.state.store == b.state.store);
            CHECK(a.state.handlers == b.state.handlers);
            REQUIRE(a.trace.size() == b.trace.size());
            for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(format_text(a.trace[i]) == format_text(b.trace[i]));
        }
    }

    TEST_CASE("stepping one at a time agrees with run") {
        for (const auto& path : fsj::test::well_typed_corpus()) {
            CAPTURE(path.filename().string());
            auto l = fsj::test::load_source(fsj::test::read_text(path));
            const std::uint64_t fuel = 1500;
            RunResult whole = run(l.table, l.program, fuel);
            MachineState s = initial_state(l.program.main, fuel);
            std::vector<TraceEvent> events;
            StepOutcome o;
            while ((o = step(l.table, s)).status == StepStatus::Stepped)
                events.insert(events.end(), o.info->events.begin(), o.info->events.end());
            CHECK(s.expr == whole.state.expr);
            CHECK(s.store == whole.state.store);
            CHECK(s.handlers == whole.state.handlers);
            CHECK(s.store_typing == whole.state.store_typing);
            CHECK(s.steps == whole.state.steps);
            REQUIRE(events.size() == whole.trace.size());
            for (std::size_t i = 0; i < events.size(); ++i) CHECK(format_text(events[i]) == format_text(whole.trace[i]));
        }
    }

    TEST_CASE("stores only grow and stay in step with the store typing") {
        for (const auto& path : fsj::test::well_typed_corpus()) {
            CAPTURE(path.filename().string());
            auto l = fsj::test::load_source(fsj::test::read_text(path));
            MachineState s = initial_state(l.program.main, 1500);
            while (true) {
                ObjectStore before = s.store;
                if (step(l.table, s, quiet()).status != StepStatus::Stepped) break;
                CHECK(s.store.size() >= before.size());
                for (const auto& [loc, obj] : before.cells()) CHECK(s.store.find(loc) != nullptr);
                REQUIRE(s.store.size() == s.store_typing.size());
                for (const auto& [loc, cls] : s.store_typing) CHECK(s.store.find(loc) != nullptr);
            }
        }
    }

    TEST_CASE("every plain write is silent") {
        for (const auto& path : fsj::test::well_typed_corpus()) {
            CAPTURE(path.filename().string());
            auto l = fsj::test::load_source(fsj::test::read_text(path));
            MachineState s = initial_state(l.program.main, 1500);
            while (true) {
                HandlerStore before = s.handlers;
                StepOutcome o = step(l.table, s);
                if (o.status != StepStatus::Stepped) break;
                if (o.info->rule != Rule::Assign) continue;
                CHECK(o.info->contractum.is_empty());
                CHECK(s.handlers == before);
                CHECK(count_kind(o.info->events, TraceKind::HandlerEnqueue) == 0);
            }
        }
    }
}
