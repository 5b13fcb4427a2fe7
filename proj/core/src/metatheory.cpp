#include "fsj/metatheory.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fsj/syntax.hpp"

namespace fsj {

std::string_view to_string(Theorem t) {
    switch (t) {
        case Theorem::SubjectReduction: return "subject-reduction";
        case Theorem::Progress: return "progress";
        case Theorem::T3: return "t3";
        case Theorem::T4: return "t4";
        case Theorem::T5: return "t5";
        case Theorem::T6: return "t6";
    }
    return "?";
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Violation: return "violation";
        case Verdict::Fuel: return "fuel";
        case Verdict::Stuck: return "stuck";
    }
    return "?";
}

std::optional<std::string> check_store_typing(const ClassTable& ct, const ObjectStore& store,
                                              const HandlerStore& handlers, const StoreTyping& typing) {
    for (const auto& [loc, obj] : store.cells()) {
        auto it = typing.find(loc);
        if (it == typing.end()) return "location " + to_string(loc) + " is allocated but has no store type";
        if (obj.cls != it->second)
            return "object at " + to_string(loc) + " is a " + obj.cls + " but the store types it " + it->second;
        if (!ct.contains(obj.cls)) return "object at " + to_string(loc) + " has unknown class " + obj.cls;
        const auto& fields = ct.source(obj.cls);
        if (fields.size() != obj.args.size())
            return "object at " + to_string(loc) + " holds " + std::to_string(obj.args.size()) + " values for " +
                   std::to_string(fields.size()) + " source fields";
        for (std::size_t i = 0; i < fields.size(); ++i) {
            auto arg = typing.find(obj.args[i]);
            if (arg == typing.end())
                return "field " + fields[i].name + " of " + to_string(loc) + " refers to untyped " +
                       to_string(obj.args[i]);
            if (!ct.inherits(arg->second, fields[i].type))
                return "field " + fields[i].name + " of " + to_string(loc) + " holds a " + arg->second +
                       ", not a " + fields[i].type;
        }
    }
    for (const auto& [loc, cls] : typing)
        if (!store.find(loc)) return "store type recorded for unallocated location " + to_string(loc);
    for (const auto& [key, hs] : handlers.entries()) {
        if (!typing.count(key.loc)) return "handlers registered on untyped location " + to_string(key.loc);
        TypeResult t = type_expr(ct, TypeEnv(), typing, handlers.lookup(key));
        if (!t.ok()) return "handlers of " + to_string(key) + " are ill-typed: " + t.error().message;
        if (!t.type().is_unit()) return "handlers of " + to_string(key) + " have type " + t.type().str();
    }
    return std::nullopt;
}

namespace {

// Lexical occurrence of key in an initializer, reading `this` as `self`.
bool mentions(const Expr& e, Location self, const FieldKey& key) {
    auto denotes = [&](const Expr& r) {
        if (const auto* l = r.as<expr::Loc>()) return l->loc == key.loc;
        if (const auto* v = r.as<expr::Var>()) return v->name == kThis && self == key.loc;
        return false;
    };
    if (const auto* fa = e.as<expr::FieldAccess>())
        return (fa->field == key.field && denotes(fa->recv)) || mentions(fa->recv, self, key);
    if (const auto* inv = e.as<expr::Invoke>()) {
        if (mentions(inv->recv, self, key)) return true;
        for (const auto& a : inv->args)
            if (mentions(a, self, key)) return true;
        return false;
    }
    if (const auto* nw = e.as<expr::New>()) {
        for (const auto& a : nw->args)
            if (mentions(a, self, key)) return true;
    }
    return false;
}

}  // namespace

std::vector<FieldKey> oracle_effect(const ClassTable& ct, const ObjectStore& store, const FieldKey& key) {
    std::set<FieldKey> sinks;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [loc, obj] : store.cells()) {
            for (const auto& f : ct.composite(obj.cls)) {
                FieldKey candidate{loc, f.name};
                if (sinks.count(candidate)) continue;
                bool hit = mentions(f.init, loc, key);
                for (auto it = sinks.begin(); !hit && it != sinks.end(); ++it) hit = mentions(f.init, loc, *it);
                if (hit) {
                    sinks.insert(candidate);
                    changed = true;
                }
            }
        }
    }
    std::vector<FieldKey> out(sinks.begin(), sinks.end());
    auto position = [&](const FieldKey& k) {
        const auto& fs = ct.composite(store.find(k.loc)->cls);
        for (std::size_t i = 0; i < fs.size(); ++i)
            if (fs[i].name == k.field) return i;
        return fs.size();
    };
    std::stable_sort(out.begin(), out.end(), [&](const FieldKey& a, const FieldKey& b) {
        if (a.loc != b.loc) return a.loc < b.loc;
        return position(a) < position(b);
    });
    return out;
}

namespace {

std::string render_state(const MachineState& s) {
    std::ostringstream os;
    os << "expr: " << render(s.expr) << "\n";
    for (const auto& [loc, obj] : s.store.cells()) {
        os << "  " << to_string(loc) << " = new " << obj.cls << "(";
        for (std::size_t i = 0; i < obj.args.size(); ++i) os << (i ? ", " : "") << to_string(obj.args[i]);
        os << ")\n";
    }
    for (const auto& [key, hs] : s.handlers.entries())
        for (const auto& h : hs) os << "  " << to_string(key) << " <- " << render(h) << "\n";
    return os.str();
}

class Auditor {
public:
    Auditor(const ClassTable& ct, Audit& audit) : ct_(ct), a_(audit) {}

    void after_step(const MachineState& before, const MachineState& after, const StepInfo& info,
                    TypeName& previous_type) {
        const std::uint64_t k = after.steps;
        ++a_.rule_counts[info.rule];
        subject_reduction(before, after, info, previous_type, k);

        if (const auto* asg = info.redex.as<expr::Assign>()) assignment(before, after, info, *asg, k);
        if (const auto* sub = info.redex.as<expr::Subscribe>(); sub && info.rule == Rule::Subscribe)
            subscriptions_.push_back({FieldKey{sub->recv.location(), sub->field}, sub->handler});
        if (const auto* brace = info.redex.as<expr::EffectBrace>()) delivery(after, info, *brace, k);
        if (info.rule == Rule::FieldS) {
            ++a_.checks[Theorem::T5];
            if (!(before.store == after.store && before.handlers == after.handlers &&
                  before.store_typing == after.store_typing))
                violate(Theorem::T5, k, "reading a composite signal changed the stores", after);
        }
    }

    void violate(Theorem t, std::uint64_t step, std::string detail, const MachineState& s) {
        if (a_.violations.count(t)) return;
        a_.violations[t] = Violation{step, std::move(detail), render_state(s)};
    }

private:
    void subject_reduction(const MachineState& before, const MachineState& after, const StepInfo& info,
                           TypeName& previous_type, std::uint64_t k) {
        ++a_.checks[Theorem::SubjectReduction];
        const std::string rule(to_string(info.rule));
        TypeResult t = type_expr(ct_, TypeEnv(), after.store_typing, after.expr);
        if (!t.ok()) {
            violate(Theorem::SubjectReduction, k, "after " + rule + " the expression is ill-typed: " + t.error().message,
                    after);
        } else if (!is_subtype(ct_, t.type(), previous_type)) {
            violate(Theorem::SubjectReduction, k,
                    "after " + rule + " the type " + t.type().str() + " is not a subtype of " + previous_type.str(),
                    after);
        } else {
            previous_type = t.type();
        }
        for (const auto& [loc, cls] : before.store_typing) {
            auto it = after.store_typing.find(loc);
            if (it == after.store_typing.end() || it->second != cls)
                violate(Theorem::SubjectReduction, k, "store typing lost or changed " + to_string(loc), after);
        }
        if (auto problem = check_store_typing(ct_, after.store, after.handlers, after.store_typing))
            violate(Theorem::SubjectReduction, k, "after " + rule + ": " + *problem, after);
    }

    void assignment(const MachineState& before, const MachineState& after, const StepInfo& info,
                    const expr::Assign& asg, std::uint64_t k) {
        if (!asg.recv.is_value()) return;
        const ObjectRecord* obj = before.store.find(asg.recv.location());
        if (!obj) return;
        ++a_.checks[Theorem::T6];
        if (ct_.composite_index(obj->cls, asg.field))
            violate(Theorem::T6, k, "assignment to composite signal " + obj->cls + "." + asg.field, after);

        auto ft = ct_.ftype(obj->cls, asg.field);
        if (!ft) return;
        FieldKey key{asg.recv.location(), asg.field};
        if (ft->modifier == Modifier::Plain) {
            ++a_.checks[Theorem::T3];
            bool enqueued = std::any_of(info.events.begin(), info.events.end(),
                                        [](const TraceEvent& ev) { return ev.kind == TraceKind::HandlerEnqueue; });
            if (!info.contractum.is_empty())
                violate(Theorem::T3, k, "plain write to " + to_string(key) + " produced " + render(info.contractum),
                        after);
            else if (!(before.handlers == after.handlers))
                violate(Theorem::T3, k, "plain write to " + to_string(key) + " changed the handler store", after);
            else if (enqueued)
                violate(Theorem::T3, k, "plain write to " + to_string(key) + " enqueued handlers", after);
        } else {
            ++a_.checks[Theorem::T4];
            std::vector<Expr> own;
            for (const auto& [sk, h] : subscriptions_)
                if (sk == key) own.push_back(h);
            const auto* brace = info.contractum.as<expr::EffectBrace>();
            if (!brace || !(brace->key == key) || !(brace->body == concat(own)))
                violate(Theorem::T4, k,
                        "signal write to " + to_string(key) + " produced " + render(info.contractum) +
                            " instead of delivering its " + std::to_string(own.size()) + " handler(s)",
                        after);
        }
    }

    void delivery(const MachineState& after, const StepInfo& info, const expr::EffectBrace& brace, std::uint64_t k) {
        if (!brace.body.is_empty()) return;
        auto sinks = oracle_effect(ct_, after.store, brace.key);
        for (const auto& [sk, h] : subscriptions_) {
            if (std::find(sinks.begin(), sinks.end(), sk) == sinks.end()) continue;
            ++a_.checks[Theorem::T4];
            ++a_.handler_deliveries;
            if (!is_subterm(h, info.contractum))
                violate(Theorem::T4, k,
                        "handler " + render(h) + " of sink " + to_string(sk) + " missing after update of " +
                            to_string(brace.key),
                        after);
        }
    }

    const ClassTable& ct_;
    Audit& a_;
    std::vector<std::pair<FieldKey, Expr>> subscriptions_;
};

}  // namespace

TheoremReport Audit::report(Theorem t, const std::string& program_id) const {
    TheoremReport r;
    r.theorem = t;
    r.program_id = program_id;
    r.step = steps;
    if (auto it = violations.find(t); it != violations.end()) {
        r.verdict = Verdict::Violation;
        r.step = it->second.step;
        r.detail = it->second.detail;
        r.witness = it->second.witness;
        return r;
    }
    if (status == RunStatus::FuelExhausted) {
        r.verdict = Verdict::Fuel;
        r.detail = diagnostic;
    } else if (status == RunStatus::Stuck) {
        r.verdict = Verdict::Stuck;
        r.detail = diagnostic;
    }
    return r;
}

Audit audit_program(const ClassTable& ct, const Program& p, const AuditOptions& options) {
    ProgramCheck pc = check_program(ct, p);
    if (!pc.ok()) throw std::invalid_argument("program does not type-check: " + pc.errors.front().message);

    Audit a;
    a.main_type = *pc.main_type;
    Auditor auditor(ct, a);
    EvalOptions eval = options.eval;
    eval.record_trace = options.keep_trace;
    MachineState state = initial_state(p.main, options.fuel);
    TypeName previous = a.main_type;
    while (true) {
        MachineState before = state;
        StepOutcome o = step(ct, state, eval);
        if (o.status == StepStatus::Terminal) {
            a.status = RunStatus::Terminal;
            break;
        }
        if (o.status == StepStatus::FuelExhausted) {
            a.status = RunStatus::FuelExhausted;
            a.diagnostic = o.diagnostic;
            break;
        }
        if (o.status == StepStatus::Stuck) {
            a.status = RunStatus::Stuck;
            a.diagnostic = o.diagnostic;
            auditor.violate(Theorem::Progress, state.steps, "stuck: " + o.diagnostic, state);
            break;
        }
        auditor.after_step(before, state, *o.info, previous);
        if (options.keep_trace)
            for (auto& ev : o.info->events) a.trace.push_back(std::move(ev));
    }
    ++a.checks[Theorem::Progress];
    a.steps = state.steps;
    a.final_state = std::move(state);
    return a;
}

TheoremReport check_subject_reduction(const ClassTable& ct, const Program& p, std::uint64_t fuel,
                                      const std::string& program_id, const EvalOptions& eval) {
    return audit_program(ct, p, {fuel, eval, false}).report(Theorem::SubjectReduction, program_id);
}

TheoremReport check_progress(const ClassTable& ct, const Program& p, std::uint64_t fuel,
                             const std::string& program_id, const EvalOptions& eval) {
    return audit_program(ct, p, {fuel, eval, false}).report(Theorem::Progress, program_id);
}

namespace {

std::optional<std::string> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TheoremReport failed(Theorem t, const std::string& id, std::string detail) {
    TheoremReport r;
    r.theorem = t;
    r.program_id = id;
    r.verdict = Verdict::Violation;
    r.detail = std::move(detail);
    return r;
}

// Runs the scenario file and reports `t`, failing if the theorem was never
// exercised.
TheoremReport dynamic_scenario(Theorem t, const std::filesystem::path& file, const EvalOptions& eval) {
    const std::string id = file.filename().string();
    auto text = read_file(file);
    if (!text) return failed(t, id, "cannot read " + file.string());
    try {
        Program p = parse_program(*text);
        ClassTable ct = ClassTable::build(p);
        Audit a = audit_program(ct, p, {kDefaultFuel, eval, false});
        TheoremReport r = a.report(t, id);
        if (r.verdict == Verdict::Pass && a.status != RunStatus::Terminal)
            return failed(t, id, "scenario did not terminate: " + a.diagnostic);
        if (r.verdict == Verdict::Pass && a.checks[t] == 0)
            return failed(t, id, "scenario never exercised the property");
        if (r.verdict == Verdict::Pass && t == Theorem::T4 && a.handler_deliveries == 0)
            return failed(t, id, "no subscribed handler was due after a dependent update");
        if (r.verdict == Verdict::Pass && a.violations.count(Theorem::Progress))
            return failed(t, id, a.violations.at(Theorem::Progress).detail);
        return r;
    } catch (const std::exception& e) {
        return failed(t, id, e.what());
    }
}

}  // namespace

std::vector<TheoremReport> scenario_suite_theorems_3_to_6(const std::filesystem::path& corpus_dir,
                                                          const EvalOptions& eval) {
    std::vector<TheoremReport> out;
    out.push_back(dynamic_scenario(Theorem::T3, corpus_dir / "plain_assign.fsj", eval));
    out.push_back(dynamic_scenario(Theorem::T4, corpus_dir / "dependent_update.fsj", eval));
    out.push_back(dynamic_scenario(Theorem::T5, corpus_dir / "composite_read.fsj", eval));

    const auto file = corpus_dir / "composite_assign.fsj";
    const std::string id = file.filename().string();
    auto text = read_file(file);
    if (!text) {
        out.push_back(failed(Theorem::T6, id, "cannot read " + file.string()));
        return out;
    }
    try {
        Program p = parse_program(*text);
        ClassTable ct = ClassTable::build(p);
        ProgramCheck pc = check_program(ct, p);
        bool rejected = std::any_of(pc.errors.begin(), pc.errors.end(), [](const TypeError& e) {
            return e.kind == TypeErrorKind::AssignToComposite;
        });
        if (rejected) {
            TheoremReport r;
            r.theorem = Theorem::T6;
            r.program_id = id;
            out.push_back(r);
        } else {
            out.push_back(failed(Theorem::T6, id, "composite reassignment was not rejected with AssignToComposite"));
        }
    } catch (const std::exception& e) {
        out.push_back(failed(Theorem::T6, id, e.what()));
    }
    return out;
}

std::size_t CampaignReport::violations() const {
    std::size_t n = 0;
    for (const auto& e : entries) {
        if (!e.generated_ok) ++n;
        for (const auto& r : e.reports) n += r.verdict == Verdict::Violation;
    }
    return n;
}

std::size_t CampaignReport::count(Theorem t, Verdict v) const {
    std::size_t n = 0;
    for (const auto& e : entries)
        for (const auto& r : e.reports) n += r.theorem == t && r.verdict == v;
    return n;
}

std::size_t CampaignReport::generator_failures() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const CampaignEntry& e) { return !e.generated_ok; }));
}

std::map<Rule, std::size_t> CampaignReport::rule_totals() const {
    std::map<Rule, std::size_t> out;
    for (const auto& e : entries)
        for (const auto& [rule, n] : e.rule_counts) out[rule] += n;
    return out;
}

std::vector<std::string> CampaignReport::lines() const {
    std::vector<std::string> out;
    for (const auto& e : entries) {
        const std::string prefix = "seed=" + std::to_string(e.seed);
        if (!e.generated_ok) {
            out.push_back(prefix + " theorem=generator result=violation");
            continue;
        }
        for (const auto& r : e.reports)
            out.push_back(prefix + " theorem=" + std::string(to_string(r.theorem)) +
                          " result=" + std::string(to_string(r.verdict)));
    }
    return out;
}

namespace {

bool violates(const Program& q, Theorem t, const CampaignConfig& cfg) {
    try {
        ClassTable ct = ClassTable::build(q);
        if (!check_program(ct, q).ok()) return false;
        return audit_program(ct, q, {cfg.fuel, cfg.eval, false}).violations.count(t) > 0;
    } catch (const std::exception&) {
        return false;
    }
}

void write_witness(CampaignEntry& entry, const Program& p, Theorem t, const std::string& detail,
                   const CampaignConfig& cfg) {
    Program shrunk = cfg.shrink ? shrink_program(p, [&](const Program& q) { return violates(q, t, cfg); }) : p;
    entry.shrunk_program = "// seed=" + std::to_string(entry.seed) + " theorem=" + std::string(to_string(t)) +
                           "\n// " + detail + "\n" + render(shrunk);
    if (cfg.witness_dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(cfg.witness_dir, ec);
    auto path = cfg.witness_dir / ("witness-seed-" + std::to_string(entry.seed) + ".fsj");
    std::ofstream out(path, std::ios::binary);
    out << entry.shrunk_program;
    if (out) entry.witness_file = path;
}

CampaignEntry run_one(const CampaignConfig& cfg, std::uint64_t seed) {
    CampaignEntry entry;
    entry.seed = seed;
    GenConfig gen = cfg.gen;
    gen.seed = seed;
    Program p = generate_program(gen);
    std::optional<ClassTable> ct;
    try {
        ct = ClassTable::build(p);
    } catch (const WellFormednessError& e) {
        entry.generated_ok = false;
        entry.generator_error = e.what();
        return entry;
    }
    ProgramCheck pc = check_program(*ct, p);
    if (!pc.ok()) {
        entry.generated_ok = false;
        entry.generator_error = pc.errors.front().message;
        entry.shrunk_program = render(p);
        return entry;
    }
    Audit a = audit_program(*ct, p, {cfg.fuel, cfg.eval, false});
    const std::string id = "seed=" + std::to_string(seed);
    for (Theorem t : kAllTheorems) entry.reports.push_back(a.report(t, id));
    entry.rule_counts = a.rule_counts;
    entry.steps = a.steps;
    for (const auto& r : entry.reports) {
        if (r.verdict != Verdict::Violation) continue;
        write_witness(entry, p, r.theorem, r.detail, cfg);
        break;
    }
    return entry;
}

}  // namespace

CampaignReport run_campaign(const CampaignConfig& cfg) {
    CampaignReport report;
    report.entries.resize(cfg.count);
    unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(cfg.count, 1)));
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (std::uint64_t i = next++; i < cfg.count; i = next++) report.entries[i] = run_one(cfg, cfg.seed + i);
    };
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return report;
}

}  // namespace fsj
