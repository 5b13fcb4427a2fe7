#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fsj/class_table.hpp"
#include "fsj/eval.hpp"
#include "fsj/metatheory.hpp"
#include "fsj/syntax.hpp"
#include "fsj/trace.hpp"
#include "fsj/typecheck.hpp"

namespace fsj::cli {

namespace {

struct Loaded {
    Program program;
    std::optional<ClassTable> table;
};

std::string position(const std::string& path, SourceSpan span) {
    if (span.line == 0) return path;
    return path + ":" + std::to_string(span.line) + ":" + std::to_string(span.column);
}

// Reads, parses, builds and type-checks one file, reporting problems on
// `err`. Returns kOk with `loaded` filled in, or the exit code to use.
int load(const std::string& path, std::ostream& err, Loaded& loaded) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        err << path << ": error: cannot read file\n";
        return kInputError;
    }
    std::ostringstream text;
    text << in.rdbuf();
    try {
        loaded.program = parse_program(text.str());
    } catch (const ParseError& e) {
        err << path << ":" << e.what() << "\n";
        return kInputError;
    }
    try {
        loaded.table = ClassTable::build(loaded.program);
    } catch (const WellFormednessError& e) {
        err << position(path, e.where()) << ": error: " << e.what() << "\n";
        return kSemanticFailure;
    }
    ProgramCheck check = check_program(*loaded.table, loaded.program);
    for (const auto& e : check.errors)
        err << position(path, e.span) << ": error: " << to_string(e.kind) << ": " << e.message << "\n";
    return check.ok() ? kOk : kSemanticFailure;
}

// Number of Succ wrappers around a Zero, if the object has that shape.
std::optional<std::size_t> succ_depth(const ObjectStore& store, Location loc) {
    for (std::size_t depth = 0; depth <= store.size(); ++depth) {
        const ObjectRecord* obj = store.find(loc);
        if (!obj) return std::nullopt;
        if (obj->cls == "Zero" && obj->args.empty()) return depth;
        if (obj->cls != "Succ" || obj->args.size() != 1) return std::nullopt;
        loc = obj->args[0];
    }
    return std::nullopt;
}

void stuck_banner(std::ostream& err, const std::string& diagnostic) {
    err << "==========================================================\n"
           "INTERNAL ERROR: a well-typed program got stuck.\n"
           "This contradicts the progress property of the calculus and\n"
           "indicates a bug in the interpreter or the type checker.\n"
           "==========================================================\n"
        << "stuck: " << diagnostic << "\n";
}

int finish(RunStatus status, const MachineState& state, const std::string& diagnostic,
           const std::optional<FieldKey>& pending, std::ostream& err) {
    switch (status) {
        case RunStatus::Terminal: return kOk;
        case RunStatus::FuelExhausted:
            err << "fuel exhausted after " << state.steps << " steps";
            if (pending) err << "; pending effect on " << to_string(*pending);
            err << "\n";
            (void)diagnostic;
            return kFuelExhausted;
        case RunStatus::Stuck: stuck_banner(err, diagnostic); return kStuck;
    }
    return kStuck;
}

int cmd_check(const std::vector<std::string>& paths, std::ostream& out, std::ostream& err) {
    int worst = kOk;
    for (const auto& path : paths) {
        Loaded loaded;
        int code = load(path, err, loaded);
        if (code == kOk) {
            auto main = type_expr(*loaded.table, TypeEnv(), StoreTyping(), loaded.program.main);
            out << path << ": ok (main : " << main.type().str() << ")\n";
        }
        worst = std::max(worst, code);
    }
    return worst;
}

int cmd_run(const std::string& path, std::uint64_t fuel, const EvalOptions& eval, std::ostream& out,
            std::ostream& err) {
    Loaded loaded;
    if (int code = load(path, err, loaded); code != kOk) return code;
    EvalOptions options = eval;
    options.record_trace = false;
    RunResult r = run(*loaded.table, loaded.program, fuel, options);
    const MachineState& s = r.state;
    std::string rendered = render(s.expr);
    constexpr std::size_t kShown = 400;
    if (rendered.size() > kShown)
        rendered = rendered.substr(0, kShown) + " ... (" + std::to_string(rendered.size() - kShown) + " more characters)";
    out << "result: " << rendered;
    if (s.expr.is_value()) {
        if (auto depth = succ_depth(s.store, s.expr.location())) out << " (succ-depth " << *depth << ")";
    }
    out << "\n";
    out << "steps: " << s.steps << "\n";
    out << "objects: " << s.store.size() << "\n";
    out << "handlers:";
    if (s.handlers.entries().empty()) out << " none";
    for (const auto& [key, hs] : s.handlers.entries()) out << " " << to_string(key) << "(" << hs.size() << ")";
    out << "\n";
    return finish(r.status, s, r.diagnostic, r.pending_key, err);
}

int cmd_trace(const std::string& path, std::uint64_t fuel, TraceFormat format, const EvalOptions& eval,
              std::ostream& out, std::ostream& err) {
    Loaded loaded;
    if (int code = load(path, err, loaded); code != kOk) return code;
    TraceWriter writer(out, format);
    MachineState state = initial_state(loaded.program.main, fuel);
    EvalOptions options = eval;
    options.record_trace = true;
    while (true) {
        StepOutcome o = step(*loaded.table, state, options);
        if (o.status == StepStatus::Stepped) {
            writer.write_all(o.info->events);
            continue;
        }
        RunStatus status = o.status == StepStatus::Terminal       ? RunStatus::Terminal
                           : o.status == StepStatus::FuelExhausted ? RunStatus::FuelExhausted
                                                                   : RunStatus::Stuck;
        return finish(status, state, o.diagnostic, pending_effect(state.expr), err);
    }
}

struct MetaOptions {
    std::uint64_t seed = 1;
    std::uint64_t count = 1000;
    std::uint64_t fuel = 2000;
    unsigned threads = 0;
    std::string witness_dir = "fsj-witnesses";
    bool quiet = false;
    GenConfig gen;
};

int cmd_meta(const MetaOptions& m, const EvalOptions& eval, std::ostream& out, std::ostream& err) {
    CampaignConfig cfg;
    cfg.seed = m.seed;
    cfg.count = m.count;
    cfg.fuel = m.fuel;
    cfg.gen = m.gen;
    cfg.eval = eval;
    cfg.threads = m.threads;
    cfg.witness_dir = m.witness_dir;
    CampaignReport report = run_campaign(cfg);
    if (!m.quiet)
        for (const auto& line : report.lines()) out << line << "\n";
    for (const auto& e : report.entries) {
        if (!e.generated_ok) err << "seed=" << e.seed << ": generated program is ill-typed: " << e.generator_error << "\n";
        for (const auto& r : e.reports) {
            if (r.verdict != Verdict::Violation) continue;
            err << "seed=" << e.seed << " theorem=" << to_string(r.theorem) << " step=" << r.step << ": " << r.detail
                << "\n";
        }
        if (e.witness_file) err << "seed=" << e.seed << ": shrunk witness written to " << e.witness_file->string() << "\n";
    }
    out << "summary programs=" << report.entries.size() << " violations=" << report.violations()
        << " fuel=" << report.count(Theorem::Progress, Verdict::Fuel)
        << " stuck=" << report.count(Theorem::Progress, Verdict::Violation)
        << " generator-failures=" << report.generator_failures() << "\n";
    out << "rules";
    auto totals = report.rule_totals();
    for (Rule r : kAllRules) out << " " << to_string(r) << "=" << totals[r];
    out << "\n";
    return report.violations() == 0 ? kOk : kSemanticFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Featherweight SignalJ: type checker, interpreter and metatheory harness", "fsj"};
    app.require_subcommand(1);

    std::uint64_t fuel = kDefaultFuel;
    std::string format_name = "text";
    std::string mutation_name = "none";
    MetaOptions meta;
    std::vector<std::string> check_paths;
    std::string path;

    auto add_fuel = [&](CLI::App* sub, std::uint64_t& target) {
        sub->add_option("--fuel", target, "Step budget")->envname("FSJ_FUEL")->check(CLI::PositiveNumber)
            ->capture_default_str();
    };
    auto add_mutation = [&](CLI::App* sub) {
        sub->add_option("--mutate", mutation_name, "Interpreter fault injection")
            ->check(CLI::IsMember({"none", "skip-this-subst", "swap-assign"}))
            ->group("");
    };

    auto* check = app.add_subcommand("check", "Type-check .fsj files");
    check->add_option("files", check_paths, "Input files")->required();

    auto* run_cmd = app.add_subcommand("run", "Type-check and evaluate a program");
    run_cmd->add_option("file", path, "Input file")->required();
    add_fuel(run_cmd, fuel);
    add_mutation(run_cmd);

    auto* trace = app.add_subcommand("trace", "Evaluate a program and print every reduction event");
    trace->add_option("file", path, "Input file")->required();
    add_fuel(trace, fuel);
    trace->add_option("--format", format_name, "Trace format")
        ->envname("FSJ_FORMAT")
        ->check(CLI::IsMember({"text", "structured"}))
        ->capture_default_str();
    add_mutation(trace);

    auto* meta_cmd = app.add_subcommand("meta", "Run the soundness oracles over generated programs");
    meta_cmd->add_option("--seed", meta.seed, "First generator seed")->envname("FSJ_SEED")->capture_default_str();
    meta_cmd->add_option("--n", meta.count, "Number of programs")
        ->envname("FSJ_N")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_fuel(meta_cmd, meta.fuel);
    meta_cmd->add_option("--threads", meta.threads, "Worker threads (0: one per core)")->capture_default_str();
    meta_cmd->add_option("--witness-dir", meta.witness_dir, "Directory for shrunk witnesses")->capture_default_str();
    meta_cmd->add_option("--max-classes", meta.gen.max_classes, "Generator: classes per program")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    meta_cmd->add_flag("--quiet", meta.quiet, "Print only the summary");
    add_mutation(meta_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    EvalOptions eval;
    eval.mutation = *parse_mutation(mutation_name);

    if (check->parsed()) return cmd_check(check_paths, out, err);
    if (run_cmd->parsed()) return cmd_run(path, fuel, eval, out, err);
    if (trace->parsed())
        return cmd_trace(path, fuel, format_name == "structured" ? TraceFormat::Structured : TraceFormat::Text, eval,
                         out, err);
    return cmd_meta(meta, eval, out, err);
}

}  // namespace fsj::cli
