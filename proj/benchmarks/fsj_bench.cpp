#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fsj/class_table.hpp"
#include "fsj/eval.hpp"
#include "fsj/generator.hpp"
#include "fsj/metatheory.hpp"
#include "fsj/syntax.hpp"
#include "fsj/trace.hpp"
#include "fsj/typecheck.hpp"

namespace {

std::string corpus_text(const char* name) {
    std::ifstream in(std::filesystem::path(FSJ_CORPUS_DIR) / name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Loaded {
    fsj::Program program;
    fsj::ClassTable table;
    explicit Loaded(const char* name)
        : program(fsj::parse_program(corpus_text(name))), table(fsj::ClassTable::build(program)) {}
};

void BM_Parse(benchmark::State& state) {
    const std::string text = corpus_text("broadcast.fsj");
    for (auto _ : state) benchmark::DoNotOptimize(fsj::parse_program(text));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Parse);

void BM_TypeCheck(benchmark::State& state) {
    Loaded l("broadcast.fsj");
    for (auto _ : state) benchmark::DoNotOptimize(fsj::check_program(l.table, l.program));
}
BENCHMARK(BM_TypeCheck);

void BM_RunPull(benchmark::State& state) {
    Loaded l("peano_pull.fsj");
    fsj::EvalOptions quiet;
    quiet.record_trace = false;
    for (auto _ : state) benchmark::DoNotOptimize(fsj::run(l.table, l.program, fsj::kDefaultFuel, quiet));
}
BENCHMARK(BM_RunPull);

// Steps per second on a handler that rewrites its own source forever.
void BM_RunHandlerLoop(benchmark::State& state) {
    Loaded l("handler_loop.fsj");
    fsj::EvalOptions quiet;
    quiet.record_trace = false;
    const auto fuel = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fsj::run(l.table, l.program, fuel, quiet));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunHandlerLoop)->Arg(500)->Arg(2000);

void BM_TraceText(benchmark::State& state) {
    Loaded l("late_subscription.fsj");
    fsj::RunResult r = fsj::run(l.table, l.program);
    for (auto _ : state) {
        std::ostringstream out;
        for (const auto& ev : r.trace) out << fsj::format_text(ev) << '\n';
        benchmark::DoNotOptimize(out.str());
    }
}
BENCHMARK(BM_TraceText);

void BM_AuditCorpusProgram(benchmark::State& state) {
    Loaded l("subscribe_push.fsj");
    for (auto _ : state) benchmark::DoNotOptimize(fsj::audit_program(l.table, l.program));
}
BENCHMARK(BM_AuditCorpusProgram);

void BM_Generate(benchmark::State& state) {
    fsj::GenConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fsj::generate_program(cfg));
        ++cfg.seed;
    }
}
BENCHMARK(BM_Generate);

void BM_Campaign(benchmark::State& state) {
    fsj::CampaignConfig cfg;
    cfg.count = static_cast<std::uint64_t>(state.range(0));
    cfg.threads = 1;
    cfg.shrink = false;
    for (auto _ : state) benchmark::DoNotOptimize(fsj::run_campaign(cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Campaign)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
