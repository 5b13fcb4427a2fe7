#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fsj/ast.hpp"
#include "fsj/class_table.hpp"
#include "fsj/eval.hpp"
#include "fsj/generator.hpp"
#include "fsj/typecheck.hpp"

namespace fsj {

enum class Theorem { SubjectReduction, Progress, T3, T4, T5, T6 };

inline constexpr Theorem kAllTheorems[] = {Theorem::SubjectReduction, Theorem::Progress, Theorem::T3,
                                           Theorem::T4, Theorem::T5, Theorem::T6};

/// "subject-reduction", "progress", "t3" ... "t6".
std::string_view to_string(Theorem t);

enum class Verdict { Pass, Violation, Fuel, Stuck };

/// "pass", "violation", "fuel", "stuck".
std::string_view to_string(Verdict v);

struct TheoremReport {
    Theorem theorem = Theorem::SubjectReduction;
    std::string program_id;
    Verdict verdict = Verdict::Pass;
    /// Step of the first violation, or the number of steps run.
    std::uint64_t step = 0;
    /// Rendered offending state; empty unless verdict is Violation.
    std::string witness;
    std::string detail;

    bool passed() const { return verdict == Verdict::Pass; }
};

/// Well-typedness of the stores: dom(mu) = dom(Sigma), every object types
/// at its recorded class, every handler types at Unit and every handler key
/// names a typed location. Returns a description of the first violation.
std::optional<std::string> check_store_typing(const ClassTable& ct, const ObjectStore& store,
                                              const HandlerStore& handlers, const StoreTyping& typing);

/// Dependency closure computed by iterating to a fixpoint over every
/// (object, composite field) pair. Shares no code with effect().
std::vector<FieldKey> oracle_effect(const ClassTable& ct, const ObjectStore& store, const FieldKey& key);

struct Violation {
    std::uint64_t step = 0;
    std::string detail;
    std::string witness;
};

/// Everything learned from running one program under the per-step oracles.
struct Audit {
    RunStatus status = RunStatus::Terminal;
    std::uint64_t steps = 0;
    std::string diagnostic;
    TypeName main_type = TypeName::unit();
    std::map<Theorem, Violation> violations;
    std::map<Rule, std::size_t> rule_counts;
    /// Checks performed, per theorem; zero means the theorem was vacuous for
    /// this run (no R-FIELDS step for T5, and so on).
    std::map<Theorem, std::size_t> checks;
    /// Subscribed handlers verified present when their sink's update ran.
    std::size_t handler_deliveries = 0;
    MachineState final_state;
    std::vector<TraceEvent> trace;

    TheoremReport report(Theorem t, const std::string& program_id) const;
};

struct AuditOptions {
    std::uint64_t fuel = kDefaultFuel;
    EvalOptions eval = {};
    bool keep_trace = false;
};

/// Runs a well-typed program step by step. After every step: re-types the
/// expression under the current store typing and checks it against the
/// previous step's type, checks store typing and its monotonic growth,
/// and checks the step-local properties of plain writes, handler delivery,
/// composite reads and composite assignment. Throws std::invalid_argument
/// if `p` does not type-check.
Audit audit_program(const ClassTable& ct, const Program& p, const AuditOptions& options = {});

TheoremReport check_subject_reduction(const ClassTable& ct, const Program& p, std::uint64_t fuel,
                                      const std::string& program_id = "", const EvalOptions& eval = {});
TheoremReport check_progress(const ClassTable& ct, const Program& p, std::uint64_t fuel,
                             const std::string& program_id = "", const EvalOptions& eval = {});

/// Dedicated scenarios for plain writes, handler delivery, composite reads
/// and composite assignment, read from `corpus_dir`:
///   plain_assign.fsj, dependent_update.fsj,
///   composite_read.fsj, composite_assign.fsj.
std::vector<TheoremReport> scenario_suite_theorems_3_to_6(const std::filesystem::path& corpus_dir,
                                                          const EvalOptions& eval = {});

struct CampaignConfig {
    std::uint64_t seed = 1;
    std::uint64_t count = 1000;
    std::uint64_t fuel = 2000;
    GenConfig gen = {};
    EvalOptions eval = {};
    /// Where shrunk witnesses are written; empty disables writing.
    std::filesystem::path witness_dir;
    unsigned threads = 0;
    bool shrink = true;
};

struct CampaignEntry {
    std::uint64_t seed = 0;
    bool generated_ok = true;
    std::string generator_error;
    std::vector<TheoremReport> reports;
    std::map<Rule, std::size_t> rule_counts;
    std::uint64_t steps = 0;
    std::optional<std::filesystem::path> witness_file;
    std::string shrunk_program;
};

struct CampaignReport {
    std::vector<CampaignEntry> entries;

    std::size_t violations() const;
    std::size_t count(Theorem t, Verdict v) const;
    std::size_t generator_failures() const;
    std::map<Rule, std::size_t> rule_totals() const;

    /// One `seed=<s> theorem=<t> result=<r>` line per program and theorem.
    std::vector<std::string> lines() const;
};

/// Generates `count` programs from consecutive seeds and audits each.
/// Programs are independent, so they run on `threads` workers; the
/// report is ordered by seed regardless.
CampaignReport run_campaign(const CampaignConfig& cfg);

}  // namespace fsj
