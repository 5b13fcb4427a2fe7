#pragma once

#include <cstdint>
#include <functional>

#include "fsj/ast.hpp"

namespace fsj {

struct GenConfig {
    int max_classes = 4;
    int max_fields_per_class = 3;
    int max_methods_per_class = 2;
    /// Nesting bound for generated expressions.
    int max_method_depth = 3;
    /// Statements in the main expression, and their nesting bound.
    int max_main_depth = 4;
    double signal_probability = 0.5;
    double subscribe_probability = 0.4;
    /// Off by default: handlers that subscribe make runs far more likely to
    /// diverge.
    bool subscribe_in_handlers = false;
    std::uint64_t seed = 0;
};

/// Random program that passes check_program by construction.
///
/// Every composite initializer and method body may only mention composites
/// and methods created before it (overrides inherit the rank of the method
/// they override), so field reads and calls always terminate; only handler
/// cascades can diverge. Deterministic per configuration.
Program generate_program(const GenConfig& cfg);

/// Greedy reduction of `p` to a locally minimal program that still
/// satisfies `keep`: removing any class, member, source field or
/// expression node makes `keep` false. `keep(p)` must hold on entry.
Program shrink_program(const Program& p, const std::function<bool(const Program&)>& keep);

}  // namespace fsj
