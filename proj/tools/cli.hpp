#pragma once

#include <ostream>

namespace fsj::cli {

enum ExitCode : int {
    kOk = 0,
    kSemanticFailure = 1,
    kInputError = 2,
    kFuelExhausted = 3,
    kStuck = 4,
};

/// Entry point of the `fsj` tool, with the streams injectable for tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fsj::cli
