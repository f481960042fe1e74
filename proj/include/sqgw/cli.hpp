#pragma once

#include <ostream>

#include "sqgw/error.hpp"

namespace sqgw {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;

// Usage and input errors map to kExitUsage, numerical failures to
// kExitValidation.
int exit_code_for(ErrorCode code);

// Subcommands: solve, verify, evolve, sweep, validate-profile.
// Summaries go to out, diagnostics and warnings to err.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sqgw
