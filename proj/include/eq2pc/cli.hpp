#ifndef EQ2PC_CLI_HPP
#define EQ2PC_CLI_HPP

#include <iosfwd>

namespace eq2pc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitComputation = 2;

/// Entry point of the eq2pc tool; subcommands search, derive, compare, homog,
/// bounds, niezgoda, render and db-replay.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eq2pc::cli

#endif  // EQ2PC_CLI_HPP
