#ifndef GAMEOPT_CLI_HPP
#define GAMEOPT_CLI_HPP

#include <iosfwd>

namespace gameopt {

// Exit codes of `gameopt solve`.
inline constexpr int kExitFeasible = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitExhausted = 3;
// `gameopt verify` on a document that does not re-verify.
inline constexpr int kExitUnverified = 4;

// Entry point of the command line tool: solve, gen, experiment, verify.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gameopt

#endif  // GAMEOPT_CLI_HPP
