#pragma once

#include <iosfwd>

namespace hcn::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataFailure = 2, kTrainingFailure = 3 };

/// Parses flags and an optional config file (flags win), runs the selected
/// mode and returns the process exit status. `in` feeds the chat REPL.
int parse_and_dispatch(int argc, const char* const* argv, std::istream& in, std::ostream& out,
                       std::ostream& err);

}  // namespace hcn::cli
