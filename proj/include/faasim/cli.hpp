#pragma once

#include <iosfwd>

namespace faasim::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kIoError = 3 };

/// Entry point of the `faasim` tool: simulate, energy, synth, integrate, stats.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace faasim::cli
