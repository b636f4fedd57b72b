#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lpseq::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kSolverFailure = 3,
  kPartial = 4,
};

/// Runs the command line `args` (without the program name). Machine-readable
/// results go to `out`; logs and the resolved configuration go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "inf" or a number in [0, inf).
double parse_p(const std::string& text);

/// Parses comma-, whitespace- or newline-separated numbers.
std::vector<double> parse_vector(const std::string& text);

}  // namespace lpseq::cli
