#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace onsager::cli {

/// Exit codes: 0 success, 1 runtime or solver failure, 2 usage or validation.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the driver on `args` (without the program name). Tables go to
/// --out when given, otherwise to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace onsager::cli
