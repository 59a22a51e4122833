#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lexiscope::cli {

/// Runs one invocation. Results go to `out`, diagnostics to `err`.
/// Exit codes: 0 success, 1 usage error (help text printed), 2 data error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const argv[], std::ostream& out, std::ostream& err);

}  // namespace lexiscope::cli
