#pragma once

#include <ostream>

namespace mummi::cli {

/// Entry point for the `mummi` binary. Human-readable summaries go to `out`,
/// diagnostics to `err`. Returns 0 on success, 2 for usage or input errors
/// and 1 for internal failures.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mummi::cli
