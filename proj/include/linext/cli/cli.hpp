#pragma once

#include <ostream>

namespace linext::cli {

/// Entry point of the `linext` tool. Returns 0 on success, 1 on a usage or
/// validation error, 2 on an I/O error. Diagnostics go to `err`; results are
/// written only to the files named on the command line.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace linext::cli
