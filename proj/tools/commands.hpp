#pragma once

#include <iosfwd>

namespace latdeconv::cli {

/// Parses argv and runs one subcommand. Returns the process exit code:
/// 0 ok, 1 invariant breach, 2 usage or precondition error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace latdeconv::cli
