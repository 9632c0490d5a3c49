#pragma once

#include <iosfwd>

namespace losemb::cli {

/// Entry point of the `losemb` command. Returns the process exit status:
/// 0 success, 1 usage, 2 data validation, 3 internal invariant violation.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace losemb::cli
