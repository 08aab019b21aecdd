#pragma once

// Single entry point behind the review-alpha binary. Exposed as a function
// so tests can drive subcommands in-process.
//
// Exit codes: 0 success, 1 validation/usage error, 2 I/O error.

#include <string>
#include <vector>

namespace ralpha {

int dispatch(const std::vector<std::string>& args);

}  // namespace ralpha
