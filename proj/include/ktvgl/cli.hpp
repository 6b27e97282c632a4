#pragma once

#include <string>
#include <vector>

namespace ktvgl {

// Command-line entry point behind the ktvgl binary. args excludes the
// program name. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 solver non-convergence.
int run_cli(const std::vector<std::string>& args);

}  // namespace ktvgl
