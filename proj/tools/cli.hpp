#pragma once

#include <string>
#include <vector>

namespace qelogit::cli {

// Exit codes: 0 success, 1 data/usage error, 2 identification error,
// 3 non-convergence.
int run(const std::vector<std::string>& args);

}  // namespace qelogit::cli
