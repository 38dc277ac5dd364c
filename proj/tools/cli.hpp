#pragma once

#include <string>
#include <vector>

namespace sdae::cli {

/// Exit codes: 0 ok, 2 usage / unknown problem, 3 stiffness (b_cap),
/// 4 gradient-descent fallback failure, 5 numerical guard.
int run(const std::vector<std::string>& args);

}  // namespace sdae::cli
