#pragma once

#include <string>
#include <vector>

namespace ckme::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

/// Entry point shared by the executable and the tests. args[0] is the program name.
int run(const std::vector<std::string>& args);

}  // namespace ckme::cli
