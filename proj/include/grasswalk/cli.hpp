#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace grasswalk::cli {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitBadConfig = 2;
/// verify only: an applicable bound failed beyond its 3-sigma interval.
inline constexpr int kExitBoundViolated = 3;

/// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace grasswalk::cli
