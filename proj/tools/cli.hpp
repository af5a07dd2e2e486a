#pragma once

#include <ostream>

namespace uniseq::cli {

// Exit codes: 0 success, 1 usage error, 2 data or format error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace uniseq::cli
