#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dstc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRefused = 1;  // policy or verification refusal
inline constexpr int kExitUsage = 2;    // usage, parse or file errors

// `args` excludes the program name. Results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dstc::cli
