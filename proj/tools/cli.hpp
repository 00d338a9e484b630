#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace rtci::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// Environment variable holding the default bench thread count.
inline constexpr const char* kThreadsEnv = "RTCI_THREADS";

/// Runs one command line (without the program name). Returns the exit code:
/// 0 ok, 2 usage or parse error, 3 estimation failure, 4 test undefined.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

}  // namespace rtci::cli
