#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dsse::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;     // bad arguments, config or input content
inline constexpr int kExitIo = 2;        // unreadable/unwritable/undecodable files
inline constexpr int kExitInternal = 3;  // invariant violation

// Runs one invocation. args[0] is the program name. Never throws; every
// failure is reported on `err` and mapped to an exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dsse::cli
