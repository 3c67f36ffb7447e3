#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace matsqrt::cli {

// Exit codes of the matsqrt tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;     // parse or validation error
inline constexpr int kExitDiverged = 2;    // divergence, loss of definiteness, singular iterate
inline constexpr int kExitIterationCap = 3;
inline constexpr int kExitCertificate = 4; // a certificate or replication check failed

// args excludes the program name. Data goes to `out` (or the -o file), the
// configuration echo and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace matsqrt::cli
