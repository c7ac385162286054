#pragma once

#include <iosfwd>

namespace roa {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// roa {pretrain,run,oracle,report} [--config PATH] [--seed N] [--out DIR]
///     [--variant thresholds|slopes] [--no-monot]
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace roa
