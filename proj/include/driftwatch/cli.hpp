#pragma once

#include <iosfwd>

namespace driftwatch {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one `driftwatch` subcommand. Returns 0 on success, 2 when --exit-on-reject
/// is set and a test rejected, and 1 on errors (usage errors included).
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace driftwatch
