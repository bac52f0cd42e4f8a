#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nucav {

inline constexpr int exit_ok = 0;
inline constexpr int exit_runtime = 1;
inline constexpr int exit_usage = 2;

/// Runs one command line (without the program name). Errors are reported
/// as a single line "error: <kind>: <message>" on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Materials database path used when --data is not given: $NUCAV_DATA if
/// set, else the data directory the tool was built with.
std::string default_data_path();

}  // namespace nucav
