#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gbias::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one subcommand. Exit codes: 0 success, 1 validation error or bad
/// usage, 2 I/O error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

/// Lower-case hex SHA-256 of a file's bytes.
std::string file_sha256(const std::string& path);

}  // namespace gbias::cli
