#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scalar_att::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

/// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

}  // namespace scalar_att::cli
