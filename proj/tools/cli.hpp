#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace binrbm::cli {

// Process exit codes, one per error family.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,     // unexpected exception
  kValidation = 2,   // bad flags, bad values, malformed input data
  kIo = 3,           // unreadable/unwritable files
  kConvergence = 4,  // non-finite training state or failed iteration
};

// Runs one command line (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// key=value lines; '#' starts a comment; later keys override earlier ones.
std::map<std::string, std::string> read_key_values(const std::string& path);

// 64-bit FNV-1a digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

}  // namespace binrbm::cli
