#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace foi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitContractViolation = 2;

// Entry point shared by the `foi` binary and the tests. `args` excludes the
// program name. "-" as a file argument means stdin/stdout.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Expands `--config file.json` into flags placed right after the subcommand,
// so that explicit flags given later win. Relative paths in the file resolve
// against the file's directory.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace foi::cli
