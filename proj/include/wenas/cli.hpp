#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace wenas::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kConfigError = 2 };

/// Resolved settings of one command, in declaration order. Rendered as
/// `key = value` lines, the same syntax the --config file accepts.
class RunConfig {
 public:
  void set(std::string key, std::string value);
  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }
  std::string to_text() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Parses `key = value` lines; blank lines and lines starting with '#' or
/// ';' are ignored. Throws ConfigError naming the offending line.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

/// Replaces `--config FILE` (or `--config=FILE`) after the subcommand with
/// the file's settings as `--key=value` tokens placed ahead of the
/// explicit flags, so explicit flags win.
std::vector<std::string> expand_config(std::vector<std::string> args);

/// Entry point shared by the executable and the tests. `args[0]` is the
/// program name.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace wenas::cli
