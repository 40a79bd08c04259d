#pragma once

// Command-line front end: configuration loading, subcommand dispatch and
// artifact emission. The executable is a thin wrapper around run_cli().

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace lowmach::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitCheckFailed = 4;

const std::vector<std::string>& subcommands();

struct CliConfig {
  std::string subcommand;
  std::string config_path;  // empty: built-in defaults
  std::string output_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;
  bool dry_run = false;
  int verbosity = 0;
};

/// Parses a TOML or JSON (by extension ".json") configuration file into a JSON document.
nlohmann::json load_config(const std::string& path);

/// Typed access to one table of a configuration document. Every key read is
/// recorded; finish() rejects keys that were never read.
class Section {
 public:
  Section(nlohmann::json doc, std::string path);

  bool has(const std::string& key) const;
  double number(const std::string& key, double fallback);
  long integer(const std::string& key, long fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key, const std::string& fallback);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
  std::vector<int> integers(const std::string& key, const std::vector<int>& fallback);
  Section section(const std::string& key);
  void finish() const;

  std::string field(const std::string& key) const;

 private:
  const nlohmann::json* lookup(const std::string& key);

  nlohmann::json doc_;
  std::string path_;
  std::set<std::string> used_;
};

/// Runs one subcommand. Errors are reported as a JSON record on `err` and
/// mapped to exit codes 2 (validation), 3 (numerical abort), 4 (check failed).
int dispatch(const CliConfig& cli, std::ostream& out, std::ostream& err);

/// Full command-line entry point (argument parsing plus dispatch).
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

std::string version_text();

}  // namespace lowmach::cli
