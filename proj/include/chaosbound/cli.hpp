#pragma once

// Batch driver behind the `chaosbound` executable.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace chaosbound::cli {

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kConfigError = 2, kSolverError = 3 };

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
  std::string subcommand;
  std::map<std::string, std::string> params;  // defaults, then file, then --set
  std::uint64_t seed = 1;
  std::filesystem::path out = ".";
  std::string format;

  nlohmann::json to_json() const;

  std::string str(const std::string& key) const;
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;  // >= 1
  std::vector<double> reals(const std::string& key) const;
};

const std::vector<std::string>& subcommands();

// Documented keys and default values of a subcommand.
const std::map<std::string, std::string>& defaults(const std::string& subcommand);

// key = value lines; '#' starts a comment.
std::map<std::string, std::string> parse_config_text(const std::string& text,
                                                     const std::string& origin);

// Builds and validates the configuration from command-line arguments
// (argv[0] is skipped). Throws ConfigError.
RunConfig parse_args(const std::vector<std::string>& args);

struct Artifact {
  std::string name;
  std::string content;
};

struct Outcome {
  bool pass = true;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<Artifact> artifacts;
};

// Runs the subcommand without touching the file system.
Outcome execute(const RunConfig& cfg);

// Writes all artifacts atomically (temporary file, then rename).
void write_artifacts(const RunConfig& cfg, const Outcome& outcome);

// Full pipeline with exit codes; diagnostics go to err, the summary to out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chaosbound::cli
