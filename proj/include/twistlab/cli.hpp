#ifndef TWISTLAB_CLI_HPP
#define TWISTLAB_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "twistlab/common.hpp"

namespace twistlab::cli {

/// Bad config, unknown kind or operation, malformed parameter.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Map or foliation description: a kind plus free-form parameters.
struct Descriptor {
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
};

struct ExperimentConfig {
  std::string operation;
  Descriptor map{"integrable", nlohmann::json::object()};
  Descriptor foliation;  // empty kind: the invariant foliation of the map
  nlohmann::json parameters = nlohmann::json::object();
  std::string output = "twistlab-out";
  unsigned long long seed = 0;

  /// Accepts {"operation", "map": {"kind", ...}, "foliation": {...},
  /// "parameters": {...}, "output", "seed"}.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;  // throws UsageError
};

enum ExitCode : int { kPass = 0, kUsage = 1, kVerificationFailure = 2 };

const std::vector<std::string>& operations();

/// Runs one operation, writes summary.json and the operation's CSV files
/// into config.output, and returns the exit code. Progress goes to log.
int run(const ExperimentConfig& config, std::ostream& log);

}  // namespace twistlab::cli

#endif  // TWISTLAB_CLI_HPP
