// twistlab: run one verification experiment from a JSON config and/or flags.
//
//   twistlab rho-profile --map-kind integrable --set nodes=11 --output out
//   twistlab --config experiment.json --seed 3

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "twistlab/cli.hpp"

namespace {

using nlohmann::json;

// "key=value"; the value is read as JSON when it parses, as a string otherwise.
void assign(json& target, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) throw twistlab::cli::UsageError("expected key=value, got '" + item + "'");
  const std::string key = item.substr(0, eq), text = item.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  target[key] = value.is_discarded() ? json(text) : value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"twistlab: experiments on twist maps and invariant foliations"};
  std::string config_path, operation, map_kind, foliation_kind, output;
  std::vector<std::string> map_params, foliation_params, sets;
  unsigned long long seed = 0;
  bool list = false;

  app.add_option("operation", operation, "operation to run (see --list)");
  app.add_option("-c,--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--map-kind", map_kind, "integrable, strange, appendix_a or user_table");
  app.add_option("--map-param", map_params, "map parameter key=value (repeatable)");
  app.add_option("--foliation-kind", foliation_kind, "foliation kind; defaults to the map's invariant foliation");
  app.add_option("--foliation-param", foliation_params, "foliation parameter key=value (repeatable)");
  app.add_option("-s,--set", sets, "operation parameter key=value (repeatable)");
  app.add_option("-o,--output", output, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "random seed (default 0)");
  app.add_flag("--list", list, "list operations and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return twistlab::cli::kUsage;
  }

  if (list) {
    for (const auto& name : twistlab::cli::operations()) std::cout << name << '\n';
    return 0;
  }

  try {
    json base = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      base = json::parse(in, nullptr, false);
      if (base.is_discarded()) throw twistlab::cli::UsageError("cannot parse " + config_path);
    }
    auto config = twistlab::cli::ExperimentConfig::from_json(base);
    if (!operation.empty()) config.operation = operation;
    if (!map_kind.empty()) {
      if (map_kind != config.map.kind) config.map.params = json::object();
      config.map.kind = map_kind;
    }
    for (const auto& s : map_params) assign(config.map.params, s);
    if (!foliation_kind.empty()) config.foliation.kind = foliation_kind;
    for (const auto& s : foliation_params) assign(config.foliation.params, s);
    for (const auto& s : sets) assign(config.parameters, s);
    if (!output.empty()) config.output = output;
    if (seed_opt->count() > 0) config.seed = seed;
    return twistlab::cli::run(config, std::cerr);
  } catch (const twistlab::cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return twistlab::cli::kUsage;
  }
}
