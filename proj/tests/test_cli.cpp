#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "twistlab/cli.hpp"
#include "twistlab/csv.hpp"

using namespace twistlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

cli::ExperimentConfig config(const std::string& op, const std::string& out, const json& map = {{"kind", "integrable"}},
                             const json& params = json::object()) {
  json j{{"operation", op}, {"map", map}, {"parameters", params}, {"output", (fs::path("cli_out") / out).string()}};
  return cli::ExperimentConfig::from_json(j);
}

int run(const cli::ExperimentConfig& c) {
  std::ostringstream log;
  return cli::run(c, log);
}

json summary(const std::string& out) {
  std::ifstream in(fs::path("cli_out") / out / "summary.json");
  return json::parse(in);
}

int shell(const std::string& args) {
  const int status = std::system((std::string(TWISTLAB_CLI_PATH) + " " + args + " 2>/dev/null").c_str());
  return status >= 0 && WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("rho-profile of the integrable family") {
  REQUIRE(run(config("rho-profile", "profile", {{"kind", "integrable"}}, {{"nodes", 11}, {"n_max", 20000}})) ==
          cli::kPass);
  const csv::Table t = csv::read_file("cli_out/profile/profile.csv");
  REQUIRE(t.header.size() >= 2);
  CHECK(t.header[0] == "c");
  CHECK(t.header[1] == "rho");
  CHECK(t.rows.size() == 11);
  for (const auto& row : t.rows) CHECK(std::abs(row[1] - row[0]) < 1e-6);

  const json s = summary("profile");
  CHECK(s["operation"] == "rho-profile");
  CHECK(s["passed"] == true);
  CHECK(s["exit_code"] == 0);
  CHECK_FALSE(s["anchor"].get<std::string>().empty());
  CHECK(s["files"].size() == 1);
  for (const auto& check : s["checks"]) {
    CHECK(check.contains("name"));
    CHECK(check.contains("threshold"));
  }
}

TEST_CASE("strange-demo") {
  CHECK(run(config("strange-demo", "strange", {{"kind", "strange"}})) == cli::kPass);
  const json s = summary("strange");
  CHECK(s["passed"] == true);
  CHECK(s["checks"].size() >= 6);
  CHECK(fs::exists("cli_out/strange/strange_leaves.csv"));
}

TEST_CASE("holder-fit thresholds on a tabulated gallery foliation") {
  const json strange{{"kind", "strange"}};
  CHECK(run(config("holder-fit", "holder_pass", strange, {{"tabulate", true}, {"threshold", 0.45}})) == cli::kPass);
  const json s = summary("holder_pass");
  CHECK(s["results"]["exponent"].get<double>() >= 0.45);
  CHECK(s["results"]["r_squared"].get<double>() >= 0.9);

  CHECK(run(config("holder-fit", "holder_strict", strange, {{"tabulate", true}, {"threshold", 0.99}})) ==
        cli::kVerificationFailure);
}

TEST_CASE("verification failures report the offending quantity") {
  const int code = run(config("sandwich", "tilted", {{"kind", "strange"}}, {{"tilt", 0.1}, {"samples", 16}}));
  CHECK(code == cli::kVerificationFailure);
  const json s = summary("tilted");
  CHECK(s["passed"] == false);
  bool named = false;
  for (const auto& check : s["checks"]) named = named || (check["passed"] == false && !check["name"].get<std::string>().empty());
  CHECK(named);

  CHECK(run(config("sandwich", "tilted_expected", {{"kind", "strange"}},
                   {{"tilt", 0.1}, {"samples", 16}, {"expect", "fail"}})) == cli::kPass);
}

TEST_CASE("usage errors") {
  CHECK(run(config("rho-profile", "bad_kind", {{"kind", "pendulum"}})) == cli::kUsage);
  CHECK(run(config("no-such-op", "bad_op")) == cli::kUsage);
  CHECK(run(config("rotation-number", "bad_tol", {{"kind", "integrable"}}, {{"rho_tol", -1.0}})) == cli::kUsage);
  CHECK(run(config("rotation-number", "bad_type", {{"kind", "integrable"}}, {{"c", "half"}})) == cli::kUsage);
  CHECK_FALSE(fs::exists("cli_out/bad_kind/summary.json"));

  CHECK_THROWS_AS(cli::ExperimentConfig::from_json(json{{"operation", 3}}), cli::UsageError);
  CHECK(std::find(cli::operations().begin(), cli::operations().end(), "appendix-a-demo") != cli::operations().end());
  CHECK(cli::operations().size() == 16);
}

TEST_CASE("config round trip") {
  const cli::ExperimentConfig c = config("green", "rt", {{"kind", "strange"}, {"epsilon", "abs"}}, {{"theta", 0.2}});
  const cli::ExperimentConfig back = cli::ExperimentConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.map.params["epsilon"] == "abs");
  CHECK(back.seed == 0);
}

TEST_CASE("command line") {
  CHECK(shell("--list >/dev/null") == 0);
  CHECK(shell("rotation-number --map-kind integrable --set c=0.25 -o cli_out/flags") == 0);
  const json s = summary("flags");
  CHECK(s["results"]["rho"].get<double>() == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(shell("rotation-number --map-kind pendulum -o cli_out/flags_bad") == 1);
  CHECK(shell("rotation-number --set c -o cli_out/flags_bad") == 1);
  CHECK(shell("--no-such-flag") == 1);
}
