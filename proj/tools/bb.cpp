// bb: command line front end for the bistable oscillator toolkit.
//
//   bb <experiment> --config <file> [--out <dir>] [--seed <u64>]
//                   [--trials <n>] [--threads <n>]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 1 anything else (I/O).

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "bistable/errors.hpp"
#include "bistable/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitOther = 1;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bistable oscillator toolkit: regimes, basins, ISS, networks"};
  app.set_version_flag("--version", std::string(bistable::kToolkitVersion));

  std::string experiment;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  unsigned threads = 1;

  std::string names;
  for (const auto n : bistable::experiment_names()) {
    names += names.empty() ? "" : ", ";
    names += n;
  }
  app.add_option("experiment", experiment, "One of: " + names)->required();
  app.add_option("--config", config_path, "JSON experiment configuration")->required();
  app.add_option("--out", out_dir, "Output directory (default: config output_dir, then $BB_OUT)");
  app.add_option("--seed", seed, "Override the master seed");
  app.add_option("--trials", trials, "Override the number of trials");
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    nlohmann::json j;
    {
      std::ifstream in(config_path);
      if (!in) throw bistable::ConfigError("--config", "cannot open config file " + config_path);
      try {
        in >> j;
      } catch (const nlohmann::json::parse_error& e) {
        throw bistable::ConfigError("--config", std::string("config is not valid JSON: ") + e.what());
      }
    }
    if (!j.is_object()) throw bistable::ConfigError("--config", "config must be a JSON object");
    if (!j.contains("experiment")) j["experiment"] = experiment;
    if (j["experiment"] != experiment) {
      throw bistable::ConfigError("experiment", "config experiment '" +
                                                    j["experiment"].dump() +
                                                    "' does not match command '" + experiment + "'");
    }
    const bool config_has_out = j.contains("output_dir");
    bistable::ExperimentConfig cfg = bistable::parse_config(j);
    if (seed) cfg.master_seed = *seed;
    if (trials) {
      if (*trials < 1) throw bistable::ConfigError("--trials", "--trials must be >= 1");
      cfg.n_trials = *trials;
    }
    if (!out_dir.empty()) {
      cfg.output_dir = out_dir;
    } else if (!config_has_out) {
      const char* env = std::getenv("BB_OUT");
      cfg.output_dir = env && *env ? env : ".";
    }

    const bistable::RunResult result = bistable::run_experiment(cfg, threads);
    std::cout << result.summary << '\n';
    return 0;
  } catch (const bistable::ConfigError& e) {
    std::cerr << "bb: config error [" << e.key() << "]: " << e.what() << '\n';
    return kExitConfig;
  } catch (const bistable::DomainError& e) {
    std::cerr << "bb: invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const bistable::PreconditionError& e) {
    std::cerr << "bb: hypothesis not met: " << e.what() << '\n';
    return kExitConfig;
  } catch (const bistable::ParseError& e) {
    std::cerr << "bb: input file error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const bistable::DivergenceError& e) {
    std::cerr << "bb: numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const bistable::NumericError& e) {
    std::cerr << "bb: numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "bb: " << e.what() << '\n';
    return kExitOther;
  }
}
