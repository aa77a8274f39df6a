#pragma once

// Experiment harness behind the `bb` command line tool: strict JSON
// configuration, Monte Carlo transition statistics, nullcline data, and one
// dispatcher per experiment kind writing CSV/JSON artifacts plus a manifest.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bistable/attraction.hpp"
#include "bistable/integrate.hpp"
#include "bistable/network.hpp"
#include "bistable/oscillator.hpp"

namespace bistable {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

enum class ExperimentKind {
  ClassifySweep,
  Nullclines,
  Basin,
  Iss,
  Fig3,
  NetworkSpectrum,
  NetworkInvariant,
  MonteCarlo,
  Readout,
};

std::string_view to_string(ExperimentKind k);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view name);
std::vector<std::string_view> experiment_names();

/// Default noise for fig3 and montecarlo: N(0.2, 0.5²) truncated
/// to [−0.3, 0.7], held for 0.1 time units.
InputSignal fig3_noise(std::uint64_t seed = 0);

struct SigmaSweep {
  double sigma_min = -2.0;
  double sigma_max = 0.5;
  double sigma_step = 0.01;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::ClassifySweep;
  OscParams params;
  /// Present for network experiments and readout.
  std::optional<NetworkParams> network;
  InputSignal noise = InputSignal::zero();
  SimConfig sim;
  std::uint64_t master_seed = 0;
  std::size_t n_trials = 100;
  std::filesystem::path output_dir = ".";

  State initial_state{};
  Grid grid;
  SigmaSweep sweep;
  /// σ values for fig3 and montecarlo; empty means params.sigma alone.
  std::vector<double> sigmas;
  double mu = 0.5;
  double epsilon = 0.5;
  /// Ray bisection tolerance for the basin boundary summary.
  double boundary_tol = 1e-3;
  /// Target series for the readout experiment.
  std::filesystem::path readout_target;

  /// Canonical JSON form; parse_config(to_json()) reproduces the config.
  nlohmann::json to_json() const;
};

/// Parses the JSON document. Unknown or mistyped keys, missing required
/// sections and invalid values raise ConfigError naming the key.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

struct TransitionStats {
  double sigma = 0.0;
  std::size_t n_trials = 0;
  std::size_t n_transitioned = 0;
  /// Trials that raised a numerical error; excluded from n_trials.
  std::size_t n_failed = 0;
  double p_hat = 0.0;
  std::pair<double, double> wilson_ci95{0.0, 0.0};
  std::optional<double> mean_first_crossing;
};

/// Wilson score interval for k successes in n trials.
std::pair<double, double> wilson_interval(std::size_t k, std::size_t n,
                                          double z = 1.959963984540054);

/// `n_trials` runs from cfg.initial_state under cfg.noise, trial i reseeded
/// with derive_seed(master_seed, i) so every σ sees the same noise paths.
TransitionStats run_montecarlo(const ExperimentConfig& cfg, unsigned threads = 1);

struct ContourSegment {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
};

/// Marching squares on a node-valued grid (values row-major in y, nx per
/// row) for the level set value = 0. Saddle cells are split by the cell
/// centre average.
std::vector<ContourSegment> zero_contour(const Grid& grid, const std::vector<double>& values);

struct NullclineData {
  std::vector<State> points;
  std::vector<State> field;
  std::vector<ContourSegment> xdot_zero;
  std::vector<ContourSegment> ydot_zero;
};

NullclineData nullcline_data(const OscParams& p, const Grid& grid);

/// Writes `nullclines_field.csv` (x,y,xdot,ydot) and
/// `nullclines_contours.csv` (curve,x1,y1,x2,y2) under `dir`; returns the
/// path of the field file.
std::filesystem::path emit_nullcline_data(const OscParams& p, const Grid& grid,
                                          const std::filesystem::path& dir);

struct RunResult {
  std::string summary;
  std::vector<std::filesystem::path> files;
};

/// Runs the configured experiment, writing its artifacts and
/// `manifest.json` under cfg.output_dir.
RunResult run_experiment(const ExperimentConfig& cfg, unsigned threads = 1);

/// FNV-1a 64 of the canonical config JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace bistable
