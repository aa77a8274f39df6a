#pragma once

// Affine readout from latent network trajectories to observed multichannel
// series, fitted by ordinary least squares.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "bistable/network.hpp"

namespace bistable {

struct MultiChannelSeries {
  double sample_rate = 1.0;  // Hz
  double t0 = 0.0;           // time of the first sample
  std::vector<std::string> channels;
  Eigen::MatrixXd data;  // T × m

  void validate() const;
  std::size_t samples() const { return static_cast<std::size_t>(data.rows()); }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) / sample_rate; }
};

/// Parses `t,ch1,ch2,...` CSV. Rows must be uniformly spaced in t (relative
/// jitter ≤ 1e−9); ragged rows, empty or non-numeric cells and NaNs raise
/// ParseError naming the 1-based line.
MultiChannelSeries read_series(std::istream& in);
MultiChannelSeries load_series(const std::filesystem::path& path);

void write_series(std::ostream& out, const MultiChannelSeries& s);
void save_series(const std::filesystem::path& path, const MultiChannelSeries& s);

struct ReadoutModel {
  std::vector<std::string> channels;
  Eigen::MatrixXd weights;  // m × 2n
  Eigen::VectorXd bias;     // m
  std::size_t n = 0;        // network nodes behind the latent

  std::size_t latent_dim() const { return static_cast<std::size_t>(weights.cols()); }
};

nlohmann::json to_json(const ReadoutModel& model);
ReadoutModel model_from_json(const nlohmann::json& j);

struct ReadoutFit {
  ReadoutModel model;
  Eigen::VectorXd rmse;  // per channel
  /// Rank of the regressor matrix [z(t); 1] and its column count.
  std::size_t rank = 0;
  std::size_t regressors = 0;
  bool rank_deficient() const { return rank < regressors; }
};

/// OLS of every column of `target` (T × m) on [latent, 1] (T × (d+1)).
/// Rank-deficient regressors yield the minimum-norm solution and are
/// reported through `rank`.
ReadoutFit fit_affine(const Eigen::MatrixXd& latent, const Eigen::MatrixXd& target);

/// Latent samples at the target's sample times, nearest recorded sample.
/// Throws DomainError when a target time lies more than half a latent
/// sample outside the recorded range.
Eigen::MatrixXd align_latent(const NetworkTrajectory& latent,
                             const MultiChannelSeries& target);

ReadoutFit fit_readout(const NetworkTrajectory& latent, const MultiChannelSeries& target);

/// weights·z(t) + bias at every recorded latent sample.
MultiChannelSeries synthesize(const ReadoutModel& model, const NetworkTrajectory& latent);

}  // namespace bistable
