#pragma once

// Homogeneous bistable oscillators on a complete graph:
//
//   ż_k = F(z_k) + (C/n) Σ_{ℓ≠k} z_ℓ,   k = 1..n
//
// with the stacked state z = [x₁, y₁, …, xₙ, yₙ].

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bistable/integrate.hpp"
#include "bistable/oscillator.hpp"

namespace bistable {

struct NetworkParams {
  std::size_t n = 2;
  double coupling = 0.0;
  OscParams osc;

  void validate() const;
  std::size_t dim() const { return 2 * n; }
};

struct NetworkState {
  Eigen::VectorXd z;

  static NetworkState zeros(std::size_t n) { return {Eigen::VectorXd::Zero(2 * n)}; }
  std::size_t nodes() const { return static_cast<std::size_t>(z.size()) / 2; }
  State node(std::size_t k) const { return {z[2 * k], z[2 * k + 1]}; }
  void set_node(std::size_t k, const State& s) {
    z[2 * k] = s.x;
    z[2 * k + 1] = s.y;
  }
};

namespace detail {

/// Unchecked right-hand side. The coupling sums are taken over the node
/// values in sorted order, so relabelling nodes permutes the output exactly.
void network_field(const NetworkParams& np, const Eigen::VectorXd& z,
                   Eigen::VectorXd& out, std::vector<double>& scratch);

}  // namespace detail

NetworkState network_vector_field(const NetworkParams& np, const NetworkState& z);

struct NetworkRoAEstimate {
  /// a − sqrt(a² + σ/b + |C|); unset when the estimate is not valid.
  std::optional<double> nu;
  /// |C| < |σ|/b and a non-negative radicand.
  bool valid = false;
  /// Squared radius of the certified set ‖z‖² ≤ ν (0 when not valid).
  double radius_sq_bound = 0.0;
};

/// Throws DomainError unless the node parameters are bistable.
NetworkRoAEstimate roa_estimate(const NetworkParams& np);

/// 2n×2n Jacobian of the network field at z = 0.
Eigen::MatrixXd origin_jacobian(const NetworkParams& np);

struct SpectrumReport {
  /// Numerically computed real parts, sorted descending.
  std::vector<double> eigen_real_parts;
  double max_real_part = 0.0;
  /// σ + (C/n)·μ_j with μ_j ∈ {n−1, −1, …, −1}, each twice; sorted descending.
  std::vector<double> closed_form_real_parts;
  double max_closed_form_deviation = 0.0;
  /// |C| > |σ|/b, the instability threshold asserted for the network.
  bool theorem_claim_unstable = false;
  /// max_real_part > 0; the verdict reported to users.
  bool jacobian_unstable = false;
};

/// Throws NumericError when the eigensolver fails or disagrees with the
/// closed form by more than 1e−6.
SpectrumReport origin_spectrum(const NetworkParams& np);

struct NetworkTrajectory {
  NetworkParams params;
  InputSignal input;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
};

/// Fixed-step run of the network. A noise input drives every coordinate of
/// every node; node k uses the signal reseeded with derive_seed(seed, k).
NetworkTrajectory simulate_network(const NetworkParams& np, const NetworkState& z0,
                                   const SimConfig& cfg,
                                   const InputSignal& u = InputSignal::zero());

/// `t,x_1,y_1,...,x_n,y_n`, 17 significant digits.
void write_csv(std::ostream& out, const NetworkTrajectory& traj);

/// Uniform point in the 2n-ball of the given radius (normalized Gaussian
/// direction times radius·U^{1/dim}).
Eigen::VectorXd sample_in_ball(std::size_t dim, double radius, std::uint64_t seed,
                               std::uint64_t index);

struct InvariantSetReport {
  double nu = 0.0;
  std::size_t trials = 0;
  bool all_converged = false;
  /// Largest increase of V = ½‖z‖² between consecutive recorded samples.
  double max_V_increase = 0.0;
  /// Largest final ‖z‖ over all trials.
  double max_final_norm = 0.0;
};

inline constexpr double kInvariantVTolerance = 1e-9;
inline constexpr double kInvariantFinalNorm = 1e-5;

/// Samples `trials` initial states uniformly in ‖z‖² ≤ ν and integrates each
/// unforced. A trial passes if V never increases by more than 1e−9 between
/// recorded samples and the final ‖z‖ is below 1e−5.
InvariantSetReport check_invariant_set(const NetworkParams& np,
                                       const NetworkRoAEstimate& est,
                                       std::size_t trials, const SimConfig& cfg,
                                       std::uint64_t seed, unsigned threads = 1);

}  // namespace bistable
