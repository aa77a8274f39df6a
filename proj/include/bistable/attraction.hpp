#pragma once

// Basins of attraction in the bistable regime, the three Lyapunov candidates
// behind them, the ISS certificate for the forced oscillator, and detection
// of noise-driven escapes from the equilibrium onto the stable cycle.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "bistable/integrate.hpp"
#include "bistable/oscillator.hpp"

namespace bistable {

enum class BasinLabel { Origin, Cycle, Undecided };

std::string_view to_string(BasinLabel l);

/// Rectangular lattice of nx × ny points including the corners, with
/// coordinates generated about the centre (x(i) = −x(nx−1−i) on a symmetric
/// window).
struct Grid {
  double x_min = -1.5;
  double x_max = 1.5;
  double y_min = -1.5;
  double y_max = 1.5;
  std::size_t nx = 101;
  std::size_t ny = 101;

  void validate() const;
  double x(std::size_t i) const;
  double y(std::size_t j) const;
  double dx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
  double dy() const { return (y_max - y_min) / static_cast<double>(ny - 1); }
  std::size_t size() const { return nx * ny; }
};

// Convergence thresholds of the finite-horizon basin test.
inline constexpr double kOriginRadiusFraction = 0.01;  // of r_sep
inline constexpr double kCycleBand = 1e-4;
inline constexpr double kCycleTailFraction = 0.05;

struct PointVerdict {
  BasinLabel label = BasinLabel::Undecided;
  double final_r = 0.0;
  /// First time the radius exceeded the midpoint of separatrix and cycle.
  std::optional<double> first_crossing;
};

/// Unforced run from s0 labelled Origin (radius below 0.01·r_sep before
/// t_end; the run stops there), Cycle (|r − r_lc| < 1e−4 throughout the
/// final 5% of the horizon) or Undecided.
PointVerdict classify_initial_state(const OscParams& p, const State& s0,
                                    const SimConfig& cfg);

struct BasinMap {
  OscParams params;
  Grid grid;
  /// Row-major in y: index = j·nx + i.
  std::vector<BasinLabel> labels;
  std::vector<double> final_radii;
  std::vector<std::optional<double>> first_crossing;

  BasinLabel label(std::size_t i, std::size_t j) const {
    return labels[j * grid.nx + i];
  }
  double undecided_fraction() const;
  /// Undecided share among grid points whose initial radius is farther than
  /// `band` from `boundary_radius`.
  double undecided_fraction_outside(double boundary_radius, double band) const;
};

/// Throws DomainError unless p is bistable.
BasinMap map_basin(const OscParams& p, const Grid& grid, const SimConfig& cfg,
                   unsigned threads = 1);

/// `x0,y0,label,final_r,first_crossing_t`; empty crossing when none.
void write_csv(std::ostream& out, const BasinMap& map);

/// Basin boundary along the ray at `angle`, by bisection of the labelled
/// radius in [0, r_lc] until the bracket is narrower than `tol`. Returns the
/// bracket midpoint. Throws NumericError if a probe stays Undecided.
double boundary_radius_on_ray(const OscParams& p, double angle,
                              const SimConfig& cfg, double tol);

struct LyapunovValues {
  double v_e = 0.0;    // ½(x²+y²)
  double v_lp = 0.0;   // a + γ₀ − (x²+y²)
  double v_lpp = 0.0;  // (x²+y²) − a − γ₀
};

/// Throws DomainError unless p is bistable.
LyapunovValues lyapunov_values(const OscParams& p, const State& s);

struct IssCertificate {
  OscParams params;
  double mu = 0.5;
  double epsilon = 0.5;
  double gamma_mu = 0.0;
  /// a − γ_μ: squared radius of the admissible initial set B_μ.
  double init_radius_sq_bound = 0.0;
  /// (1−ε)·μ·|σ|·sqrt(a − γ_μ)
  double input_sup_bound = 0.0;
  /// 1/((1−ε)·μ·|σ|)
  double ultimate_gain = 0.0;
};

IssCertificate make_certificate(const OscParams& p, double mu, double epsilon);

struct IssReport {
  bool holds = false;
  /// max over the tail of ‖z‖ − gain·sup‖u‖; holds iff this is ≤ tol.
  double max_violation = 0.0;
  /// max ‖z‖ over the final 20% of the horizon.
  double tail_norm = 0.0;
  double sup_u = 0.0;
  /// max ‖z‖ over the whole run (recorded, not asserted).
  double max_excursion = 0.0;
};

inline constexpr double kIssTailFraction = 0.2;
inline constexpr double kIssTolerance = 1e-3;

/// Checks the ultimate-bound part of the ISS estimate on a forced run.
/// Throws PreconditionError when the run does not satisfy the certificate's
/// hypotheses (different parameters, s0 ∉ B_μ, sup‖u‖ ≥ input bound).
IssReport check_iss_run(const IssCertificate& cert, const Trajectory& traj,
                        double tol = kIssTolerance);

struct TransitionVerdict {
  bool transitioned = false;
  std::optional<double> first_crossing_time;
};

/// Radius midway between separatrix and stable cycle.
double transition_threshold(const Landmarks& lm);

/// Transitioned iff the radius exceeds the threshold at some sample and the
/// mean radius over the final 10% of the samples also exceeds it.
TransitionVerdict detect_transition(const Trajectory& traj, const Landmarks& lm);

}  // namespace bistable
