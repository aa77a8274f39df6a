#pragma once

// Single bistable oscillator: the planar vector field, its polar reduction,
// and the analytic landmarks (equilibrium, separatrix, stable cycle) that
// the rest of the toolkit is checked against.
//
//   ẋ = −ωy + x(σ + 2ab(x²+y²) − b(x²+y²)²)
//   ẏ =  ωx + y(σ + 2ab(x²+y²) − b(x²+y²)²)
//
// In polar form ṙ = r(σ + 2abr² − br⁴) and θ̇ = ω. The period of the
// oscillation is 2π/ω; ω itself is an angular frequency.

#include <cmath>
#include <optional>
#include <string_view>

namespace bistable {

struct OscParams {
  double omega = 1.0;
  double a = 1.0;
  double b = 1.0;
  double sigma = -0.5;

  /// Throws DomainError unless omega, a, b > 0 and all four are finite.
  void validate() const;

  friend bool operator==(const OscParams&, const OscParams&) = default;
};

struct State {
  double x = 0.0;
  double y = 0.0;

  double radius_sq() const { return x * x + y * y; }
  double radius() const { return std::sqrt(radius_sq()); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }

  State& operator+=(const State& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  friend State operator+(State l, const State& r) { return l += r; }
  friend State operator-(const State& l, const State& r) {
    return {l.x - r.x, l.y - r.y};
  }
  friend State operator*(double k, const State& s) { return {k * s.x, k * s.y}; }
  friend bool operator==(const State&, const State&) = default;
};

/// θ is unwrapped.
struct PolarState {
  double r = 0.0;
  double theta = 0.0;
};

PolarState to_polar(const State& s);
State to_cartesian(const PolarState& p);

enum class Regime {
  UniqueEquilibrium,               // σ < −a²b
  EquilibriumPlusSemiStableCycle,  // σ = −a²b
  Bistable,                        // −a²b < σ < 0
  CycleOnly,                       // σ ≥ 0
};

std::string_view to_string(Regime r);

struct Landmarks {
  Regime regime = Regime::UniqueEquilibrium;
  /// sqrt(a² + σ/b); reported as 0 below the fold where no real root exists.
  double gamma0 = 0.0;
  /// Squared radius of the unstable cycle (separatrix). Bistable or fold only.
  std::optional<double> r_sep_sq;
  /// Squared radius of the stable cycle. Absent for UniqueEquilibrium.
  std::optional<double> r_lc_sq;
  State equilibrium{};
};

/// Relative tolerance on |σ + a²b| used to detect the fold.
inline constexpr double kFoldRelTol = 1e-12;
/// Radicands within this distance of zero are clamped to zero.
inline constexpr double kRadicandAbsTol = 1e-14;

namespace detail {

// Unchecked hot-path form used by the integrators.
inline State field(const OscParams& p, const State& s) {
  const double q = s.radius_sq();
  const double g = p.sigma + 2.0 * p.a * p.b * q - p.b * q * q;
  return {-p.omega * s.y + s.x * g, p.omega * s.x + s.y * g};
}

}  // namespace detail

/// Time derivative (ẋ, ẏ) of the unforced oscillator.
State vector_field(const OscParams& p, const State& s);

/// ṙ = r(σ + 2abr² − br⁴). Throws DomainError for r < 0.
double polar_radial_rate(const OscParams& p, double r);

/// f(η) = σ + 2abη − bη², the per-unit-energy growth rate at η = x²+y².
double amplitude_response(const OscParams& p, double eta);

Regime classify(const OscParams& p);

Landmarks landmarks(const OscParams& p);

/// γ_μ = sqrt(a² + (1−μ)σ/b). Throws DomainError for μ ∉ [0,1] or a
/// negative radicand (σ too negative for this μ).
double gamma_mu(const OscParams& p, double mu);

}  // namespace bistable
