#pragma once

// Fixed-step integration of the forced oscillator
//
//   ż = F(z) + u(t),   u = (u₁, u₂)
//
// with u held piecewise constant (zero-order hold). The polar reduction
// ṙ = r(σ + 2abr² − br⁴) uses the same steppers.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "bistable/oscillator.hpp"

namespace bistable {

struct ZeroInput {};

struct ConstantInput {
  double u1 = 0.0;
  double u2 = 0.0;
};

/// Each hold window [k·hold_dt, (k+1)·hold_dt) carries one pair of
/// independent draws from N(mean, std²) restricted to [lo, hi]. The draws for
/// window k depend only on (seed, k).
struct TruncatedGaussianHold {
  double mean = 0.0;
  double std = 1.0;
  double lo = -1.0;
  double hi = 1.0;
  double hold_dt = 0.01;
  std::uint64_t seed = 0;
};

struct InputSample {
  double u1 = 0.0;
  double u2 = 0.0;
  double norm() const;
};

struct InputSignal {
  std::variant<ZeroInput, ConstantInput, TruncatedGaussianHold> kind;

  static InputSignal zero() { return {ZeroInput{}}; }
  static InputSignal constant(double u1, double u2) {
    return {ConstantInput{u1, u2}};
  }
  static InputSignal truncated_gaussian(double mean, double std, double lo,
                                        double hi, double hold_dt,
                                        std::uint64_t seed) {
    return {TruncatedGaussianHold{mean, std, lo, hi, hold_dt, seed}};
  }

  bool is_zero() const { return std::holds_alternative<ZeroInput>(kind); }
  /// Same signal with the noise seed replaced; no-op for deterministic kinds.
  InputSignal with_seed(std::uint64_t seed) const;
  void validate() const;
};

/// Value of the input at time t ≥ 0.
InputSample sample_input(const InputSignal& u, double t);

enum class Method { RK4, Euler };

std::string_view to_string(Method m);

struct SimConfig {
  double dt = 1e-3;
  double t_end = 100.0;
  std::size_t record_every = 1;
  Method method = Method::RK4;

  void validate() const;
  /// Number of integration steps; the last step ends at or before t_end.
  std::size_t steps() const;
  double sample_spacing() const { return dt * static_cast<double>(record_every); }
};

/// Norm beyond which a run is declared divergent.
inline constexpr double kDivergenceNorm = 1e6;

struct Trajectory {
  OscParams params;
  InputSignal input;
  std::vector<double> times;
  std::vector<State> states;
  /// sup‖u‖ over the hold values actually applied during the run.
  double input_sup_norm = 0.0;
};

namespace detail {

template <class S, class F>
S rk4_step(const F& f, const S& s, double dt) {
  const S k1 = f(s);
  const S k2 = f(S(s + (0.5 * dt) * k1));
  const S k3 = f(S(s + (0.5 * dt) * k2));
  const S k4 = f(S(s + dt * k3));
  return S(s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

template <class S, class F>
S euler_step(const F& f, const S& s, double dt) {
  return S(s + dt * f(s));
}

template <class S, class F>
S step(Method m, const F& f, const S& s, double dt) {
  return m == Method::RK4 ? rk4_step(f, s, dt) : euler_step(f, s, dt);
}

/// Caches the current hold window so each window is drawn once.
class InputSource {
 public:
  explicit InputSource(const InputSignal& u) : u_(u) {}
  InputSample at(double t);

 private:
  InputSignal u_;
  std::optional<std::uint64_t> window_;
  InputSample cached_;
};

}  // namespace detail

/// Advances a single oscillator one step at a time. The input used on step k
/// is the hold value at the step midpoint (k + ½)·dt and stays constant over
/// the whole step.
class OscillatorStepper {
 public:
  OscillatorStepper(const OscParams& p, const InputSignal& u,
                    const SimConfig& cfg);

  /// State at t_{k+1} from the state at t_k = k·dt. Throws DivergenceError.
  State advance(const State& s, std::size_t k);

  double input_sup_norm() const { return sup_u_; }

 private:
  OscParams p_;
  SimConfig cfg_;
  detail::InputSource source_;
  double sup_u_ = 0.0;
};

Trajectory simulate(const OscParams& p, const State& s0, const InputSignal& u,
                    const SimConfig& cfg);

struct RadiusSample {
  double t = 0.0;
  double r = 0.0;
};

/// Integrates ṙ = r(σ + 2abr² − br⁴) with the method and step of `cfg`.
std::vector<RadiusSample> simulate_polar(const OscParams& p, double r0,
                                         const SimConfig& cfg);

/// Polar form of every recorded sample with θ unwrapped.
std::vector<PolarState> polar_samples(const Trajectory& traj);

/// `t,x,y` header, one row per sample, 17 significant digits.
void write_csv(std::ostream& out, const Trajectory& traj);

}  // namespace bistable
