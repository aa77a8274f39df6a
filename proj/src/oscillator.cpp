#include "bistable/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bistable/errors.hpp"

namespace bistable {

void OscParams::validate() const {
  if (!(std::isfinite(omega) && std::isfinite(a) && std::isfinite(b) &&
        std::isfinite(sigma))) {
    throw DomainError("oscillator parameters must be finite");
  }
  if (!(omega > 0.0 && a > 0.0 && b > 0.0)) {
    std::ostringstream msg;
    msg << "oscillator parameters require omega, a, b > 0 (got omega="
        << omega << ", a=" << a << ", b=" << b << ")";
    throw DomainError(msg.str());
  }
}

PolarState to_polar(const State& s) {
  return {s.radius(), std::atan2(s.y, s.x)};
}

State to_cartesian(const PolarState& p) {
  return {p.r * std::cos(p.theta), p.r * std::sin(p.theta)};
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::UniqueEquilibrium:
      return "unique_equilibrium";
    case Regime::EquilibriumPlusSemiStableCycle:
      return "equilibrium_plus_semistable_cycle";
    case Regime::Bistable:
      return "bistable";
    case Regime::CycleOnly:
      return "cycle_only";
  }
  return "unknown";
}

State vector_field(const OscParams& p, const State& s) {
  p.validate();
  if (!s.finite()) throw DomainError("vector_field: non-finite state");
  return detail::field(p, s);
}

double polar_radial_rate(const OscParams& p, double r) {
  p.validate();
  if (!(r >= 0.0)) throw DomainError("polar_radial_rate: r must be >= 0");
  const double r2 = r * r;
  return r * (p.sigma + 2.0 * p.a * p.b * r2 - p.b * r2 * r2);
}

double amplitude_response(const OscParams& p, double eta) {
  p.validate();
  if (!(eta >= 0.0)) throw DomainError("amplitude_response: eta must be >= 0");
  return p.sigma + 2.0 * p.a * p.b * eta - p.b * eta * eta;
}

Regime classify(const OscParams& p) {
  p.validate();
  const double fold = -p.a * p.a * p.b;
  const double scale = std::max(std::abs(p.sigma), std::abs(fold));
  if (std::abs(p.sigma - fold) <= kFoldRelTol * scale) {
    return Regime::EquilibriumPlusSemiStableCycle;
  }
  if (p.sigma < fold) return Regime::UniqueEquilibrium;
  if (p.sigma < 0.0) return Regime::Bistable;
  return Regime::CycleOnly;
}

Landmarks landmarks(const OscParams& p) {
  Landmarks lm;
  lm.regime = classify(p);
  switch (lm.regime) {
    case Regime::UniqueEquilibrium:
      break;
    case Regime::EquilibriumPlusSemiStableCycle:
      // C₁ and C₂ merge at r² = a.
      lm.r_sep_sq = p.a;
      lm.r_lc_sq = p.a;
      break;
    case Regime::Bistable:
    case Regime::CycleOnly: {
      double radicand = p.a * p.a + p.sigma / p.b;
      if (std::abs(radicand) <= kRadicandAbsTol) radicand = 0.0;
      lm.gamma0 = std::sqrt(std::max(radicand, 0.0));
      lm.r_lc_sq = p.a + lm.gamma0;
      if (lm.regime == Regime::Bistable) lm.r_sep_sq = p.a - lm.gamma0;
      break;
    }
  }
  return lm;
}

double gamma_mu(const OscParams& p, double mu) {
  p.validate();
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw DomainError("gamma_mu: mu must lie in [0, 1]");
  }
  double radicand = p.a * p.a + (1.0 - mu) * p.sigma / p.b;
  if (radicand < 0.0) {
    if (radicand >= -kRadicandAbsTol) {
      radicand = 0.0;
    } else {
      std::ostringstream msg;
      msg << "gamma_mu: a^2 + (1-mu) sigma/b = " << radicand
          << " < 0; sigma is too negative for mu=" << mu;
      throw DomainError(msg.str());
    }
  }
  return std::sqrt(radicand);
}

}  // namespace bistable
