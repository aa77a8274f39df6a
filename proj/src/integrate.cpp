#include "bistable/integrate.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "bistable/errors.hpp"
#include "bistable/rng.hpp"

namespace bistable {

namespace {

// Rejection loop bound; only reachable when [lo, hi] holds a vanishing share
// of the Gaussian mass.
constexpr int kMaxRejections = 1000000;

double draw_truncated(Engine& engine, const TruncatedGaussianHold& g) {
  std::normal_distribution<double> normal(g.mean, g.std);
  for (int i = 0; i < kMaxRejections; ++i) {
    const double v = normal(engine);
    if (v >= g.lo && v <= g.hi) return v;
  }
  throw NumericError("truncated Gaussian: rejection sampling did not accept");
}

InputSample draw_window(const TruncatedGaussianHold& g, std::uint64_t window) {
  Engine engine = make_engine(g.seed, window);
  InputSample s;
  s.u1 = draw_truncated(engine, g);
  s.u2 = draw_truncated(engine, g);
  return s;
}

std::uint64_t window_index(const TruncatedGaussianHold& g, double t) {
  return static_cast<std::uint64_t>(std::floor(t / g.hold_dt));
}

}  // namespace

double InputSample::norm() const { return std::hypot(u1, u2); }

InputSignal InputSignal::with_seed(std::uint64_t seed) const {
  InputSignal out = *this;
  if (auto* g = std::get_if<TruncatedGaussianHold>(&out.kind)) g->seed = seed;
  return out;
}

void InputSignal::validate() const {
  if (const auto* c = std::get_if<ConstantInput>(&kind)) {
    if (!std::isfinite(c->u1) || !std::isfinite(c->u2)) {
      throw DomainError("constant input must be finite");
    }
  } else if (const auto* g = std::get_if<TruncatedGaussianHold>(&kind)) {
    if (!(std::isfinite(g->mean) && std::isfinite(g->lo) &&
          std::isfinite(g->hi))) {
      throw DomainError("truncated Gaussian: mean, lo, hi must be finite");
    }
    if (!(g->std > 0.0) || !std::isfinite(g->std)) {
      throw DomainError("truncated Gaussian: std must be positive");
    }
    if (!(g->lo < g->hi) || g->mean < g->lo || g->mean > g->hi) {
      throw DomainError("truncated Gaussian: require lo <= mean <= hi, lo < hi");
    }
    if (!(g->hold_dt > 0.0) || !std::isfinite(g->hold_dt)) {
      throw DomainError("truncated Gaussian: hold_dt must be positive");
    }
  }
}

InputSample sample_input(const InputSignal& u, double t) {
  if (!(t >= 0.0)) throw DomainError("sample_input: t must be >= 0");
  u.validate();
  if (const auto* c = std::get_if<ConstantInput>(&u.kind)) {
    return {c->u1, c->u2};
  }
  if (const auto* g = std::get_if<TruncatedGaussianHold>(&u.kind)) {
    return draw_window(*g, window_index(*g, t));
  }
  return {};
}

std::string_view to_string(Method m) {
  return m == Method::RK4 ? "rk4" : "euler";
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw DomainError("SimConfig: dt must be positive");
  }
  if (!(t_end > dt) || !std::isfinite(t_end)) {
    throw DomainError("SimConfig: t_end must exceed dt");
  }
  if (record_every < 1) throw DomainError("SimConfig: record_every must be >= 1");
}

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
}

namespace detail {

InputSample InputSource::at(double t) {
  if (const auto* c = std::get_if<ConstantInput>(&u_.kind)) {
    return {c->u1, c->u2};
  }
  if (const auto* g = std::get_if<TruncatedGaussianHold>(&u_.kind)) {
    const std::uint64_t w = window_index(*g, t);
    if (window_ != w) {
      cached_ = draw_window(*g, w);
      window_ = w;
    }
    return cached_;
  }
  return {};
}

}  // namespace detail

OscillatorStepper::OscillatorStepper(const OscParams& p, const InputSignal& u,
                                     const SimConfig& cfg)
    : p_(p), cfg_(cfg), source_(u) {
  p.validate();
  u.validate();
  cfg.validate();
}

State OscillatorStepper::advance(const State& s, std::size_t k) {
  const double dt = cfg_.dt;
  const InputSample in = source_.at((static_cast<double>(k) + 0.5) * dt);
  sup_u_ = std::max(sup_u_, in.norm());
  const auto f = [&](const State& z) {
    State d = detail::field(p_, z);
    d.x += in.u1;
    d.y += in.u2;
    return d;
  };
  const State next = detail::step(cfg_.method, f, s, dt);
  if (!(next.radius_sq() <= kDivergenceNorm * kDivergenceNorm)) {
    const double t = static_cast<double>(k + 1) * dt;
    std::ostringstream msg;
    msg << "simulation diverged at t=" << t
        << " (state norm exceeded 1e6; reduce dt)";
    throw DivergenceError(t, msg.str());
  }
  return next;
}

Trajectory simulate(const OscParams& p, const State& s0, const InputSignal& u,
                    const SimConfig& cfg) {
  if (!s0.finite()) throw DomainError("simulate: non-finite initial state");
  OscillatorStepper stepper(p, u, cfg);
  const std::size_t n = cfg.steps();

  Trajectory traj;
  traj.params = p;
  traj.input = u;
  traj.times.reserve(n / cfg.record_every + 1);
  traj.states.reserve(n / cfg.record_every + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(s0);

  State s = s0;
  for (std::size_t k = 0; k < n; ++k) {
    s = stepper.advance(s, k);
    if ((k + 1) % cfg.record_every == 0) {
      traj.times.push_back(static_cast<double>(k + 1) * cfg.dt);
      traj.states.push_back(s);
    }
  }
  traj.input_sup_norm = stepper.input_sup_norm();
  return traj;
}

std::vector<RadiusSample> simulate_polar(const OscParams& p, double r0,
                                         const SimConfig& cfg) {
  p.validate();
  cfg.validate();
  if (!(r0 >= 0.0) || !std::isfinite(r0)) {
    throw DomainError("simulate_polar: r0 must be finite and >= 0");
  }
  const auto f = [&](double r) {
    const double r2 = r * r;
    return r * (p.sigma + 2.0 * p.a * p.b * r2 - p.b * r2 * r2);
  };
  const std::size_t n = cfg.steps();
  std::vector<RadiusSample> out;
  out.reserve(n / cfg.record_every + 1);
  out.push_back({0.0, r0});
  double r = r0;
  for (std::size_t k = 0; k < n; ++k) {
    r = detail::step(cfg.method, f, r, cfg.dt);
    const double t = static_cast<double>(k + 1) * cfg.dt;
    if (!(std::abs(r) <= kDivergenceNorm)) {
      std::ostringstream msg;
      msg << "polar simulation diverged at t=" << t;
      throw DivergenceError(t, msg.str());
    }
    if ((k + 1) % cfg.record_every == 0) out.push_back({t, r});
  }
  return out;
}

std::vector<PolarState> polar_samples(const Trajectory& traj) {
  std::vector<PolarState> out;
  out.reserve(traj.states.size());
  double prev_raw = 0.0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const PolarState raw = to_polar(traj.states[i]);
    if (i == 0) {
      out.push_back(raw);
    } else {
      const double d = std::remainder(raw.theta - prev_raw, 2.0 * std::numbers::pi);
      out.push_back({raw.r, out.back().theta + d});
    }
    prev_raw = raw.theta;
  }
  return out;
}

void write_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,x,y\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << traj.times[i] << ',' << traj.states[i].x << ',' << traj.states[i].y
        << '\n';
  }
}

}  // namespace bistable
