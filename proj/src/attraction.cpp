#include "bistable/attraction.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "bistable/errors.hpp"
#include "bistable/parallel.hpp"

namespace bistable {

namespace {

Landmarks bistable_landmarks(const OscParams& p, const char* op) {
  Landmarks lm = landmarks(p);
  if (lm.regime != Regime::Bistable) {
    std::ostringstream msg;
    msg << op << ": requires the bistable regime -a^2 b < sigma < 0 (got "
        << to_string(lm.regime) << ")";
    throw DomainError(msg.str());
  }
  return lm;
}

// First index whose time is at or after `fraction` of the final time.
std::size_t tail_begin(const std::vector<double>& times, double fraction) {
  const double cut = fraction * times.back();
  return static_cast<std::size_t>(
      std::lower_bound(times.begin(), times.end(), cut) - times.begin());
}

}  // namespace

std::string_view to_string(BasinLabel l) {
  switch (l) {
    case BasinLabel::Origin:
      return "origin";
    case BasinLabel::Cycle:
      return "cycle";
    case BasinLabel::Undecided:
      return "undecided";
  }
  return "undecided";
}

void Grid::validate() const {
  if (nx < 2 || ny < 2) throw DomainError("grid: nx and ny must be >= 2");
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw DomainError("grid: require x_min < x_max and y_min < y_max");
  }
}

double Grid::x(std::size_t i) const {
  const double centre = 0.5 * (x_min + x_max);
  return centre + dx() * (static_cast<double>(i) - 0.5 * static_cast<double>(nx - 1));
}

double Grid::y(std::size_t j) const {
  const double centre = 0.5 * (y_min + y_max);
  return centre + dy() * (static_cast<double>(j) - 0.5 * static_cast<double>(ny - 1));
}

double transition_threshold(const Landmarks& lm) {
  if (!lm.r_sep_sq || !lm.r_lc_sq) {
    throw DomainError("transition threshold needs separatrix and cycle radii");
  }
  return 0.5 * (std::sqrt(*lm.r_sep_sq) + std::sqrt(*lm.r_lc_sq));
}

PointVerdict classify_initial_state(const OscParams& p, const State& s0,
                                    const SimConfig& cfg) {
  const Landmarks lm = bistable_landmarks(p, "classify_initial_state");
  if (!s0.finite()) throw DomainError("classify_initial_state: non-finite s0");
  const double r_origin = kOriginRadiusFraction * std::sqrt(*lm.r_sep_sq);
  const double r_lc = std::sqrt(*lm.r_lc_sq);
  const double mid = transition_threshold(lm);

  OscillatorStepper stepper(p, InputSignal::zero(), cfg);
  const std::size_t n = cfg.steps();
  const double tail_start =
      (1.0 - kCycleTailFraction) * static_cast<double>(n) * cfg.dt;

  PointVerdict v;
  State s = s0;
  double r = s.radius();
  if (r > mid) v.first_crossing = 0.0;
  if (r < r_origin) {
    v.label = BasinLabel::Origin;
    v.final_r = r;
    return v;
  }
  bool in_band = true;
  for (std::size_t k = 0; k < n; ++k) {
    s = stepper.advance(s, k);
    const double t = static_cast<double>(k + 1) * cfg.dt;
    r = s.radius();
    if (!v.first_crossing && r > mid) v.first_crossing = t;
    if (r < r_origin) {
      v.label = BasinLabel::Origin;
      v.final_r = r;
      return v;
    }
    if (t >= tail_start && !(std::abs(r - r_lc) < kCycleBand)) in_band = false;
  }
  v.final_r = r;
  v.label = in_band ? BasinLabel::Cycle : BasinLabel::Undecided;
  return v;
}

double BasinMap::undecided_fraction() const {
  if (labels.empty()) return 0.0;
  const auto n = std::count(labels.begin(), labels.end(), BasinLabel::Undecided);
  return static_cast<double>(n) / static_cast<double>(labels.size());
}

double BasinMap::undecided_fraction_outside(double boundary_radius, double band) const {
  std::size_t considered = 0;
  std::size_t undecided = 0;
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const double r = std::hypot(grid.x(i), grid.y(j));
      if (std::abs(r - boundary_radius) <= band) continue;
      ++considered;
      if (label(i, j) == BasinLabel::Undecided) ++undecided;
    }
  }
  return considered == 0 ? 0.0
                         : static_cast<double>(undecided) / static_cast<double>(considered);
}

BasinMap map_basin(const OscParams& p, const Grid& grid, const SimConfig& cfg,
                   unsigned threads) {
  bistable_landmarks(p, "map_basin");
  grid.validate();
  cfg.validate();
  BasinMap map;
  map.params = p;
  map.grid = grid;
  map.labels.resize(grid.size());
  map.final_radii.resize(grid.size());
  map.first_crossing.resize(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t idx) {
    const std::size_t i = idx % grid.nx;
    const std::size_t j = idx / grid.nx;
    const PointVerdict v = classify_initial_state(p, {grid.x(i), grid.y(j)}, cfg);
    map.labels[idx] = v.label;
    map.final_radii[idx] = v.final_r;
    map.first_crossing[idx] = v.first_crossing;
  });
  return map;
}

void write_csv(std::ostream& out, const BasinMap& map) {
  out << "x0,y0,label,final_r,first_crossing_t\n";
  out << std::setprecision(17);
  for (std::size_t j = 0; j < map.grid.ny; ++j) {
    for (std::size_t i = 0; i < map.grid.nx; ++i) {
      const std::size_t idx = j * map.grid.nx + i;
      out << map.grid.x(i) << ',' << map.grid.y(j) << ','
          << to_string(map.labels[idx]) << ',' << map.final_radii[idx] << ',';
      if (map.first_crossing[idx]) out << *map.first_crossing[idx];
      out << '\n';
    }
  }
}

double boundary_radius_on_ray(const OscParams& p, double angle,
                              const SimConfig& cfg, double tol) {
  const Landmarks lm = bistable_landmarks(p, "boundary_radius_on_ray");
  if (!(tol > 0.0)) throw DomainError("boundary_radius_on_ray: tol must be > 0");
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  double lo = 0.0;
  double hi = std::sqrt(*lm.r_lc_sq);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const PointVerdict v = classify_initial_state(p, {mid * c, mid * s}, cfg);
    if (v.label == BasinLabel::Origin) {
      lo = mid;
    } else if (v.label == BasinLabel::Cycle) {
      hi = mid;
    } else {
      std::ostringstream msg;
      msg << "boundary bisection: probe at r=" << mid
          << " undecided by t_end=" << cfg.t_end << "; increase t_end";
      throw NumericError(msg.str());
    }
  }
  return 0.5 * (lo + hi);
}

LyapunovValues lyapunov_values(const OscParams& p, const State& s) {
  const Landmarks lm = bistable_landmarks(p, "lyapunov_values");
  const double q = s.radius_sq();
  const double cycle = p.a + lm.gamma0;
  return {0.5 * q, cycle - q, q - cycle};
}

IssCertificate make_certificate(const OscParams& p, double mu, double epsilon) {
  bistable_landmarks(p, "make_certificate");
  if (!(mu > 0.0 && mu < 1.0)) throw DomainError("make_certificate: mu must lie in (0, 1)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw DomainError("make_certificate: epsilon must lie in (0, 1)");
  }
  IssCertificate cert;
  cert.params = p;
  cert.mu = mu;
  cert.epsilon = epsilon;
  cert.gamma_mu = gamma_mu(p, mu);
  cert.init_radius_sq_bound = p.a - cert.gamma_mu;
  const double rate = (1.0 - epsilon) * mu * std::abs(p.sigma);
  cert.input_sup_bound = rate * std::sqrt(cert.init_radius_sq_bound);
  cert.ultimate_gain = 1.0 / rate;
  return cert;
}

IssReport check_iss_run(const IssCertificate& cert, const Trajectory& traj,
                        double tol) {
  using Kind = PreconditionError::Kind;
  if (!(traj.params == cert.params)) {
    throw PreconditionError(Kind::ParamsMismatch,
                            "check_iss_run: trajectory parameters differ from the certificate's");
  }
  if (traj.states.size() < 2) throw DomainError("check_iss_run: trajectory too short");
  const double r0_sq = traj.states.front().radius_sq();
  if (!(r0_sq < cert.init_radius_sq_bound)) {
    std::ostringstream msg;
    msg << "check_iss_run: initial state has x^2+y^2 = " << r0_sq
        << ", outside B_mu (bound " << cert.init_radius_sq_bound << ")";
    throw PreconditionError(Kind::InitialStateOutside, msg.str());
  }
  if (!(traj.input_sup_norm < cert.input_sup_bound)) {
    std::ostringstream msg;
    msg << "check_iss_run: sup|u| = " << traj.input_sup_norm
        << " is not below the certified bound " << cert.input_sup_bound;
    throw PreconditionError(Kind::InputTooLarge, msg.str());
  }

  IssReport rep;
  rep.sup_u = traj.input_sup_norm;
  const double bound = cert.ultimate_gain * rep.sup_u;
  rep.max_violation = -bound;
  for (const State& s : traj.states) rep.max_excursion = std::max(rep.max_excursion, s.radius());
  for (std::size_t i = tail_begin(traj.times, 1.0 - kIssTailFraction);
       i < traj.states.size(); ++i) {
    const double r = traj.states[i].radius();
    rep.tail_norm = std::max(rep.tail_norm, r);
    rep.max_violation = std::max(rep.max_violation, r - bound);
  }
  rep.holds = rep.max_violation <= tol;
  return rep;
}

TransitionVerdict detect_transition(const Trajectory& traj, const Landmarks& lm) {
  const double threshold = transition_threshold(lm);
  TransitionVerdict v;
  if (traj.states.empty()) return v;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    if (traj.states[i].radius() > threshold) {
      v.first_crossing_time = traj.times[i];
      break;
    }
  }
  if (!v.first_crossing_time) return v;
  const std::size_t begin = tail_begin(traj.times, 0.9);
  double sum = 0.0;
  for (std::size_t i = begin; i < traj.states.size(); ++i) sum += traj.states[i].radius();
  const double mean = sum / static_cast<double>(traj.states.size() - begin);
  v.transitioned = mean > threshold;
  if (!v.transitioned) v.first_crossing_time.reset();
  return v;
}

}  // namespace bistable
