#include "bistable/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "bistable/errors.hpp"
#include "bistable/parallel.hpp"
#include "bistable/rng.hpp"

namespace bistable {

namespace {

double sorted_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0);
}

void check_state(const NetworkParams& np, const Eigen::VectorXd& z, const char* op) {
  if (static_cast<std::size_t>(z.size()) != np.dim()) {
    std::ostringstream msg;
    msg << op << ": state has length " << z.size() << ", expected " << np.dim();
    throw DomainError(msg.str());
  }
  if (!z.allFinite()) throw DomainError(std::string(op) + ": non-finite state");
}

}  // namespace

void NetworkParams::validate() const {
  if (n < 2) throw DomainError("network: n must be >= 2");
  if (!std::isfinite(coupling)) throw DomainError("network: coupling must be finite");
  osc.validate();
}

namespace detail {

void network_field(const NetworkParams& np, const Eigen::VectorXd& z,
                   Eigen::VectorXd& out, std::vector<double>& scratch) {
  const std::size_t n = np.n;
  const OscParams& p = np.osc;
  out.resize(z.size());
  scratch.resize(n);
  for (std::size_t k = 0; k < n; ++k) scratch[k] = z[2 * k];
  const double sum_x = sorted_sum(scratch);
  for (std::size_t k = 0; k < n; ++k) scratch[k] = z[2 * k + 1];
  const double sum_y = sorted_sum(scratch);
  const double c = np.coupling / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const State own = detail::field(p, {z[2 * k], z[2 * k + 1]});
    out[2 * k] = own.x + c * (sum_x - z[2 * k]);
    out[2 * k + 1] = own.y + c * (sum_y - z[2 * k + 1]);
  }
}

}  // namespace detail

NetworkState network_vector_field(const NetworkParams& np, const NetworkState& z) {
  np.validate();
  check_state(np, z.z, "network_vector_field");
  NetworkState out;
  std::vector<double> scratch;
  detail::network_field(np, z.z, out.z, scratch);
  return out;
}

NetworkRoAEstimate roa_estimate(const NetworkParams& np) {
  np.validate();
  if (classify(np.osc) != Regime::Bistable) {
    throw DomainError("roa_estimate: node parameters must be bistable");
  }
  const OscParams& p = np.osc;
  NetworkRoAEstimate est;
  const double radicand = p.a * p.a + p.sigma / p.b + std::abs(np.coupling);
  est.valid = std::abs(np.coupling) < std::abs(p.sigma) / p.b && radicand >= 0.0;
  if (est.valid) {
    est.nu = p.a - std::sqrt(radicand);
    est.radius_sq_bound = *est.nu;
  }
  return est;
}

Eigen::MatrixXd origin_jacobian(const NetworkParams& np) {
  np.validate();
  const std::size_t n = np.n;
  const double c = np.coupling / static_cast<double>(n);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    J(2 * k, 2 * k) = np.osc.sigma;
    J(2 * k, 2 * k + 1) = -np.osc.omega;
    J(2 * k + 1, 2 * k) = np.osc.omega;
    J(2 * k + 1, 2 * k + 1) = np.osc.sigma;
    for (std::size_t l = 0; l < n; ++l) {
      if (l == k) continue;
      J(2 * k, 2 * l) = c;
      J(2 * k + 1, 2 * l + 1) = c;
    }
  }
  return J;
}

SpectrumReport origin_spectrum(const NetworkParams& np) {
  const Eigen::MatrixXd J = origin_jacobian(np);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(J, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericError("origin_spectrum: eigensolver did not converge");
  }
  SpectrumReport rep;
  const Eigen::VectorXcd ev = solver.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) rep.eigen_real_parts.push_back(ev[i].real());
  std::sort(rep.eigen_real_parts.begin(), rep.eigen_real_parts.end(), std::greater<>());
  rep.max_real_part = rep.eigen_real_parts.front();

  const double n = static_cast<double>(np.n);
  const double c = np.coupling / n;
  rep.closed_form_real_parts.assign(2, np.osc.sigma + c * (n - 1.0));
  rep.closed_form_real_parts.insert(rep.closed_form_real_parts.end(), 2 * (np.n - 1),
                                    np.osc.sigma - c);
  std::sort(rep.closed_form_real_parts.begin(), rep.closed_form_real_parts.end(),
            std::greater<>());
  for (std::size_t i = 0; i < rep.eigen_real_parts.size(); ++i) {
    rep.max_closed_form_deviation =
        std::max(rep.max_closed_form_deviation,
                 std::abs(rep.eigen_real_parts[i] - rep.closed_form_real_parts[i]));
  }
  if (rep.max_closed_form_deviation > 1e-6) {
    std::ostringstream msg;
    msg << "origin_spectrum: numeric and closed-form real parts differ by "
        << rep.max_closed_form_deviation;
    throw NumericError(msg.str());
  }
  rep.theorem_claim_unstable = std::abs(np.coupling) > std::abs(np.osc.sigma) / np.osc.b;
  rep.jacobian_unstable = rep.max_real_part > 0.0;
  return rep;
}

NetworkTrajectory simulate_network(const NetworkParams& np, const NetworkState& z0,
                                   const SimConfig& cfg, const InputSignal& u) {
  np.validate();
  cfg.validate();
  u.validate();
  check_state(np, z0.z, "simulate_network");

  std::vector<detail::InputSource> sources;
  sources.reserve(np.n);
  for (std::size_t k = 0; k < np.n; ++k) {
    const std::uint64_t seed =
        std::holds_alternative<TruncatedGaussianHold>(u.kind)
            ? derive_seed(std::get<TruncatedGaussianHold>(u.kind).seed, k)
            : 0;
    sources.emplace_back(u.with_seed(seed));
  }

  NetworkTrajectory traj;
  traj.params = np;
  traj.input = u;
  traj.times.push_back(0.0);
  traj.states.push_back(z0.z);

  std::vector<double> scratch;
  Eigen::VectorXd drive = Eigen::VectorXd::Zero(np.dim());
  const auto f = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd d;
    detail::network_field(np, z, d, scratch);
    if (!u.is_zero()) d += drive;
    return d;
  };

  Eigen::VectorXd z = z0.z;
  const std::size_t n = cfg.steps();
  for (std::size_t k = 0; k < n; ++k) {
    if (!u.is_zero()) {
      const double t_mid = (static_cast<double>(k) + 0.5) * cfg.dt;
      for (std::size_t node = 0; node < np.n; ++node) {
        const InputSample in = sources[node].at(t_mid);
        drive[2 * node] = in.u1;
        drive[2 * node + 1] = in.u2;
      }
    }
    z = detail::step(cfg.method, f, z, cfg.dt);
    const double t = static_cast<double>(k + 1) * cfg.dt;
    if (!(z.norm() <= kDivergenceNorm)) {
      std::ostringstream msg;
      msg << "network simulation diverged at t=" << t;
      throw DivergenceError(t, msg.str());
    }
    if ((k + 1) % cfg.record_every == 0) {
      traj.times.push_back(t);
      traj.states.push_back(z);
    }
  }
  return traj;
}

void write_csv(std::ostream& out, const NetworkTrajectory& traj) {
  out << 't';
  for (std::size_t k = 1; k <= traj.params.n; ++k) out << ",x_" << k << ",y_" << k;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << traj.times[i];
    for (Eigen::Index c = 0; c < traj.states[i].size(); ++c) out << ',' << traj.states[i][c];
    out << '\n';
  }
}

Eigen::VectorXd sample_in_ball(std::size_t dim, double radius, std::uint64_t seed,
                               std::uint64_t index) {
  if (dim == 0) throw DomainError("sample_in_ball: dim must be >= 1");
  if (!(radius >= 0.0)) throw DomainError("sample_in_ball: radius must be >= 0");
  Engine engine = make_engine(seed, index);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Eigen::VectorXd g(static_cast<Eigen::Index>(dim));
  double norm = 0.0;
  while (norm == 0.0) {
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = normal(engine);
    norm = g.norm();
  }
  const double scale =
      radius * std::pow(uniform(engine), 1.0 / static_cast<double>(dim)) / norm;
  return scale * g;
}

InvariantSetReport check_invariant_set(const NetworkParams& np,
                                       const NetworkRoAEstimate& est,
                                       std::size_t trials, const SimConfig& cfg,
                                       std::uint64_t seed, unsigned threads) {
  np.validate();
  cfg.validate();
  if (!est.valid || !est.nu) {
    throw DomainError("check_invariant_set: estimate is not valid (|C| >= |sigma|/b)");
  }
  const double nu = *est.nu;

  struct TrialResult {
    double max_increase = 0.0;
    double final_norm = 0.0;
  };
  std::vector<TrialResult> results(trials);

  parallel_for(trials, threads, [&](std::size_t trial) {
    Eigen::VectorXd z = sample_in_ball(np.dim(), std::sqrt(nu), seed, trial);
    std::vector<double> scratch;
    const auto f = [&](const Eigen::VectorXd& s) {
      Eigen::VectorXd d;
      detail::network_field(np, s, d, scratch);
      return d;
    };
    TrialResult r;
    double v_prev = 0.5 * z.squaredNorm();
    const std::size_t n = cfg.steps();
    for (std::size_t k = 0; k < n; ++k) {
      z = detail::step(cfg.method, f, z, cfg.dt);
      if ((k + 1) % cfg.record_every == 0 || k + 1 == n) {
        const double v = 0.5 * z.squaredNorm();
        if (!std::isfinite(v)) {
          const double t = static_cast<double>(k + 1) * cfg.dt;
          throw DivergenceError(t, "check_invariant_set: non-finite state");
        }
        r.max_increase = std::max(r.max_increase, v - v_prev);
        v_prev = v;
      }
    }
    r.final_norm = z.norm();
    results[trial] = r;
  });

  InvariantSetReport rep;
  rep.nu = nu;
  rep.trials = trials;
  rep.all_converged = true;
  for (const TrialResult& r : results) {
    rep.max_V_increase = std::max(rep.max_V_increase, r.max_increase);
    rep.max_final_norm = std::max(rep.max_final_norm, r.final_norm);
    if (r.max_increase > kInvariantVTolerance || !(r.final_norm < kInvariantFinalNorm)) {
      rep.all_converged = false;
    }
  }
  return rep;
}

}  // namespace bistable
