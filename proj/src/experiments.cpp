#include "bistable/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "bistable/errors.hpp"
#include "bistable/parallel.hpp"
#include "bistable/readout.hpp"
#include "bistable/rng.hpp"

namespace bistable {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string fixed(double v, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

// Single-writer artifact output; records the file name for the manifest.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    body(out);
    if (!out) throw Error("write failed for " + path.string());
    files_.push_back(path);
  }

  void write_json(const std::string& name, const json& j) {
    write(name, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  }

  const std::vector<fs::path>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
};

OscParams with_sigma(OscParams p, double sigma) {
  p.sigma = sigma;
  return p;
}

std::vector<double> sigma_list(const ExperimentConfig& cfg) {
  return cfg.sigmas.empty() ? std::vector<double>{cfg.params.sigma} : cfg.sigmas;
}

json stats_json(const TransitionStats& s) {
  return {{"sigma", s.sigma},
          {"n_trials", s.n_trials},
          {"n_transitioned", s.n_transitioned},
          {"n_failed", s.n_failed},
          {"p_hat", s.p_hat},
          {"wilson_ci95", {s.wilson_ci95.first, s.wilson_ci95.second}},
          {"mean_first_crossing", optional_json(s.mean_first_crossing)}};
}

json certificate_json(const IssCertificate& c) {
  return {{"mu", c.mu},
          {"epsilon", c.epsilon},
          {"gamma_mu", c.gamma_mu},
          {"init_radius_sq_bound", c.init_radius_sq_bound},
          {"input_sup_bound", c.input_sup_bound},
          {"ultimate_gain", c.ultimate_gain}};
}

std::string run_classify_sweep(const ExperimentConfig& cfg, ArtifactWriter& out) {
  const SigmaSweep& sw = cfg.sweep;
  const auto count = static_cast<std::size_t>(
      std::floor((sw.sigma_max - sw.sigma_min) / sw.sigma_step + 1e-9)) + 1;
  std::vector<double> sigmas(count);
  std::vector<Landmarks> lms(count);
  for (std::size_t i = 0; i < count; ++i) {
    sigmas[i] = sw.sigma_min + static_cast<double>(i) * sw.sigma_step;
    lms[i] = landmarks(with_sigma(cfg.params, sigmas[i]));
  }
  json changes = json::array();
  for (std::size_t i = 1; i < count; ++i) {
    if (lms[i].regime != lms[i - 1].regime) {
      changes.push_back({{"sigma_before", sigmas[i - 1]},
                         {"sigma_after", sigmas[i]},
                         {"from", to_string(lms[i - 1].regime)},
                         {"to", to_string(lms[i].regime)}});
    }
  }
  out.write("classify_sweep.csv", [&](std::ostream& os) {
    os << "sigma,regime,gamma0,r_sep_sq,r_lc_sq\n" << std::setprecision(17);
    for (std::size_t i = 0; i < count; ++i) {
      os << sigmas[i] << ',' << to_string(lms[i].regime) << ',' << lms[i].gamma0 << ',';
      if (lms[i].r_sep_sq) os << *lms[i].r_sep_sq;
      os << ',';
      if (lms[i].r_lc_sq) os << *lms[i].r_lc_sq;
      os << '\n';
    }
  });
  out.write_json("classify_sweep_summary.json",
                 {{"points", count}, {"regime_changes", changes}});
  std::ostringstream s;
  s << "classify-sweep: " << count << " points, regime changes at sigma =";
  for (const auto& c : changes) s << ' ' << c["sigma_after"].get<double>();
  return s.str();
}

std::string run_nullclines(const ExperimentConfig& cfg, ArtifactWriter& out) {
  const NullclineData d = nullcline_data(cfg.params, cfg.grid);
  out.write("nullclines_field.csv", [&](std::ostream& os) {
    os << "x,y,xdot,ydot\n" << std::setprecision(17);
    for (std::size_t i = 0; i < d.points.size(); ++i) {
      os << d.points[i].x << ',' << d.points[i].y << ',' << d.field[i].x << ','
         << d.field[i].y << '\n';
    }
  });
  out.write("nullclines_contours.csv", [&](std::ostream& os) {
    os << "curve,x1,y1,x2,y2\n" << std::setprecision(17);
    for (const auto& seg : d.xdot_zero) {
      os << "xdot," << seg.x1 << ',' << seg.y1 << ',' << seg.x2 << ',' << seg.y2 << '\n';
    }
    for (const auto& seg : d.ydot_zero) {
      os << "ydot," << seg.x1 << ',' << seg.y1 << ',' << seg.x2 << ',' << seg.y2 << '\n';
    }
  });
  std::ostringstream s;
  s << "nullclines: regime " << to_string(classify(cfg.params)) << ", "
    << d.xdot_zero.size() << " xdot=0 and " << d.ydot_zero.size() << " ydot=0 segments";
  return s.str();
}

std::string run_basin(const ExperimentConfig& cfg, ArtifactWriter& out, unsigned threads) {
  const BasinMap map = map_basin(cfg.params, cfg.grid, cfg.sim, threads);
  const Landmarks lm = landmarks(cfg.params);
  const double analytic = std::sqrt(*lm.r_sep_sq);
  const double cell = std::max(cfg.grid.dx(), cfg.grid.dy());

  std::vector<double> rays(8);
  parallel_for(rays.size(), threads, [&](std::size_t i) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / 8.0;
    rays[i] = boundary_radius_on_ray(cfg.params, angle, cfg.sim, cfg.boundary_tol);
  });
  double max_err = 0.0;
  for (double r : rays) max_err = std::max(max_err, std::abs(r - analytic));
  const double undecided_far = map.undecided_fraction_outside(analytic, cell);

  out.write("basin.csv", [&](std::ostream& os) { write_csv(os, map); });
  out.write_json("basin_summary.json",
                 {{"analytic_boundary_radius", analytic},
                  {"ray_boundary_radii", rays},
                  {"max_ray_error", max_err},
                  {"bisection_tol", cfg.boundary_tol},
                  {"cell_size", cell},
                  {"undecided_fraction", map.undecided_fraction()},
                  {"undecided_fraction_outside_boundary_cell", undecided_far}});
  std::ostringstream s;
  s << "basin: boundary radius " << fixed(analytic, 6) << " (rays within "
    << max_err << "), cell " << cell << ", undecided " << map.undecided_fraction();
  return s.str();
}

std::string run_iss(const ExperimentConfig& cfg, ArtifactWriter& out) {
  const IssCertificate cert = make_certificate(cfg.params, cfg.mu, cfg.epsilon);
  const bool random = std::holds_alternative<TruncatedGaussianHold>(cfg.noise.kind);
  const std::size_t paths = random ? cfg.n_trials : 1;
  IssReport agg;
  agg.holds = true;
  agg.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < paths; ++i) {
    const InputSignal u = cfg.noise.with_seed(derive_seed(cfg.master_seed, i));
    const Trajectory traj = simulate(cfg.params, cfg.initial_state, u, cfg.sim);
    const IssReport r = check_iss_run(cert, traj);
    agg.holds = agg.holds && r.holds;
    agg.max_violation = std::max(agg.max_violation, r.max_violation);
    agg.tail_norm = std::max(agg.tail_norm, r.tail_norm);
    agg.sup_u = std::max(agg.sup_u, r.sup_u);
    agg.max_excursion = std::max(agg.max_excursion, r.max_excursion);
    if (i == 0) out.write("iss_trajectory.csv", [&](std::ostream& os) { write_csv(os, traj); });
  }
  out.write_json("iss_report.json", {{"holds", agg.holds},
                                     {"max_violation", agg.max_violation},
                                     {"tail_norm", agg.tail_norm},
                                     {"sup_u", agg.sup_u},
                                     {"max_excursion", agg.max_excursion},
                                     {"paths", paths},
                                     {"cert", certificate_json(cert)}});
  std::ostringstream s;
  s << "iss: " << (agg.holds ? "holds" : "VIOLATED") << " on " << paths
    << " path(s); tail norm " << agg.tail_norm << " vs gain*sup|u| "
    << cert.ultimate_gain * agg.sup_u;
  return s.str();
}

std::string run_fig3(const ExperimentConfig& cfg, ArtifactWriter& out) {
  const InputSignal u = cfg.noise.with_seed(derive_seed(cfg.master_seed, 0));
  json runs = json::array();
  std::ostringstream s;
  s << "fig3:";
  const auto sigmas = sigma_list(cfg);
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const OscParams p = with_sigma(cfg.params, sigmas[i]);
    const Trajectory traj = simulate(p, cfg.initial_state, u, cfg.sim);
    const TransitionVerdict v = detect_transition(traj, landmarks(p));
    const std::string name = "fig3_run" + std::to_string(i) + ".csv";
    out.write(name, [&](std::ostream& os) { write_csv(os, traj); });
    runs.push_back({{"sigma", sigmas[i]},
                    {"transitioned", v.transitioned},
                    {"first_crossing_t", optional_json(v.first_crossing_time)},
                    {"file", name}});
    s << " sigma=" << sigmas[i] << (v.transitioned ? " transitioned" : " stayed");
  }
  out.write_json("fig3_summary.json", {{"runs", runs}});
  return s.str();
}

std::string run_spectrum(const ExperimentConfig& cfg, ArtifactWriter& out) {
  const NetworkParams& np = *cfg.network;
  const SpectrumReport r = origin_spectrum(np);
  out.write_json("spectrum.json", {{"n", np.n},
                                   {"C", np.coupling},
                                   {"sigma", np.osc.sigma},
                                   {"omega", np.osc.omega},
                                   {"real_parts", r.eigen_real_parts},
                                   {"max_real_part", r.max_real_part},
                                   {"theorem_claim_unstable", r.theorem_claim_unstable},
                                   {"jacobian_unstable", r.jacobian_unstable},
                                   {"closed_form_real_parts", r.closed_form_real_parts},
                                   {"max_closed_form_deviation", r.max_closed_form_deviation}});
  std::ostringstream s;
  s << "network-spectrum: max real part " << r.max_real_part << " ("
    << (r.jacobian_unstable ? "unstable" : "stable") << "; coupling threshold claims "
    << (r.theorem_claim_unstable ? "unstable" : "no instability") << ")";
  return s.str();
}

std::string run_invariant(const ExperimentConfig& cfg, ArtifactWriter& out, unsigned threads) {
  const NetworkParams& np = *cfg.network;
  const NetworkRoAEstimate est = roa_estimate(np);
  const InvariantSetReport r =
      check_invariant_set(np, est, cfg.n_trials, cfg.sim, cfg.master_seed, threads);
  out.write_json("invariant_set.json", {{"nu", r.nu},
                                        {"trials", r.trials},
                                        {"all_converged", r.all_converged},
                                        {"max_V_increase", r.max_V_increase},
                                        {"max_final_norm", r.max_final_norm}});
  std::ostringstream s;
  s << "network-invariant: nu=" << r.nu << ", " << r.trials << " trials, "
    << (r.all_converged ? "all converged" : "NOT all converged");
  return s.str();
}

std::string run_mc(const ExperimentConfig& cfg, ArtifactWriter& out, unsigned threads) {
  json results = json::array();
  std::ostringstream s;
  s << "montecarlo:";
  for (double sigma : sigma_list(cfg)) {
    ExperimentConfig c = cfg;
    c.params.sigma = sigma;
    const TransitionStats st = run_montecarlo(c, threads);
    results.push_back(stats_json(st));
    s << " sigma=" << sigma << " p=" << st.p_hat << " [" << fixed(st.wilson_ci95.first, 3)
      << ", " << fixed(st.wilson_ci95.second, 3) << "]";
  }
  out.write_json("montecarlo.json", {{"results", results}});
  return s.str();
}

std::string run_readout(const ExperimentConfig& cfg, ArtifactWriter& out) {
  const NetworkParams& np = *cfg.network;
  const MultiChannelSeries target = load_series(cfg.readout_target);
  NetworkState z0 = NetworkState::zeros(np.n);
  for (std::size_t k = 0; k < np.n; ++k) z0.set_node(k, cfg.initial_state);
  const InputSignal u = cfg.noise.with_seed(cfg.master_seed);
  const NetworkTrajectory latent = simulate_network(np, z0, cfg.sim, u);
  const ReadoutFit fit = fit_readout(latent, target);
  const MultiChannelSeries synth = synthesize(fit.model, latent);

  json model = to_json(fit.model);
  json report = {{"model", model},
                 {"rmse", std::vector<double>(fit.rmse.data(), fit.rmse.data() + fit.rmse.size())},
                 {"rank", fit.rank},
                 {"regressors", fit.regressors},
                 {"rank_deficient", fit.rank_deficient()}};
  out.write_json("readout_model.json", model);
  out.write_json("readout_fit.json", report);
  out.write("readout_latent.csv", [&](std::ostream& os) { write_csv(os, latent); });
  out.write("readout_synth.csv", [&](std::ostream& os) { write_series(os, synth); });
  std::ostringstream s;
  s << "readout: " << target.channels.size() << " channel(s), rank " << fit.rank << "/"
    << fit.regressors << ", max rmse " << fit.rmse.maxCoeff();
  return s.str();
}

}  // namespace

std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  const double lo = k == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = k == n ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

TransitionStats run_montecarlo(const ExperimentConfig& cfg, unsigned threads) {
  const Landmarks lm = landmarks(cfg.params);
  if (lm.regime != Regime::Bistable) {
    throw DomainError("run_montecarlo: parameters must be bistable");
  }
  struct Outcome {
    bool failed = false;
    TransitionVerdict verdict;
  };
  std::vector<Outcome> outcomes(cfg.n_trials);
  parallel_for(cfg.n_trials, threads, [&](std::size_t i) {
    const InputSignal u = cfg.noise.with_seed(derive_seed(cfg.master_seed, i));
    try {
      const Trajectory traj = simulate(cfg.params, cfg.initial_state, u, cfg.sim);
      outcomes[i].verdict = detect_transition(traj, lm);
    } catch (const DivergenceError&) {
      outcomes[i].failed = true;
    } catch (const NumericError&) {
      outcomes[i].failed = true;
    }
  });

  TransitionStats st;
  st.sigma = cfg.params.sigma;
  double crossing_sum = 0.0;
  for (const Outcome& o : outcomes) {
    if (o.failed) {
      ++st.n_failed;
      continue;
    }
    ++st.n_trials;
    if (o.verdict.transitioned) {
      ++st.n_transitioned;
      crossing_sum += *o.verdict.first_crossing_time;
    }
  }
  st.p_hat = st.n_trials ? static_cast<double>(st.n_transitioned) / static_cast<double>(st.n_trials)
                         : 0.0;
  st.wilson_ci95 = wilson_interval(st.n_transitioned, st.n_trials);
  if (st.n_transitioned > 0) {
    st.mean_first_crossing = crossing_sum / static_cast<double>(st.n_transitioned);
  }
  return st;
}

std::vector<ContourSegment> zero_contour(const Grid& grid, const std::vector<double>& values) {
  grid.validate();
  if (values.size() != grid.size()) throw DomainError("zero_contour: value count mismatch");
  std::vector<ContourSegment> out;
  const auto v = [&](std::size_t i, std::size_t j) { return values[j * grid.nx + i]; };
  // Point on the edge between two nodes where the linear interpolant vanishes.
  const auto cross = [](double xa, double ya, double va, double xb, double yb, double vb) {
    const double t = va / (va - vb);
    return State{xa + t * (xb - xa), ya + t * (yb - ya)};
  };
  for (std::size_t j = 0; j + 1 < grid.ny; ++j) {
    for (std::size_t i = 0; i + 1 < grid.nx; ++i) {
      const double x0 = grid.x(i), x1 = grid.x(i + 1);
      const double y0 = grid.y(j), y1 = grid.y(j + 1);
      // Corners counter-clockwise from (i, j).
      const double cv[4] = {v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)};
      const double cx[4] = {x0, x1, x1, x0};
      const double cy[4] = {y0, y0, y1, y1};
      bool pos[4];
      for (int c = 0; c < 4; ++c) pos[c] = cv[c] > 0.0;
      // Edge e joins corner e and corner e+1.
      std::optional<State> edge[4];
      int crossings = 0;
      for (int e = 0; e < 4; ++e) {
        const int a = e, b = (e + 1) % 4;
        if (pos[a] != pos[b]) {
          edge[e] = cross(cx[a], cy[a], cv[a], cx[b], cy[b], cv[b]);
          ++crossings;
        }
      }
      const auto emit = [&](int e1, int e2) {
        out.push_back({edge[e1]->x, edge[e1]->y, edge[e2]->x, edge[e2]->y});
      };
      if (crossings == 2) {
        int first = -1;
        for (int e = 0; e < 4; ++e) {
          if (!edge[e]) continue;
          if (first < 0) {
            first = e;
          } else {
            emit(first, e);
          }
        }
      } else if (crossings == 4) {
        // Saddle: cut off each corner whose sign differs from the centre's.
        const bool centre_pos = (cv[0] + cv[1] + cv[2] + cv[3]) / 4.0 > 0.0;
        for (int c = 0; c < 4; ++c) {
          if (pos[c] != centre_pos) emit((c + 3) % 4, c);
        }
      }
    }
  }
  return out;
}

NullclineData nullcline_data(const OscParams& p, const Grid& grid) {
  p.validate();
  grid.validate();
  NullclineData d;
  std::vector<double> xdot(grid.size()), ydot(grid.size());
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const State s{grid.x(i), grid.y(j)};
      const State f = vector_field(p, s);
      d.points.push_back(s);
      d.field.push_back(f);
      xdot[j * grid.nx + i] = f.x;
      ydot[j * grid.nx + i] = f.y;
    }
  }
  d.xdot_zero = zero_contour(grid, xdot);
  d.ydot_zero = zero_contour(grid, ydot);
  return d;
}

std::filesystem::path emit_nullcline_data(const OscParams& p, const Grid& grid,
                                          const std::filesystem::path& dir) {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::Nullclines;
  cfg.params = p;
  cfg.grid = grid;
  ArtifactWriter out(dir);
  run_nullclines(cfg, out);
  return out.files().front();
}

RunResult run_experiment(const ExperimentConfig& cfg, unsigned threads) {
  ArtifactWriter out(cfg.output_dir);
  std::string summary;
  switch (cfg.experiment) {
    case ExperimentKind::ClassifySweep:
      summary = run_classify_sweep(cfg, out);
      break;
    case ExperimentKind::Nullclines:
      summary = run_nullclines(cfg, out);
      break;
    case ExperimentKind::Basin:
      summary = run_basin(cfg, out, threads);
      break;
    case ExperimentKind::Iss:
      summary = run_iss(cfg, out);
      break;
    case ExperimentKind::Fig3:
      summary = run_fig3(cfg, out);
      break;
    case ExperimentKind::NetworkSpectrum:
      summary = run_spectrum(cfg, out);
      break;
    case ExperimentKind::NetworkInvariant:
      summary = run_invariant(cfg, out, threads);
      break;
    case ExperimentKind::MonteCarlo:
      summary = run_mc(cfg, out, threads);
      break;
    case ExperimentKind::Readout:
      summary = run_readout(cfg, out);
      break;
  }
  std::vector<std::string> names;
  for (const auto& f : out.files()) names.push_back(f.filename().string());
  json manifest = {{"toolkit_version", std::string(kToolkitVersion)},
                   {"experiment", std::string(to_string(cfg.experiment))},
                   {"config_hash", config_hash(cfg)},
                   {"master_seed", cfg.master_seed},
                   {"n_trials", cfg.n_trials},
                   {"files", names}};
  out.write_json("manifest.json", manifest);
  return {summary, out.files()};
}

}  // namespace bistable
