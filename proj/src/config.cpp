// Strict JSON configuration for the experiment harness.

#include <fstream>
#include <set>
#include <sstream>

#include "bistable/errors.hpp"
#include "bistable/experiments.hpp"

namespace bistable {

namespace {

using nlohmann::json;

constexpr std::pair<ExperimentKind, std::string_view> kKindNames[] = {
    {ExperimentKind::ClassifySweep, "classify-sweep"},
    {ExperimentKind::Nullclines, "nullclines"},
    {ExperimentKind::Basin, "basin"},
    {ExperimentKind::Iss, "iss"},
    {ExperimentKind::Fig3, "fig3"},
    {ExperimentKind::NetworkSpectrum, "network-spectrum"},
    {ExperimentKind::NetworkInvariant, "network-invariant"},
    {ExperimentKind::MonteCarlo, "montecarlo"},
    {ExperimentKind::Readout, "readout"},
};

// One JSON object whose keys must all be consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "'" + path_ + "' must be a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(name(key), "missing required key '" + name(key) + "'");
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(name(key), "'" + name(key) + "' must be a number");
    return v.get<double>();
  }

  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::uint64_t unsigned_int(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(name(key), "'" + name(key) + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
    return has(key) ? unsigned_int(key) : fallback;
  }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(name(key), "'" + name(key) + "' must be a string");
    return v.get<std::string>();
  }

  Section object(const std::string& key) { return Section(at(key), name(key)); }

  std::string name(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError(name(key), "unknown key '" + name(key) + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class Fn>
void validated(const std::string& key, Fn&& fn) {
  try {
    fn();
  } catch (const DomainError& e) {
    throw ConfigError(key, "invalid '" + key + "': " + e.what());
  }
}

OscParams parse_params(Section s) {
  OscParams p;
  p.omega = s.number("omega");
  p.a = s.number("a");
  p.b = s.number("b");
  p.sigma = s.number("sigma");
  s.finish();
  validated("params", [&] { p.validate(); });
  return p;
}

InputSignal parse_noise(Section s) {
  const std::string kind = s.string("kind");
  InputSignal u;
  if (kind == "zero") {
    u = InputSignal::zero();
  } else if (kind == "constant") {
    u = InputSignal::constant(s.number("u1"), s.number("u2"));
  } else if (kind == "truncated_gaussian_hold") {
    const double mean = s.number("mean");
    const double std = s.number("std");
    const double lo = s.number("lo");
    const double hi = s.number("hi");
    const double hold = s.number("hold_dt", 0.01);
    u = InputSignal::truncated_gaussian(mean, std, lo, hi, hold, 0);
  } else {
    throw ConfigError(s.name("kind"), "unknown noise kind '" + kind +
                                          "' (zero, constant, truncated_gaussian_hold)");
  }
  s.finish();
  validated("noise", [&] { u.validate(); });
  return u;
}

SimConfig parse_sim(Section s) {
  SimConfig c;
  c.dt = s.number("dt", c.dt);
  c.t_end = s.number("t_end");
  c.record_every = s.unsigned_int("record_every", 1);
  if (s.has("method")) {
    const std::string m = s.string("method");
    if (m == "rk4") {
      c.method = Method::RK4;
    } else if (m == "euler") {
      c.method = Method::Euler;
    } else {
      throw ConfigError(s.name("method"), "unknown method '" + m + "' (rk4, euler)");
    }
  }
  s.finish();
  validated("sim", [&] { c.validate(); });
  return c;
}

Grid parse_grid(Section s) {
  Grid g;
  g.x_min = s.number("x_min");
  g.x_max = s.number("x_max");
  g.y_min = s.number("y_min");
  g.y_max = s.number("y_max");
  g.nx = s.unsigned_int("nx");
  g.ny = s.unsigned_int("ny");
  s.finish();
  validated("grid", [&] { g.validate(); });
  return g;
}

json noise_json(const InputSignal& u) {
  if (const auto* c = std::get_if<ConstantInput>(&u.kind)) {
    return {{"kind", "constant"}, {"u1", c->u1}, {"u2", c->u2}};
  }
  if (const auto* g = std::get_if<TruncatedGaussianHold>(&u.kind)) {
    return {{"kind", "truncated_gaussian_hold"}, {"mean", g->mean}, {"std", g->std},
            {"lo", g->lo}, {"hi", g->hi}, {"hold_dt", g->hold_dt}};
  }
  return {{"kind", "zero"}};
}

}  // namespace

std::string_view to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) {
  for (const auto& [kind, n] : kKindNames) {
    if (n == name) return kind;
  }
  return std::nullopt;
}

std::vector<std::string_view> experiment_names() {
  std::vector<std::string_view> out;
  for (const auto& entry : kKindNames) out.push_back(entry.second);
  return out;
}

InputSignal fig3_noise(std::uint64_t seed) {
  return InputSignal::truncated_gaussian(0.2, 0.5, -0.3, 0.7, 0.1, seed);
}

ExperimentConfig parse_config(const json& j) {
  Section root(j, "");
  ExperimentConfig cfg;

  const std::string name = root.string("experiment");
  const auto kind = parse_experiment_kind(name);
  if (!kind) throw ConfigError("experiment", "unknown experiment kind '" + name + "'");
  cfg.experiment = *kind;
  using K = ExperimentKind;
  const K k = *kind;

  cfg.params = parse_params(root.object("params"));

  const bool needs_network =
      k == K::NetworkSpectrum || k == K::NetworkInvariant || k == K::Readout;
  if (needs_network || root.has("network")) {
    Section s = root.object("network");
    NetworkParams np;
    np.n = s.unsigned_int("n");
    np.coupling = s.number("coupling");
    np.osc = cfg.params;
    s.finish();
    validated("network", [&] { np.validate(); });
    cfg.network = np;
  }

  const bool noisy_default = k == K::Fig3 || k == K::MonteCarlo;
  if (root.has("noise")) {
    cfg.noise = parse_noise(root.object("noise"));
  } else if (noisy_default) {
    cfg.noise = fig3_noise();
  } else if (k == K::Iss) {
    throw ConfigError("noise", "missing required key 'noise'");
  }

  const bool needs_sim = k == K::Basin || k == K::Iss || k == K::Fig3 ||
                         k == K::NetworkInvariant || k == K::MonteCarlo || k == K::Readout;
  if (needs_sim || root.has("sim")) cfg.sim = parse_sim(root.object("sim"));

  if (root.has("seeds") || k == K::NetworkInvariant || k == K::MonteCarlo) {
    Section s = root.object("seeds");
    cfg.master_seed = s.unsigned_int("master_seed");
    cfg.n_trials = s.unsigned_int("n_trials", cfg.n_trials);
    s.finish();
    if (cfg.n_trials < 1) throw ConfigError("seeds.n_trials", "'seeds.n_trials' must be >= 1");
  }

  if (root.has("output_dir")) cfg.output_dir = root.string("output_dir");

  if (root.has("initial_state")) {
    Section s = root.object("initial_state");
    cfg.initial_state = {s.number("x"), s.number("y")};
    s.finish();
    if (!cfg.initial_state.finite()) {
      throw ConfigError("initial_state", "'initial_state' must be finite");
    }
  }

  if (root.has("grid") || k == K::Nullclines || k == K::Basin) {
    cfg.grid = parse_grid(root.object("grid"));
  }

  if (root.has("sweep") || k == K::ClassifySweep) {
    Section s = root.object("sweep");
    cfg.sweep.sigma_min = s.number("sigma_min");
    cfg.sweep.sigma_max = s.number("sigma_max");
    cfg.sweep.sigma_step = s.number("sigma_step");
    s.finish();
    if (!(cfg.sweep.sigma_step > 0.0) || !(cfg.sweep.sigma_max >= cfg.sweep.sigma_min)) {
      throw ConfigError("sweep", "'sweep' needs sigma_step > 0 and sigma_max >= sigma_min");
    }
  }

  if (root.has("sigmas")) {
    const json& v = root.at("sigmas");
    if (!v.is_array() || v.empty()) {
      throw ConfigError("sigmas", "'sigmas' must be a non-empty array of numbers");
    }
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError("sigmas", "'sigmas' must contain numbers only");
      cfg.sigmas.push_back(x.get<double>());
    }
  } else if (k == K::Fig3) {
    cfg.sigmas = {-0.8, -0.2};
  }

  if (root.has("iss") || k == K::Iss) {
    Section s = root.object("iss");
    cfg.mu = s.number("mu");
    cfg.epsilon = s.number("epsilon");
    s.finish();
  }

  if (root.has("basin")) {
    Section s = root.object("basin");
    cfg.boundary_tol = s.number("boundary_tol", cfg.boundary_tol);
    s.finish();
    if (!(cfg.boundary_tol > 0.0)) {
      throw ConfigError("basin.boundary_tol", "'basin.boundary_tol' must be positive");
    }
  }

  if (root.has("readout") || k == K::Readout) {
    Section s = root.object("readout");
    cfg.readout_target = s.string("target");
    s.finish();
  }

  root.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

nlohmann::json ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = std::string(bistable::to_string(experiment));
  j["params"] = {{"omega", params.omega}, {"a", params.a}, {"b", params.b},
                 {"sigma", params.sigma}};
  if (network) j["network"] = {{"n", network->n}, {"coupling", network->coupling}};
  j["noise"] = noise_json(noise);
  j["sim"] = {{"dt", sim.dt},
              {"t_end", sim.t_end},
              {"record_every", sim.record_every},
              {"method", std::string(bistable::to_string(sim.method))}};
  j["seeds"] = {{"master_seed", master_seed}, {"n_trials", n_trials}};
  j["output_dir"] = output_dir.string();
  j["initial_state"] = {{"x", initial_state.x}, {"y", initial_state.y}};
  j["grid"] = {{"x_min", grid.x_min}, {"x_max", grid.x_max}, {"y_min", grid.y_min},
               {"y_max", grid.y_max}, {"nx", grid.nx},       {"ny", grid.ny}};
  j["sweep"] = {{"sigma_min", sweep.sigma_min},
                {"sigma_max", sweep.sigma_max},
                {"sigma_step", sweep.sigma_step}};
  if (!sigmas.empty()) j["sigmas"] = sigmas;
  j["iss"] = {{"mu", mu}, {"epsilon", epsilon}};
  j["basin"] = {{"boundary_tol", boundary_tol}};
  if (!readout_target.empty()) j["readout"] = {{"target", readout_target.string()}};
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  json j = cfg.to_json();
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

}  // namespace bistable
