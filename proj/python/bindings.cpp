// Python bindings for the bistable oscillator toolkit.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "bistable/attraction.hpp"
#include "bistable/errors.hpp"
#include "bistable/experiments.hpp"
#include "bistable/network.hpp"
#include "bistable/readout.hpp"

namespace py = pybind11;
using namespace bistable;

namespace {

py::array_t<double> states_array(const std::vector<State>& states) {
  py::array_t<double> out({static_cast<py::ssize_t>(states.size()), py::ssize_t{2}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < states.size(); ++i) {
    v(i, 0) = states[i].x;
    v(i, 1) = states[i].y;
  }
  return out;
}

Eigen::MatrixXd network_states(const NetworkTrajectory& t) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.states.size()),
                    static_cast<Eigen::Index>(t.params.dim()));
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = t.states[i].transpose();
  }
  return m;
}

std::string repr_params(const OscParams& p) {
  std::ostringstream s;
  s << "OscParams(omega=" << p.omega << ", a=" << p.a << ", b=" << p.b << ", sigma=" << p.sigma
    << ")";
  return s.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bistable oscillator toolkit: regimes, basins, ISS certificates, networks";
  m.attr("__version__") = std::string(kToolkitVersion);

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", error.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", error.ptr());
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<NumericError>(m, "NumericError", error.ptr());

  py::class_<OscParams>(m, "OscParams")
      .def(py::init([](double omega, double a, double b, double sigma) {
             OscParams p{omega, a, b, sigma};
             p.validate();
             return p;
           }),
           py::arg("omega") = 1.0, py::arg("a") = 1.0, py::arg("b") = 1.0,
           py::arg("sigma") = -0.5)
      .def_readwrite("omega", &OscParams::omega)
      .def_readwrite("a", &OscParams::a)
      .def_readwrite("b", &OscParams::b)
      .def_readwrite("sigma", &OscParams::sigma)
      .def("__repr__", &repr_params);

  py::class_<State>(m, "State")
      .def(py::init<double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0)
      .def(py::init([](const py::tuple& t) {
        if (t.size() != 2) throw DomainError("State expects a pair (x, y)");
        return State{t[0].cast<double>(), t[1].cast<double>()};
      }))
      .def_readwrite("x", &State::x)
      .def_readwrite("y", &State::y)
      .def("radius", &State::radius)
      .def("__iter__", [](const State& s) { return py::iter(py::make_tuple(s.x, s.y)); })
      .def("__repr__", [](const State& s) {
        std::ostringstream o;
        o << "State(" << s.x << ", " << s.y << ")";
        return o.str();
      });
  py::implicitly_convertible<py::tuple, State>();

  py::enum_<Regime>(m, "Regime")
      .value("UNIQUE_EQUILIBRIUM", Regime::UniqueEquilibrium)
      .value("EQUILIBRIUM_PLUS_SEMI_STABLE_CYCLE", Regime::EquilibriumPlusSemiStableCycle)
      .value("BISTABLE", Regime::Bistable)
      .value("CYCLE_ONLY", Regime::CycleOnly);

  py::class_<Landmarks>(m, "Landmarks")
      .def_readonly("regime", &Landmarks::regime)
      .def_readonly("gamma0", &Landmarks::gamma0)
      .def_readonly("r_sep_sq", &Landmarks::r_sep_sq)
      .def_readonly("r_lc_sq", &Landmarks::r_lc_sq);

  m.def("vector_field", &vector_field, py::arg("params"), py::arg("state"));
  m.def("polar_radial_rate", &polar_radial_rate, py::arg("params"), py::arg("r"));
  m.def("amplitude_response", &amplitude_response, py::arg("params"), py::arg("eta"));
  m.def("classify", &classify, py::arg("params"));
  m.def("landmarks", &landmarks, py::arg("params"));
  m.def("gamma_mu", &gamma_mu, py::arg("params"), py::arg("mu"));

  py::class_<InputSignal>(m, "InputSignal")
      .def_static("zero", &InputSignal::zero)
      .def_static("constant", &InputSignal::constant, py::arg("u1"), py::arg("u2"))
      .def_static("truncated_gaussian", &InputSignal::truncated_gaussian, py::arg("mean"),
                  py::arg("std"), py::arg("lo"), py::arg("hi"), py::arg("hold_dt") = 0.01,
                  py::arg("seed") = 0)
      .def("with_seed", &InputSignal::with_seed, py::arg("seed"))
      .def("sample", [](const InputSignal& u, double t) {
        const InputSample s = sample_input(u, t);
        return py::make_tuple(s.u1, s.u2);
      });
  m.def("fig3_noise", &fig3_noise, py::arg("seed") = 0);

  py::enum_<Method>(m, "Method").value("RK4", Method::RK4).value("EULER", Method::Euler);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init([](double dt, double t_end, std::size_t record_every, Method method) {
             return SimConfig{dt, t_end, record_every, method};
           }),
           py::arg("dt") = 1e-3, py::arg("t_end") = 100.0, py::arg("record_every") = 1,
           py::arg("method") = Method::RK4)
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("t_end", &SimConfig::t_end)
      .def_readwrite("record_every", &SimConfig::record_every)
      .def_readwrite("method", &SimConfig::method);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("params", &Trajectory::params)
      .def_property_readonly("times",
                             [](const Trajectory& t) { return py::array(py::cast(t.times)); })
      .def_property_readonly("states", [](const Trajectory& t) { return states_array(t.states); })
      .def_readonly("input_sup_norm", &Trajectory::input_sup_norm)
      .def("__len__", [](const Trajectory& t) { return t.times.size(); });

  m.def("simulate", &simulate, py::arg("params"), py::arg("s0"),
        py::arg("input") = InputSignal::zero(), py::arg("config") = SimConfig{},
        py::call_guard<py::gil_scoped_release>());

  py::enum_<BasinLabel>(m, "BasinLabel")
      .value("ORIGIN", BasinLabel::Origin)
      .value("CYCLE", BasinLabel::Cycle)
      .value("UNDECIDED", BasinLabel::Undecided);

  py::class_<Grid>(m, "Grid")
      .def(py::init([](double x_min, double x_max, double y_min, double y_max, std::size_t nx,
                       std::size_t ny) {
             Grid g{x_min, x_max, y_min, y_max, nx, ny};
             g.validate();
             return g;
           }),
           py::arg("x_min") = -1.5, py::arg("x_max") = 1.5, py::arg("y_min") = -1.5,
           py::arg("y_max") = 1.5, py::arg("nx") = 101, py::arg("ny") = 101)
      .def("x", &Grid::x)
      .def("y", &Grid::y)
      .def_readonly("nx", &Grid::nx)
      .def_readonly("ny", &Grid::ny);

  py::class_<BasinMap>(m, "BasinMap")
      .def_property_readonly("labels",
                             [](const BasinMap& b) {
                               py::array_t<int> out({b.grid.ny, b.grid.nx});
                               auto v = out.mutable_unchecked<2>();
                               for (std::size_t j = 0; j < b.grid.ny; ++j) {
                                 for (std::size_t i = 0; i < b.grid.nx; ++i) {
                                   v(j, i) = static_cast<int>(b.label(i, j));
                                 }
                               }
                               return out;
                             })
      .def("label", &BasinMap::label)
      .def("undecided_fraction", &BasinMap::undecided_fraction);

  m.def("classify_initial_state",
        [](const OscParams& p, const State& s, const SimConfig& c) {
          return classify_initial_state(p, s, c).label;
        },
        py::arg("params"), py::arg("s0"), py::arg("config"));
  m.def("map_basin", &map_basin, py::arg("params"), py::arg("grid"), py::arg("config"),
        py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
  m.def("boundary_radius_on_ray", &boundary_radius_on_ray, py::arg("params"), py::arg("angle"),
        py::arg("config"), py::arg("tol") = 1e-3, py::call_guard<py::gil_scoped_release>());

  py::class_<IssCertificate>(m, "IssCertificate")
      .def_readonly("mu", &IssCertificate::mu)
      .def_readonly("epsilon", &IssCertificate::epsilon)
      .def_readonly("gamma_mu", &IssCertificate::gamma_mu)
      .def_readonly("init_radius_sq_bound", &IssCertificate::init_radius_sq_bound)
      .def_readonly("input_sup_bound", &IssCertificate::input_sup_bound)
      .def_readonly("ultimate_gain", &IssCertificate::ultimate_gain);
  py::class_<IssReport>(m, "IssReport")
      .def_readonly("holds", &IssReport::holds)
      .def_readonly("max_violation", &IssReport::max_violation)
      .def_readonly("tail_norm", &IssReport::tail_norm)
      .def_readonly("sup_u", &IssReport::sup_u)
      .def_readonly("max_excursion", &IssReport::max_excursion);
  m.def("make_certificate", &make_certificate, py::arg("params"), py::arg("mu"),
        py::arg("epsilon"));
  m.def("check_iss_run", &check_iss_run, py::arg("cert"), py::arg("trajectory"),
        py::arg("tol") = kIssTolerance);

  py::class_<TransitionVerdict>(m, "TransitionVerdict")
      .def_readonly("transitioned", &TransitionVerdict::transitioned)
      .def_readonly("first_crossing_time", &TransitionVerdict::first_crossing_time);
  m.def("detect_transition", &detect_transition, py::arg("trajectory"), py::arg("landmarks"));

  py::class_<NetworkParams>(m, "NetworkParams")
      .def(py::init([](std::size_t n, double coupling, const OscParams& osc) {
             NetworkParams np{n, coupling, osc};
             np.validate();
             return np;
           }),
           py::arg("n"), py::arg("coupling"), py::arg("osc") = OscParams{})
      .def_readonly("n", &NetworkParams::n)
      .def_readonly("coupling", &NetworkParams::coupling)
      .def_readonly("osc", &NetworkParams::osc);

  py::class_<NetworkRoAEstimate>(m, "NetworkRoAEstimate")
      .def_readonly("nu", &NetworkRoAEstimate::nu)
      .def_readonly("valid", &NetworkRoAEstimate::valid)
      .def_readonly("radius_sq_bound", &NetworkRoAEstimate::radius_sq_bound);
  py::class_<SpectrumReport>(m, "SpectrumReport")
      .def_readonly("eigen_real_parts", &SpectrumReport::eigen_real_parts)
      .def_readonly("max_real_part", &SpectrumReport::max_real_part)
      .def_readonly("closed_form_real_parts", &SpectrumReport::closed_form_real_parts)
      .def_readonly("theorem_claim_unstable", &SpectrumReport::theorem_claim_unstable)
      .def_readonly("jacobian_unstable", &SpectrumReport::jacobian_unstable);
  py::class_<InvariantSetReport>(m, "InvariantSetReport")
      .def_readonly("nu", &InvariantSetReport::nu)
      .def_readonly("trials", &InvariantSetReport::trials)
      .def_readonly("all_converged", &InvariantSetReport::all_converged)
      .def_readonly("max_V_increase", &InvariantSetReport::max_V_increase)
      .def_readonly("max_final_norm", &InvariantSetReport::max_final_norm);
  py::class_<NetworkTrajectory>(m, "NetworkTrajectory")
      .def_readonly("params", &NetworkTrajectory::params)
      .def_property_readonly(
          "times", [](const NetworkTrajectory& t) { return py::array(py::cast(t.times)); })
      .def_property_readonly("states", &network_states);

  m.def("network_vector_field",
        [](const NetworkParams& np, const Eigen::VectorXd& z) {
          return network_vector_field(np, NetworkState{z}).z;
        },
        py::arg("params"), py::arg("z"));
  m.def("roa_estimate", &roa_estimate, py::arg("params"));
  m.def("origin_jacobian", &origin_jacobian, py::arg("params"));
  m.def("origin_spectrum", &origin_spectrum, py::arg("params"));
  m.def("simulate_network",
        [](const NetworkParams& np, const Eigen::VectorXd& z0, const SimConfig& cfg,
           const InputSignal& u) { return simulate_network(np, NetworkState{z0}, cfg, u); },
        py::arg("params"), py::arg("z0"), py::arg("config"),
        py::arg("input") = InputSignal::zero(), py::call_guard<py::gil_scoped_release>());
  m.def("check_invariant_set", &check_invariant_set, py::arg("params"), py::arg("estimate"),
        py::arg("trials"), py::arg("config"), py::arg("seed"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());

  py::class_<MultiChannelSeries>(m, "MultiChannelSeries")
      .def(py::init([](double sample_rate, std::vector<std::string> channels,
                       Eigen::MatrixXd data, double t0) {
             MultiChannelSeries s{sample_rate, t0, std::move(channels), std::move(data)};
             s.validate();
             return s;
           }),
           py::arg("sample_rate"), py::arg("channels"), py::arg("data"), py::arg("t0") = 0.0)
      .def_readonly("sample_rate", &MultiChannelSeries::sample_rate)
      .def_readonly("t0", &MultiChannelSeries::t0)
      .def_readonly("channels", &MultiChannelSeries::channels)
      .def_readonly("data", &MultiChannelSeries::data);
  m.def("load_series", &load_series, py::arg("path"));
  m.def("save_series", &save_series, py::arg("path"), py::arg("series"));

  py::class_<ReadoutModel>(m, "ReadoutModel")
      .def_readonly("channels", &ReadoutModel::channels)
      .def_readonly("weights", &ReadoutModel::weights)
      .def_readonly("bias", &ReadoutModel::bias)
      .def_readonly("n", &ReadoutModel::n);
  py::class_<ReadoutFit>(m, "ReadoutFit")
      .def_readonly("model", &ReadoutFit::model)
      .def_readonly("rmse", &ReadoutFit::rmse)
      .def_readonly("rank", &ReadoutFit::rank)
      .def_readonly("regressors", &ReadoutFit::regressors)
      .def_property_readonly("rank_deficient", &ReadoutFit::rank_deficient);
  m.def("fit_affine", &fit_affine, py::arg("latent"), py::arg("target"));
  m.def("fit_readout", &fit_readout, py::arg("latent"), py::arg("target"));
  m.def("synthesize", &synthesize, py::arg("model"), py::arg("latent"));

  m.def("experiment_names", [] {
    std::vector<std::string> out;
    for (const auto n : experiment_names()) out.emplace_back(n);
    return out;
  });
  m.def("_run_experiment_json",
        [](const std::string& text, const std::string& out_dir, unsigned threads) {
          nlohmann::json j;
          try {
            j = nlohmann::json::parse(text);
          } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("config", e.what());
          }
          ExperimentConfig cfg = parse_config(j);
          if (!out_dir.empty()) cfg.output_dir = out_dir;
          py::gil_scoped_release release;
          const RunResult r = run_experiment(cfg, threads);
          std::vector<std::string> files;
          for (const auto& f : r.files) files.push_back(f.string());
          return std::make_pair(r.summary, files);
        },
        py::arg("config_json"), py::arg("out_dir") = "", py::arg("threads") = 1);
}
