#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bistable/attraction.hpp"
#include "bistable/errors.hpp"
#include "bistable/experiments.hpp"
#include "bistable/readout.hpp"
#include "bistable/rng.hpp"

using namespace bistable;

namespace {

const NetworkParams kNet{2, 0.2, {1.0, 1.0, 1.0, -0.5}};

// A forced two-node run gives a latent with full-rank regressors.
NetworkTrajectory rich_latent() {
  NetworkState z0 = NetworkState::zeros(2);
  z0.set_node(0, {0.3, 0.1});
  z0.set_node(1, {-0.2, 0.25});
  const InputSignal u = InputSignal::truncated_gaussian(0.0, 0.3, -0.5, 0.5, 0.05, 21);
  return simulate_network(kNet, z0, {1e-2, 20.0, 1, Method::RK4}, u);
}

Eigen::MatrixXd latent_matrix(const NetworkTrajectory& t) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.states.size()), t.states.front().size());
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = t.states[i].transpose();
  }
  return m;
}

MultiChannelSeries series_like(const NetworkTrajectory& t, const Eigen::MatrixXd& data) {
  MultiChannelSeries s;
  s.sample_rate = 1.0 / (t.times[1] - t.times[0]);
  s.t0 = t.times.front();
  for (Eigen::Index c = 0; c < data.cols(); ++c) s.channels.push_back("ch" + std::to_string(c + 1));
  s.data = data;
  return s;
}

Eigen::VectorXd rmse(const ReadoutModel& m, const NetworkTrajectory& t,
                     const Eigen::MatrixXd& target) {
  const Eigen::MatrixXd z = latent_matrix(t);
  const Eigen::MatrixXd pred = (z * m.weights.transpose()).rowwise() + m.bias.transpose();
  return ((pred - target).array().square().colwise().sum() / static_cast<double>(z.rows()))
      .sqrt()
      .transpose();
}

Eigen::MatrixXd known_weights() {
  Eigen::MatrixXd w(3, 4);
  w << 1.0, -0.5, 0.25, 2.0,  //
      0.0, 0.3, -1.2, 0.7,    //
      -2.0, 0.1, 0.4, -0.9;
  return w;
}

const Eigen::Vector3d kBias{0.5, -1.0, 0.25};

}  // namespace

TEST_CASE("read_series") {
  SUBCASE("sample rate from the time column") {
    std::istringstream in("t,ch1\n0,1\n0.5,2\n1.0,3\n");
    const MultiChannelSeries s = read_series(in);
    CHECK(s.sample_rate == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.samples() == 3);
    CHECK(s.channels == std::vector<std::string>{"ch1"});
    CHECK(s.data(2, 0) == 3.0);
  }
  SUBCASE("ragged row names the line") {
    std::istringstream in("t,a,b\n0,1,2\n1,3\n2,4,5\n");
    try {
      read_series(in);
      FAIL("expected parse error");
    } catch (const ParseError& e) {
      CHECK(e.row() == 3);
    }
  }
  SUBCASE("NaN and junk cells") {
    std::istringstream nan_in("t,a\n0,1\n1,nan\n");
    CHECK_THROWS_AS(read_series(nan_in), ParseError);
    std::istringstream junk("t,a\n0,1\n1,abc\n");
    CHECK_THROWS_AS(read_series(junk), ParseError);
  }
  SUBCASE("non-uniform sampling names the line") {
    std::istringstream in("t,a\n0,1\n1,1\n2,1\n3.5,1\n");
    try {
      read_series(in);
      FAIL("expected parse error");
    } catch (const ParseError& e) {
      CHECK(e.row() == 5);
    }
  }
  SUBCASE("bad header") {
    std::istringstream in("time,a\n0,1\n1,2\n");
    CHECK_THROWS_AS(read_series(in), ParseError);
  }
}

TEST_CASE("series roundtrip is exact") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> d(0.0, 3.0);
  MultiChannelSeries s;
  s.sample_rate = 256.0;
  s.t0 = 0.0;
  s.channels = {"Fp1", "Fp2", "Cz"};
  s.data.resize(50, 3);
  for (Eigen::Index i = 0; i < s.data.size(); ++i) s.data.data()[i] = d(rng);
  std::stringstream io;
  write_series(io, s);
  const MultiChannelSeries back = read_series(io);
  CHECK(back.channels == s.channels);
  CHECK(back.sample_rate == doctest::Approx(256.0).epsilon(1e-12));
  CHECK((back.data - s.data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fit_readout recovers a noiseless affine map") {
  const NetworkTrajectory lat = rich_latent();
  const Eigen::MatrixXd z = latent_matrix(lat);
  const Eigen::MatrixXd target =
      (z * known_weights().transpose()).rowwise() + kBias.transpose();
  const ReadoutFit fit = fit_readout(lat, series_like(lat, target));
  CHECK_FALSE(fit.rank_deficient());
  CHECK(fit.regressors == 5);
  CHECK((fit.model.weights - known_weights()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((fit.model.bias - kBias).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(fit.rmse.maxCoeff() < 1e-9);
  CHECK(fit.model.n == 2);
}

TEST_CASE("identity readout") {
  const NetworkTrajectory lat = rich_latent();
  const Eigen::MatrixXd target = latent_matrix(lat).col(0);
  const ReadoutFit fit = fit_readout(lat, series_like(lat, target));
  CHECK(std::abs(fit.model.weights(0, 0) - 1.0) < 1e-9);
  for (int c = 1; c < 4; ++c) CHECK(std::abs(fit.model.weights(0, c)) < 1e-9);
  CHECK(std::abs(fit.model.bias[0]) < 1e-9);
  CHECK(fit.rmse[0] < 1e-9);
}

TEST_CASE("noisy targets leave residuals at the noise level") {
  const NetworkTrajectory lat = rich_latent();
  const Eigen::MatrixXd clean =
      (latent_matrix(lat) * known_weights().transpose()).rowwise() + kBias.transpose();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.1);
    Eigen::MatrixXd target = clean;
    for (Eigen::Index i = 0; i < target.size(); ++i) target.data()[i] += noise(rng);
    const ReadoutFit fit = fit_readout(lat, series_like(lat, target));
    for (Eigen::Index c = 0; c < fit.rmse.size(); ++c) {
      CHECK(fit.rmse[c] >= 0.08);
      CHECK(fit.rmse[c] <= 0.12);
    }
  }
}

TEST_CASE("fit properties") {
  const NetworkTrajectory lat = rich_latent();
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 0.1);
  Eigen::MatrixXd target =
      (latent_matrix(lat) * known_weights().transpose()).rowwise() + kBias.transpose();
  for (Eigen::Index i = 0; i < target.size(); ++i) target.data()[i] += noise(rng);
  const ReadoutFit fit = fit_readout(lat, series_like(lat, target));

  SUBCASE("reported RMSE matches a recomputation") {
    CHECK((rmse(fit.model, lat, target) - fit.rmse).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("local optimality") {
    const Eigen::VectorXd base = rmse(fit.model, lat, target);
    for (Eigen::Index r = 0; r < fit.model.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < fit.model.weights.cols(); ++c) {
        for (double delta : {1e-3, -1e-3}) {
          ReadoutModel m = fit.model;
          m.weights(r, c) += delta;
          CHECK(rmse(m, lat, target)[r] >= base[r]);
        }
      }
    }
  }
  SUBCASE("scale equivariance") {
    const double k = 3.7;
    const ReadoutFit scaled = fit_readout(lat, series_like(lat, k * target));
    const double wscale = fit.model.weights.cwiseAbs().maxCoeff();
    CHECK((scaled.model.weights - k * fit.model.weights).cwiseAbs().maxCoeff() <=
          1e-12 * k * wscale);
    CHECK((scaled.model.bias - k * fit.model.bias).cwiseAbs().maxCoeff() <= 1e-12 * k * wscale);
  }
  SUBCASE("fit of the synthesized output returns the model") {
    const MultiChannelSeries synth = synthesize(fit.model, lat);
    CHECK(synth.samples() == lat.times.size());
    CHECK(synth.sample_rate == doctest::Approx(100.0).epsilon(1e-9));
    const ReadoutFit again = fit_readout(lat, synth);
    CHECK((again.model.weights - fit.model.weights).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((again.model.bias - fit.model.bias).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("model JSON roundtrip") {
    const nlohmann::json j = to_json(fit.model);
    CHECK(j.at("latent_dim") == 4);
    CHECK(j.at("n") == 2);
    const ReadoutModel back = model_from_json(j);
    CHECK(back.weights == fit.model.weights);
    CHECK(back.bias == fit.model.bias);
    CHECK(back.channels == fit.model.channels);
  }
}

TEST_CASE("rank-deficient regressors") {
  // Two identical nodes: the latent columns repeat.
  NetworkState z0 = NetworkState::zeros(2);
  z0.set_node(0, {0.9, 0.0});
  z0.set_node(1, {0.9, 0.0});
  const NetworkTrajectory lat = simulate_network(kNet, z0, {1e-2, 10.0, 1, Method::RK4});
  const Eigen::MatrixXd target = latent_matrix(lat).col(0);
  const ReadoutFit fit = fit_readout(lat, series_like(lat, target));
  CHECK(fit.rank_deficient());
  CHECK(fit.rank == 3);
  CHECK(fit.rmse[0] < 1e-9);
  // Minimum-norm solution splits the weight evenly across duplicates.
  CHECK(std::abs(fit.model.weights(0, 0) - 0.5) < 1e-9);
  CHECK(std::abs(fit.model.weights(0, 2) - 0.5) < 1e-9);
}

TEST_CASE("alignment and synthesis") {
  const NetworkTrajectory lat = rich_latent();
  SUBCASE("decimation picks the nearest latent sample") {
    MultiChannelSeries target;
    target.sample_rate = 10.0;
    target.t0 = 0.0;
    target.channels = {"a"};
    target.data = Eigen::MatrixXd::Zero(150, 1);
    const Eigen::MatrixXd z = align_latent(lat, target);
    REQUIRE(z.rows() == 150);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      CHECK(z.row(i).transpose() == lat.states[static_cast<std::size_t>(10 * i)]);
    }
    target.data = Eigen::MatrixXd::Zero(250, 1);
    CHECK_THROWS_AS(align_latent(lat, target), DomainError);
  }
  SUBCASE("zero weights give constant channels") {
    ReadoutModel m;
    m.channels = {"a", "b"};
    m.weights = Eigen::MatrixXd::Zero(2, 4);
    m.bias = Eigen::Vector2d{1.5, -2.0};
    m.n = 2;
    const MultiChannelSeries s = synthesize(m, lat);
    CHECK((s.data.col(0).array() == 1.5).all());
    CHECK((s.data.col(1).array() == -2.0).all());
    m.weights = Eigen::MatrixXd::Zero(2, 6);
    CHECK_THROWS_AS(synthesize(m, lat), DomainError);
  }
}

TEST_CASE("seizure-like epochs follow transitions of the latent") {
  const NetworkParams np{2, 0.05, {4.0, 1.0, 1.0, -0.2}};
  const SimConfig cfg{1e-3, 100.0, 10, Method::RK4};
  ReadoutModel m;
  m.channels = {"eeg"};
  m.weights = Eigen::RowVector4d{1.0, 0.0, 1.0, 0.0};
  m.bias = Eigen::VectorXd::Zero(1);
  m.n = 2;

  const auto late_spread = [](const MultiChannelSeries& s) {
    const Eigen::Index tail = s.data.rows() / 5;
    const Eigen::VectorXd v = s.data.col(0).tail(tail);
    return std::sqrt((v.array() - v.mean()).square().mean());
  };

  const NetworkTrajectory quiet = simulate_network(np, NetworkState::zeros(2), cfg);
  const NetworkTrajectory forced =
      simulate_network(np, NetworkState::zeros(2), cfg, fig3_noise(derive_seed(0, 0)));

  Trajectory node0;
  node0.params = np.osc;
  node0.times = forced.times;
  for (const auto& z : forced.states) node0.states.push_back({z[0], z[1]});
  REQUIRE(detect_transition(node0, landmarks(np.osc)).transitioned);

  CHECK(late_spread(synthesize(m, quiet)) == 0.0);
  CHECK(late_spread(synthesize(m, forced)) > 1.0);
}
