#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "bistable/errors.hpp"
#include "bistable/integrate.hpp"

using namespace bistable;

namespace {

const OscParams kUnit{1.0, 1.0, 1.0, -0.5};

SimConfig rk4(double dt, double t_end, std::size_t every = 1) {
  return {dt, t_end, every, Method::RK4};
}

double exact_cycle_radius(const OscParams& p) { return std::sqrt(*landmarks(p).r_lc_sq); }

}  // namespace

TEST_CASE("simulate converges to the attractor of its basin") {
  SUBCASE("inside the separatrix -> origin") {
    const Trajectory t = simulate(kUnit, {0.1, 0}, InputSignal::zero(), rk4(1e-3, 200, 1000));
    CHECK(t.states.back().radius() < 1e-6);
  }
  SUBCASE("outside -> stable cycle") {
    const Trajectory t = simulate(kUnit, {1.5, 0}, InputSignal::zero(), rk4(1e-3, 200, 1000));
    CHECK(std::abs(t.states.back().radius() - exact_cycle_radius(kUnit)) < 1e-6);
    CHECK(exact_cycle_radius(kUnit) == doctest::Approx(1.306563).epsilon(1e-6));
  }
}

TEST_CASE("phase advances at omega") {
  const Trajectory t = simulate({4.0, 1, 1, -0.5}, {0.6, 0}, InputSignal::zero(), rk4(1e-3, 10));
  const auto polar = polar_samples(t);
  CHECK(std::abs(polar.back().theta - polar.front().theta - 40.0) < 1e-3);
}

TEST_CASE("trajectory sampling grid") {
  const Trajectory t = simulate(kUnit, {0.3, 0.1}, InputSignal::zero(), rk4(1e-3, 1.0, 7));
  REQUIRE(t.times.size() == t.states.size());
  CHECK(t.times.front() == 0.0);
  CHECK(t.times.size() == 1000 / 7 + 1);
  for (std::size_t i = 1; i < t.times.size(); ++i) {
    CHECK(t.times[i] - t.times[i - 1] == doctest::Approx(7e-3).epsilon(1e-9));
  }
  CHECK(t.times.back() <= 1.0);
}

TEST_CASE("zero input keeps the origin exactly") {
  const Trajectory t = simulate(kUnit, {0, 0}, InputSignal::zero(), rk4(1e-2, 50));
  for (const State& s : t.states) CHECK(s == State{0, 0});
}

TEST_CASE("simulate is deterministic bit for bit") {
  const InputSignal u = InputSignal::truncated_gaussian(0.2, 0.5, -0.3, 0.7, 0.01, 99);
  const Trajectory a = simulate(kUnit, {0.1, 0.2}, u, rk4(1e-3, 20, 10));
  const Trajectory b = simulate(kUnit, {0.1, 0.2}, u, rk4(1e-3, 20, 10));
  REQUIRE(a.states.size() == b.states.size());
  CHECK(std::memcmp(a.states.data(), b.states.data(), a.states.size() * sizeof(State)) == 0);
  CHECK(a.input_sup_norm == b.input_sup_norm);
}

TEST_CASE("divergence guard names the blow-up time") {
  try {
    simulate(kUnit, {5, 0}, InputSignal::zero(), rk4(0.5, 100));
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.time() <= 100.0);
    CHECK(std::string(e.what()).find("diverged at t=") != std::string::npos);
  }
}

TEST_CASE("invalid configuration is rejected") {
  CHECK_THROWS_AS(simulate(kUnit, {0, 0}, InputSignal::zero(), rk4(1.0, 0.5)), DomainError);
  CHECK_THROWS_AS(simulate(kUnit, {0, 0}, InputSignal::zero(), rk4(1e-3, 1, 0)), DomainError);
  CHECK_THROWS_AS(simulate(kUnit, {NAN, 0}, InputSignal::zero(), rk4(1e-3, 1)), DomainError);
  CHECK_THROWS_AS(
      simulate(kUnit, {0, 0}, InputSignal::truncated_gaussian(0.9, 0.5, -0.3, 0.7, 0.01, 1),
               rk4(1e-3, 1)),
      DomainError);
}

TEST_CASE("simulate_polar") {
  SUBCASE("cycle radius is a fixed point") {
    const double r_lc = exact_cycle_radius(kUnit);
    const auto rs = simulate_polar(kUnit, r_lc, rk4(1e-3, 100, 100));
    for (const auto& s : rs) CHECK(std::abs(s.r - r_lc) < 1e-8);
  }
  SUBCASE("inside the separatrix the radius decays monotonically") {
    const OscParams p{1, 1, 1, -0.8};
    CHECK(std::sqrt(*landmarks(p).r_sep_sq) == doctest::Approx(0.7435).epsilon(1e-4));
    const auto rs = simulate_polar(p, 0.7, rk4(1e-3, 50, 10));
    for (std::size_t i = 1; i < rs.size(); ++i) CHECK(rs[i].r < rs[i - 1].r);
  }
  SUBCASE("agrees with the Cartesian integration") {
    const OscParams p{1, 1, 1, -0.8};
    const SimConfig cfg = rk4(1e-3, 50, 50);
    const auto rs = simulate_polar(p, 0.7, cfg);
    const Trajectory t = simulate(p, {0.7, 0}, InputSignal::zero(), cfg);
    REQUIRE(rs.size() == t.states.size());
    for (std::size_t i = 0; i < rs.size(); ++i) {
      CHECK(rs[i].t == t.times[i]);
      CHECK(std::abs(rs[i].r - t.states[i].radius()) < 1e-6);
    }
  }
  CHECK_THROWS_AS(simulate_polar(kUnit, -0.1, rk4(1e-3, 1)), DomainError);
}

TEST_CASE("RK4 is fourth order, Euler first order") {
  const OscParams p{1.0, 1.0, 1.0, -0.5};
  const State s0{0.9, 0.0};
  const auto end_state = [&](Method m, double dt) {
    return simulate(p, s0, InputSignal::zero(), {dt, 5.0, 1, m}).states.back();
  };
  const double dt = 0.02;
  {
    const State ref = end_state(Method::RK4, dt / 8);
    const double e1 = (end_state(Method::RK4, dt) - ref).radius();
    const double e2 = (end_state(Method::RK4, dt / 2) - ref).radius();
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.15));
  }
  {
    const State ref = end_state(Method::Euler, dt / 8);
    const double e1 = (end_state(Method::Euler, dt) - ref).radius();
    const double e2 = (end_state(Method::Euler, dt / 2) - ref).radius();
    // Richardson: with ref error ε/8, (ε − ε/8)/(ε/2 − ε/8) = 7/3.
    CHECK(e1 / e2 == doctest::Approx(7.0 / 3.0).epsilon(0.15));
  }
}

TEST_CASE("radial flow is monotone in each annulus (property)") {
  for (double sigma : {-0.8, -0.5, -0.2}) {
    const OscParams p{2.0, 1.0, 1.0, sigma};
    const Landmarks lm = landmarks(p);
    const double r_sep = std::sqrt(*lm.r_sep_sq), r_lc = std::sqrt(*lm.r_lc_sq);
    for (double r0 : {0.5 * r_sep, 0.9 * r_sep, 1.1 * r_sep, 0.5 * (r_sep + r_lc), 1.05 * r_lc,
                      1.4 * r_lc}) {
      const double sign = polar_radial_rate(p, r0) > 0 ? 1.0 : -1.0;
      const Trajectory t = simulate(p, {r0, 0}, InputSignal::zero(), rk4(1e-3, 30, 20));
      for (std::size_t i = 1; i < t.states.size(); ++i) {
        const double dr = t.states[i].radius() - t.states[i - 1].radius();
        if (std::abs(dr) > 1e-9) CHECK(dr * sign > 0.0);
      }
    }
  }
}

TEST_CASE("sample_input") {
  SUBCASE("zero and constant") {
    for (double t : {0.0, 1.5, 100.0}) {
      const InputSample z = sample_input(InputSignal::zero(), t);
      CHECK(z.u1 == 0.0);
      CHECK(z.u2 == 0.0);
      const InputSample c = sample_input(InputSignal::constant(0.1, -0.2), t);
      CHECK(c.u1 == 0.1);
      CHECK(c.u2 == -0.2);
    }
  }
  SUBCASE("truncated Gaussian: support and mean") {
    const double hold = 0.01;
    const InputSignal u = InputSignal::truncated_gaussian(0.2, 0.5, -0.3, 0.7, hold, 2024);
    double sum = 0.0;
    std::size_t count = 0;
    bool in_range = true;
    for (std::size_t k = 0; k < 50000; ++k) {
      const InputSample s = sample_input(u, (static_cast<double>(k) + 0.5) * hold);
      for (double v : {s.u1, s.u2}) {
        in_range = in_range && v >= -0.3 && v <= 0.7;
        sum += v;
        ++count;
      }
    }
    CHECK(count == 100000);
    CHECK(in_range);
    CHECK(std::abs(sum / static_cast<double>(count) - 0.2) < 0.01);
  }
  SUBCASE("zero-order hold and seed determinism") {
    const InputSignal u = InputSignal::truncated_gaussian(0.0, 1.0, -2.0, 2.0, 0.1, 5);
    const InputSample a = sample_input(u, 0.31);
    const InputSample b = sample_input(u, 0.39);
    CHECK(a.u1 == b.u1);
    CHECK(a.u2 == b.u2);
    const InputSample c = sample_input(u, 0.41);
    CHECK(a.u1 != c.u1);
    CHECK(a.u1 != a.u2);
    const InputSample d = sample_input(u.with_seed(6), 0.31);
    CHECK(a.u1 != d.u1);
  }
  CHECK_THROWS_AS(sample_input(InputSignal::zero(), -1.0), DomainError);
}

TEST_CASE("recorded sup norm matches the applied hold values") {
  const InputSignal u = InputSignal::truncated_gaussian(0.0, 0.05, -0.05, 0.05, 0.01, 11);
  const Trajectory t = simulate(kUnit, {0, 0}, u, rk4(1e-3, 5));
  double sup = 0.0;
  for (std::size_t w = 0; w < 500; ++w) {
    sup = std::max(sup, sample_input(u, (static_cast<double>(w) + 0.5) * 0.01).norm());
  }
  CHECK(t.input_sup_norm == sup);
  CHECK(t.input_sup_norm <= std::sqrt(2.0) * 0.05);
}

TEST_CASE("trajectory CSV") {
  const Trajectory t = simulate(kUnit, {0.25, 0.5}, InputSignal::zero(), rk4(0.1, 0.3));
  std::ostringstream out;
  write_csv(out, t);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x,y");
  std::getline(in, line);
  CHECK(line == "0,0.25,0.5");
  std::size_t rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == t.times.size());
}
