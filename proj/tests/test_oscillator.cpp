#include <doctest.h>

#include <cmath>
#include <random>

#include "bistable/errors.hpp"
#include "bistable/oscillator.hpp"

using namespace bistable;

namespace {

OscParams unit(double sigma, double omega = 1.0) { return {omega, 1.0, 1.0, sigma}; }

// Random bistable parameters with σ strictly inside (−a²b, 0).
OscParams random_bistable(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> omega(0.2, 5.0), ab(0.5, 2.0), frac(0.05, 0.95);
  OscParams p;
  p.omega = omega(rng);
  p.a = ab(rng);
  p.b = ab(rng);
  p.sigma = -frac(rng) * p.a * p.a * p.b;
  return p;
}

}  // namespace

TEST_CASE("vector_field matches direct substitution") {
  CHECK(vector_field({0.4, 1, 1, -0.5}, {0, 0}) == State{0, 0});

  const State d = vector_field(unit(-0.5), {1, 0});
  CHECK(d.x == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d.y == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(vector_field(unit(-0.5), {NAN, 0}), DomainError);
  CHECK_THROWS_AS(vector_field({1, -1, 1, -0.5}, {0, 0}), DomainError);
}

TEST_CASE("radial component vanishes on the stable cycle") {
  for (double sigma : {-0.8, -0.5, -0.2, 0.3}) {
    const OscParams p = unit(sigma, 2.0);
    const double r = std::sqrt(*landmarks(p).r_lc_sq);
    for (double th : {0.0, 0.7, 2.0, 4.5}) {
      const State s{r * std::cos(th), r * std::sin(th)};
      const State d = vector_field(p, s);
      CHECK(std::abs(s.x * d.x + s.y * d.y) < 1e-12);
    }
  }
}

TEST_CASE("polar_radial_rate") {
  const OscParams p = unit(-0.5);
  CHECK(polar_radial_rate(p, 0.0) == 0.0);
  CHECK(std::abs(polar_radial_rate(p, 1.306563)) < 1e-5);
  CHECK(std::abs(polar_radial_rate(p, std::sqrt(1.0 + std::sqrt(0.5)))) < 1e-12);
  CHECK(polar_radial_rate(p, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(polar_radial_rate(p, -0.1), DomainError);
}

TEST_CASE("amplitude_response") {
  const OscParams p = unit(-0.5);
  // η = a − γ_μ with μ = 0.5 lands on μσ.
  CHECK(amplitude_response(p, 0.133975) == doctest::Approx(-0.25).epsilon(1e-5));
  CHECK(std::abs(amplitude_response(p, 1.0 - gamma_mu(p, 0.5)) + 0.25) < 1e-9);
  CHECK(amplitude_response(p, 0.0) == -0.5);
  CHECK(amplitude_response(p, 0.1) < amplitude_response(p, 0.5));
  CHECK(amplitude_response(p, 0.5) < amplitude_response(p, 0.9));
  CHECK_THROWS_AS(amplitude_response(p, -1.0), DomainError);
}

TEST_CASE("classify follows the four regimes") {
  CHECK(classify(unit(-2.0)) == Regime::UniqueEquilibrium);
  CHECK(classify(unit(-1.0)) == Regime::EquilibriumPlusSemiStableCycle);
  CHECK(classify(unit(-0.5)) == Regime::Bistable);
  CHECK(classify(unit(0.0)) == Regime::CycleOnly);
  CHECK(classify(unit(0.1)) == Regime::CycleOnly);

  SUBCASE("fold detection is relative") {
    const OscParams p{1.0, 2.0, 3.0, -12.0 * (1.0 + 5e-13)};
    CHECK(classify(p) == Regime::EquilibriumPlusSemiStableCycle);
    CHECK(classify({1.0, 2.0, 3.0, -12.0 * (1.0 + 1e-9)}) == Regime::UniqueEquilibrium);
    CHECK(classify({1.0, 2.0, 3.0, -12.0 * (1.0 - 1e-9)}) == Regime::Bistable);
  }

  SUBCASE("invariant under sign-preserving rescaling") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> k(0.1, 10.0), sigma(-3.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      const OscParams p{1.0, 1.0, 1.0, sigma(rng)};
      const double s = k(rng);
      // σ → sσ, b → sb keeps sign(σ + a²b) and sign(σ).
      CHECK(classify({2.0, 1.0, s, s * p.sigma}) == classify(p));
    }
  }
}

TEST_CASE("landmarks") {
  SUBCASE("sigma = -0.8") {
    const Landmarks lm = landmarks(unit(-0.8));
    CHECK(lm.regime == Regime::Bistable);
    CHECK(lm.gamma0 == doctest::Approx(0.447214).epsilon(1e-6));
    CHECK(*lm.r_sep_sq == doctest::Approx(0.552786).epsilon(1e-6));
    CHECK(*lm.r_lc_sq == doctest::Approx(1.447214).epsilon(1e-6));
  }
  SUBCASE("sigma = -0.2") {
    const Landmarks lm = landmarks(unit(-0.2));
    CHECK(lm.gamma0 == doctest::Approx(0.894427).epsilon(1e-6));
    CHECK(*lm.r_sep_sq == doctest::Approx(0.105573).epsilon(1e-5));
    CHECK(*lm.r_lc_sq == doctest::Approx(1.894427).epsilon(1e-6));
  }
  SUBCASE("fold merges the cycles") {
    const Landmarks lm = landmarks(unit(-1.0));
    CHECK(lm.gamma0 == 0.0);
    CHECK(*lm.r_sep_sq == 1.0);
    CHECK(*lm.r_lc_sq == 1.0);
  }
  SUBCASE("fields follow the regime") {
    CHECK_FALSE(landmarks(unit(-2.0)).r_lc_sq);
    CHECK_FALSE(landmarks(unit(-2.0)).r_sep_sq);
    CHECK(landmarks(unit(0.5)).r_lc_sq);
    CHECK_FALSE(landmarks(unit(0.5)).r_sep_sq);
    CHECK(landmarks(unit(-0.3)).equilibrium == State{0, 0});
  }
}

TEST_CASE("gamma_mu") {
  const OscParams p = unit(-0.5);
  CHECK(gamma_mu(p, 0.5) == doctest::Approx(0.866025).epsilon(1e-6));
  CHECK(gamma_mu(p, 1.0) == 1.0);
  CHECK(gamma_mu(p, 0.0) == landmarks(p).gamma0);
  CHECK_THROWS_AS(gamma_mu(unit(-3.0), 0.0), DomainError);
  CHECK_THROWS_AS(gamma_mu(p, 1.5), DomainError);
}

TEST_CASE("polar and Cartesian forms agree (property)") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    const OscParams p = random_bistable(rng);
    const State s{coord(rng), coord(rng)};
    if (s.radius() < 1e-3) continue;
    const State d = vector_field(p, s);
    const double r = s.radius();
    const double radial = s.x * d.x + s.y * d.y;
    const double expect = r * polar_radial_rate(p, r);
    CHECK(std::abs(radial - expect) <= 1e-10 * std::max(1.0, std::abs(expect)));
    const double tangential = s.x * d.y - s.y * d.x;
    CHECK(std::abs(tangential - p.omega * r * r) <= 1e-10 * p.omega * r * r);
  }
}

TEST_CASE("landmark radii zero the radial rate (property)") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const OscParams p = random_bistable(rng);
    const Landmarks lm = landmarks(p);
    CHECK(std::abs(polar_radial_rate(p, std::sqrt(*lm.r_sep_sq))) < 1e-10);
    CHECK(std::abs(polar_radial_rate(p, std::sqrt(*lm.r_lc_sq))) < 1e-10);
    CHECK(0.0 < *lm.r_sep_sq);
    CHECK(*lm.r_sep_sq < *lm.r_lc_sq);
    for (double mu : {0.1, 0.5, 0.9}) {
      CHECK(std::abs(amplitude_response(p, p.a - gamma_mu(p, mu)) - mu * p.sigma) < 1e-9);
    }
  }
}
