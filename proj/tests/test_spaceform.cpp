#include <doctest.h>

#include <cmath>
#include <random>

#include "wlab/errors.hpp"
#include "wlab/spaceform.hpp"

using namespace wlab;

namespace {

Vec random_point(const AmbientSpace& s, std::mt19937_64& rng, double spread) {
  std::normal_distribution<double> g;
  Vec t = Vec::Zero(s.embedding_dim());
  for (const Vec& b : s.tangent_basis(s.origin())) t += spread * g(rng) * b;
  return s.exp_map(s.origin(), t);
}

}  // namespace

TEST_CASE("s_delta and c_delta match the trigonometric closed forms") {
  for (double t : {0.0, 1e-9, 0.3, 1.0, 2.5}) {
    CHECK(s_delta(0.0, t) == doctest::Approx(t).epsilon(1e-15));
    CHECK(c_delta(0.0, t) == 1.0);
    CHECK(s_delta(4.0, t) == doctest::Approx(std::sin(2 * t) / 2).epsilon(1e-14));
    CHECK(c_delta(4.0, t) == doctest::Approx(std::cos(2 * t)).epsilon(1e-14));
    CHECK(s_delta(-1.0, t) == doctest::Approx(std::sinh(t)).epsilon(1e-14));
    CHECK(c_delta(-1.0, t) == doctest::Approx(std::cosh(t)).epsilon(1e-14));
  }
}

TEST_CASE("c^2 + delta s^2 = 1") {
  for (double d : {-2.0, -1e-9, 0.0, 3e-9, 0.5, 1.0})
    for (double t : {0.01, 0.4, 1.3}) {
      const double s = s_delta(d, t), c = c_delta(d, t);
      CHECK(c * c + d * s * s == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("s_delta_integral is the primitive of s_delta") {
  for (double d : {-1.0, 0.0, 1e-10, 1.0}) {
    const double t = 1.1;
    const int n = 2000;
    double simpson = 0;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
      simpson += w * s_delta(d, t * i / n);
    }
    simpson *= t / (3.0 * n);
    CHECK(s_delta_integral(d, t) == doctest::Approx(simpson).epsilon(1e-12));
  }
}

TEST_CASE("Taylor branch is continuous with the closed forms") {
  const double t = 0.7;
  CHECK(s_delta(1e-9, t) == doctest::Approx(std::sin(std::sqrt(1e-9) * t) / std::sqrt(1e-9)).epsilon(1e-14));
  CHECK(s_delta(-1e-9, t) == doctest::Approx(std::sinh(std::sqrt(1e-9) * t) / std::sqrt(1e-9)).epsilon(1e-14));
  CHECK(s_delta_integral(1e-9, t) == doctest::Approx(t * t / 2).epsilon(1e-9));
}

TEST_CASE("model points satisfy the defining equations") {
  std::mt19937_64 rng(11);
  for (double d : {-1.0, -0.25, 0.0, 1.0, 4.0}) {
    AmbientSpace s(d, 3);
    for (int k = 0; k < 20; ++k) {
      const Vec p = random_point(s, rng, 0.4);
      CHECK(s.contains(p));
      if (d > 0) CHECK(p.squaredNorm() == doctest::Approx(1.0 / d).epsilon(1e-12));
      if (d < 0) CHECK(-p[0] * p[0] + p.tail(3).squaredNorm() == doctest::Approx(1.0 / d).epsilon(1e-12));
    }
  }
}

TEST_CASE("distance against independent formulas") {
  AmbientSpace sphere(1.0, 2), hyp(-1.0, 2);
  Vec a(3), b(3);
  a << 1, 0, 0;
  b << std::cos(1.2), std::sin(1.2), 0;
  CHECK(sphere.distance(a, b) == doctest::Approx(1.2).epsilon(1e-14));
  Vec o = hyp.origin(), q(3);
  q << std::cosh(0.8), std::sinh(0.8), 0;
  CHECK(hyp.distance(o, q) == doctest::Approx(0.8).epsilon(1e-14));
  Vec x(2), y(2);
  x << 1, 2;
  y << 4, 6;
  CHECK(AmbientSpace(0.0, 2).distance(x, y) == doctest::Approx(5.0));
}

TEST_CASE("exp and log are inverse and |log| is the distance") {
  std::mt19937_64 rng(5);
  for (double d : {-1.0, 0.0, 1.0}) {
    for (int dim : {2, 3}) {
      AmbientSpace s(d, dim);
      for (int k = 0; k < 50; ++k) {
        const Vec p = random_point(s, rng, 0.5), q = random_point(s, rng, 0.5);
        const Vec v = s.log_map(p, q);
        CHECK(s.norm(v) == doctest::Approx(s.distance(p, q)).epsilon(1e-12));
        CHECK((s.exp_map(p, v) - q).norm() < 1e-12);
        if (d != 0) CHECK(std::abs(s.inner(v, p)) < 1e-10);
      }
    }
  }
}

TEST_CASE("log at the antipode throws") {
  AmbientSpace s(1.0, 2);
  Vec n(3), m(3);
  n << 1, 0, 0;
  m << -1, 0, 0;
  CHECK_THROWS_AS(s.log_map(n, m), AntipodalPoint);
}

TEST_CASE("tangent bases are orthonormal and tangent") {
  std::mt19937_64 rng(2);
  for (double d : {-1.0, 0.0, 1.0}) {
    AmbientSpace s(d, 3);
    const Vec p = random_point(s, rng, 0.7);
    const auto basis = s.tangent_basis(p);
    REQUIRE(basis.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(s.inner(basis[i], basis[j]) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
      if (d != 0) CHECK(std::abs(s.inner(basis[i], p)) < 1e-12);
    }
  }
}

TEST_CASE("radial field has length s_delta(r)") {
  std::mt19937_64 rng(8);
  for (double d : {-1.0, 0.0, 1.0}) {
    AmbientSpace s(d, 2);
    const Vec p = random_point(s, rng, 0.6);
    const double r = s.distance(s.origin(), p);
    CHECK(s.norm(s.radial_field(s.origin(), p)) == doctest::Approx(s_delta(d, r)).epsilon(1e-12));
    CHECK(s.norm(s.radial_field(s.origin(), s.origin())) == 0.0);
  }
}

TEST_CASE("invalid dimensions are rejected") { CHECK_THROWS_AS(AmbientSpace(0.0, 0), InvalidParams); }
