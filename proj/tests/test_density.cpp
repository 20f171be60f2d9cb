#include <doctest.h>

#include <cmath>

#include "wlab/density.hpp"
#include "wlab/errors.hpp"

using namespace wlab;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

std::vector<DensityField> samples() {
  return {DensityField::constant(0.7), DensityField::gaussian(0.3, v3(0.1, -0.2, 0.4)),
          DensityField::linear(v3(0.5, -1.0, 2.0)),
          DensityField::polynomial({{1.5, {2, 1, 0}}, {-0.5, {0, 0, 3}}, {2.0, {1, 0, 0}}}),
          DensityField::gaussian(0.3).translated(v3(1, 2, 3)).scaled(1.7)};
}

}  // namespace

TEST_CASE("gradients and Hessians match central differences") {
  const Vec x = v3(0.3, -0.4, 0.8);
  const double h = 1e-5;
  for (const auto& f : samples()) {
    const Vec g = f.gradient(x);
    const Eigen::MatrixXd hs = f.hessian(x);
    CHECK((hs - hs.transpose()).norm() < 1e-14);
    for (int i = 0; i < 3; ++i) {
      Vec e = Vec::Zero(3);
      e[i] = h;
      const double fd = (f.value(x + e) - f.value(x - e)) / (2 * h);
      CHECK(g[i] == doctest::Approx(fd).epsilon(1e-7));
      const Vec hd = (f.gradient(x + e) - f.gradient(x - e)) / (2 * h);
      for (int j = 0; j < 3; ++j) CHECK(hs(j, i) == doctest::Approx(hd[j]).epsilon(1e-7));
    }
  }
}

TEST_CASE("translation and scaling act on the argument") {
  const DensityField f = DensityField::polynomial({{1.0, {1, 2}}, {0.5, {3, 0}}});
  const Vec t = v2(0.4, -1.1), x = v2(0.2, 0.9);
  CHECK(f.translated(t).value(x + t) == doctest::Approx(f.value(x)).epsilon(1e-14));
  CHECK(f.scaled(2.0).value(2.0 * x) == doctest::Approx(f.value(x)).epsilon(1e-14));
}

TEST_CASE("radial profile of a gaussian") {
  const DensityField f = DensityField::gaussian(0.25);
  CHECK(f.is_radial());
  CHECK(f.radial_value(2.0) == doctest::Approx(1.0));
  CHECK(f.radial_derivative(2.0) == doctest::Approx(1.0));
  CHECK_FALSE(DensityField::linear(v2(1, 0)).is_radial());
}

TEST_CASE("weighted element is e^-f") {
  const DensityField f = DensityField::linear(v2(1.0, 0.0));
  CHECK(weighted_element(f, v2(2.0, 5.0)) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("Bakry-Emery tensor closed forms") {
  const AmbientSpace plane(0.0, 2);
  const Vec x = v2(0.3, 0.1), u = v2(0.6, 0.8);
  CHECK(bakry_emery_m(plane, DensityField::gaussian(0.7), {kInfiniteM, 2}, x, u) == doctest::Approx(1.4));
  const Vec v = v2(1.0, -2.0);
  const double expect = -std::pow(v.dot(u), 2) / (5.0 - 2.0);
  CHECK(bakry_emery_m(plane, DensityField::linear(v), {5.0, 2}, x, u) == doctest::Approx(expect));
  const AmbientSpace hyp(-1.0, 3);
  const auto basis = hyp.tangent_basis(hyp.origin());
  CHECK(bakry_emery_m(hyp, DensityField::constant(0), {kInfiniteM, 3}, hyp.origin(), basis[0]) ==
        doctest::Approx(-2.0));
}

TEST_CASE("m below d is rejected unless f is constant") {
  CHECK_THROWS_AS((BakryEmeryParams{1.5, 2}.validate(DensityField::constant(0))), InvalidParams);
  CHECK_NOTHROW((BakryEmeryParams{2.0, 2}.validate(DensityField::constant(0))));
  CHECK_THROWS_AS((BakryEmeryParams{2.0, 2}.validate(DensityField::gaussian(1.0))), InvalidParams);
}

TEST_CASE("certify_nonneg_BE separates convex and concave weights") {
  const AmbientSpace plane(0.0, 2);
  const SampleRegion r{v2(0, 0), 1.0};
  CHECK(certify_nonneg_BE(plane, DensityField::gaussian(0.5), {kInfiniteM, 2}, r, 256).pass);
  const CheckReport bad = certify_nonneg_BE(plane, DensityField::gaussian(-0.25), {kInfiniteM, 2}, r, 256);
  CHECK_FALSE(bad.pass);
  CHECK(bad.rhs == doctest::Approx(-0.5));
  CHECK(certify_nonneg_BE(AmbientSpace(1.0, 2), DensityField::constant(0), {kInfiniteM, 2}, r, 64).pass);
  CHECK_FALSE(certify_nonneg_BE(AmbientSpace(-1.0, 2), DensityField::constant(0), {kInfiniteM, 2}, r, 64).pass);
}

TEST_CASE("van der Corput sequence") {
  CHECK(halton(1, 2) == 0.5);
  CHECK(halton(2, 2) == 0.25);
  CHECK(halton(3, 2) == 0.75);
  CHECK(halton(1, 3) == doctest::Approx(1.0 / 3));
  CHECK(halton(5, 3) == doctest::Approx(7.0 / 9));
}

TEST_CASE("curved models evaluate radial fields through the geodesic distance") {
  const AmbientSpace s(1.0, 2);
  const Vec p = s.exp_map(s.origin(), 0.5 * s.tangent_basis(s.origin())[0]);
  CHECK(ambient_value(s, DensityField::gaussian(2.0), p) == doctest::Approx(0.5));
  CHECK_THROWS(ambient_value(s, DensityField::linear(v3(1, 0, 0)), p));
}
