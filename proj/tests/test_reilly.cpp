#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wlab/errors.hpp"
#include "wlab/mesh_gen.hpp"
#include "wlab/reilly.hpp"

using namespace wlab;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

const AnalyticFunction& paraboloid() {
  static const AnalyticFunction u =
      AnalyticFunction::quadratic(0.5 * Eigen::MatrixXd::Identity(2, 2), Vec::Zero(2), -0.25);
  return u;
}

Tolerances loose() {
  Tolerances t;
  t.relative = 1e-2;
  return t;
}

double simpson(const std::function<double(double)>& g, double a, double b, int n = 4000) {
  double s = 0;
  for (int i = 0; i <= n; ++i) s += (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2)) * g(a + (b - a) * i / n);
  return s * (b - a) / (3.0 * n);
}

}  // namespace

TEST_CASE("Dirichlet solution on the disk") {
  double prev = 1e9;
  for (int rings : {4, 8, 16}) {
    const SimplicialMesh d = gen_disk(1.0, rings);
    const PoissonSolution s = solve_dirichlet(d, DensityField::constant(0));
    CHECK(s.residual < 1e-12);
    double err = 0;
    for (int i = 0; i < d.vertex_count(); ++i)
      err = std::max(err, std::abs(s.u[i] - (d.vertex(i).squaredNorm() - 1) / 4));
    CHECK(err < prev);
    prev = err;
    double un_err = 0;
    for (const auto& [i, un] : s.u_nu) un_err = std::max(un_err, std::abs(un - 0.5));
    CHECK(un_err < 0.05);
  }
  CHECK(prev < 2e-3);
}

TEST_CASE("discrete integration by parts for the Dirichlet problem") {
  const SimplicialMesh d = gen_ellipse(1.0, 0.6, 6);
  const DensityField f = DensityField::gaussian(0.4, v2(0.1, 0.2));
  const PoissonSolution s = solve_dirichlet(d, f);
  const OperatorPack p = assemble(d, Weight::field(f));
  const Vec b = p.mass * Vec::Ones(d.vertex_count());
  const double lhs = s.u.dot(p.stiffness * s.u), rhs = -s.u.dot(b);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("mixed problem on a centered wedge recovers the paraboloid") {
  const SimplicialMesh w = gen_wedge(1.0, std::numbers::pi / 2, 16);
  const PoissonSolution s = solve_mixed(w, DensityField::constant(0));
  double err = 0;
  for (int i = 0; i < w.vertex_count(); ++i)
    err = std::max(err, std::abs(s.u[i] - (w.vertex(i).squaredNorm() - 1) / 4));
  CHECK(err < 5e-3);
  CHECK_THROWS_AS(solve_mixed(gen_disk(1.0, 4), DensityField::constant(0)), MissingLabels);
}

TEST_CASE("Reilly identity converges at second order on the disk") {
  for (const DensityField& f : {DensityField::constant(0), DensityField::linear(v2(1, 0))}) {
    std::vector<double> h, gap;
    for (int rings : {8, 16, 32}) {
      const SimplicialMesh d = gen_disk(1.0, rings);
      const CheckReport r = reilly_residual(d, f, paraboloid(), 7, loose());
      CHECK(r.pass);
      h.push_back(d.max_edge_length());
      gap.push_back(r.gap);
    }
    CHECK(std::abs(gap.back()) / std::max(std::abs(gap.back()), 1.0) < 1e-3);
    const auto order = fit_order(h, gap);
    REQUIRE(order.has_value());
    CHECK(*order > 1.6);
    CHECK(*order < 2.4);
  }
}

TEST_CASE("Reilly interior term against an independent polar quadrature") {
  const DensityField f = DensityField::linear(v2(1, 0));
  const CheckReport r = reilly_residual(gen_disk(1.0, 32), f, paraboloid(), 7, loose());
  const double oracle = simpson(
      [](double t) {
        // Delta_f u = 1 - x / 2, |Hess u|^2 = 1 / 2, Hess f = 0.
        auto g = [t](double rr) {
          const double x = rr * std::cos(t);
          const double lap = 1 - x / 2;
          return rr * std::exp(-x) * (lap * lap - 0.5);
        };
        return simpson(g, 0.0, 1.0, 400);
      },
      0.0, 2 * std::numbers::pi, 400);
  CHECK(r.lhs == doctest::Approx(oracle).epsilon(2e-3));
}

TEST_CASE("hessian gap against a direct evaluation") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const DensityField f = DensityField::polynomial({{0.3, {2, 0}}, {0.1, {1, 1}}, {0.5, {0, 1}}});
  for (int k = 0; k < 50; ++k) {
    Eigen::MatrixXd h(2, 2);
    h << g(rng), g(rng), 0, g(rng);
    h(1, 0) = h(0, 1);
    const Vec b = v2(g(rng), g(rng)), x = v2(g(rng), g(rng));
    const AnalyticFunction u = AnalyticFunction::quadratic(h, b, 0.0);
    const Vec gu = h * x + b, gf = f.gradient(x);
    const double lap = h.trace() - gf.dot(gu);
    const double m = 3.5;
    const double expect = h.squaredNorm() - lap * lap / m + std::pow(gf.dot(gu), 2) / (m - 2);
    CHECK(hessian_gap(f, {m, 2}, x, u) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(hessian_gap(f, {kInfiniteM, 2}, x, u) == doctest::Approx(h.squaredNorm()).epsilon(1e-14));
    CHECK(hessian_gap(f, {m, 2}, x, u) >= -1e-12);
  }
}

TEST_CASE("hessian sample check holds on 10^4 samples with exact equality cases") {
  for (const BakryEmeryParams& p : {BakryEmeryParams{3.0, 2}, BakryEmeryParams{7.0, 3}, BakryEmeryParams{kInfiniteM, 2}}) {
    const DensityField f = p.d == 2 ? DensityField::linear(v2(0.3, -0.7)) : DensityField::gaussian(0.2);
    const CheckReport r = hessian_sample_check(f, p, 10000, 0x5EED);
    CHECK(r.pass);
    CHECK(r.rhs >= -1e-12);
    CHECK(r.details.at("equality_max_gap") < 1e-10);
  }
}

TEST_CASE("polygonal disk: Ros relative gap is exactly 1 - cos(pi / N)") {
  for (int rings : {4, 12, 16}) {
    const int n = 6 * rings;
    const CheckReport r = check_ros(gen_disk(1.0, rings), DensityField::constant(0), {2.0, 2});
    CHECK(r.pass);
    CHECK(r.relative_gap == doctest::Approx(1 - std::cos(std::numbers::pi / n)).epsilon(1e-9));
  }
}

TEST_CASE("Ros: strict for ellipses and hypothesis failure for concave weights") {
  const CheckReport e = check_ros(gen_ellipse(1.0, 0.5, 12), DensityField::constant(0), {2.0, 2});
  CHECK(e.pass);
  CHECK_FALSE(e.equality);
  CHECK(e.gap > 0);
  const CheckReport c = check_ros(gen_disk(1.0, 8), DensityField::gaussian(-0.25), {kInfiniteM, 2});
  CHECK(c.status == CheckStatus::hypothesis_failed);
  CHECK(c.hypotheses.at("be_nonneg") == "failed");
  const CheckReport h = check_ros(gen_disk(1.0, 8), DensityField::gaussian(1.0), {kInfiniteM, 2});
  CHECK(h.hypotheses.at("hf_positive") == "failed");
  CHECK(h.status == CheckStatus::hypothesis_failed);
}

TEST_CASE("cone: centered arcs approach equality as the apex cutoff shrinks") {
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const CheckReport r = check_cone(gen_wedge(1.0, std::numbers::pi / 2, 32, eps), DensityField::constant(0), {2.0, 2});
    CHECK(r.pass);
    CHECK(std::abs(r.relative_gap) < 1e-3);
  }
  const CheckReport off =
      check_cone(gen_offcenter_wedge(1.0, v2(-0.1, -0.1), std::numbers::pi / 2, 16), DensityField::constant(0), {2.0, 2});
  CHECK(off.pass);
  CHECK(off.relative_gap > 1e-2);
  CHECK_THROWS_AS(check_cone(gen_disk(1.0, 4), DensityField::constant(0), {2.0, 2}), InvalidParams);
}

TEST_CASE("cone: an arc meeting a face at an obtuse angle falls outside the inequality") {
  const CheckReport r =
      check_cone(gen_offcenter_wedge(1.0, v2(0.2, 0.1), std::numbers::pi / 2, 16), DensityField::constant(0), {2.0, 2});
  CHECK(r.gap < 0);
}

TEST_CASE("linear isoperimetric inequality") {
  const CheckReport d = check_linear_isoperimetric(gen_disk(1.0, 16), DensityField::constant(0), {2.0, 2});
  CHECK(d.pass);
  CHECK(d.equality);
  CHECK(d.lhs == doctest::Approx(std::numbers::pi).epsilon(2e-3));
  CHECK_THROWS_AS(check_linear_isoperimetric(gen_ellipse(1.0, 0.5, 8), DensityField::constant(0), {2.0, 2}), NotCMC);
}

TEST_CASE("ball in R^3: closed form and a radial quadrature oracle") {
  const CheckReport b = ball_linear_isoperimetric(2, 1.0, DensityField::constant(0), {3.0, 3});
  CHECK(b.lhs == doctest::Approx(2 * 4 * std::numbers::pi / 3).epsilon(1e-12));
  CHECK(b.rhs == doctest::Approx(2.0 / 3 * 4 * std::numbers::pi).epsilon(1e-12));
  CHECK(std::abs(b.gap) < 1e-10);
  CHECK(b.equality);

  const double a = 0.3, radius = 1.2;
  const CheckReport g = ball_linear_isoperimetric(2, radius, DensityField::gaussian(a), {kInfiniteM, 3});
  const double vol = 4 * std::numbers::pi * simpson([a](double r) { return r * r * std::exp(-a * r * r); }, 0, radius);
  const double area = 4 * std::numbers::pi * radius * radius * std::exp(-a * radius * radius);
  const double hf = 2 / radius - 2 * a * radius;
  CHECK(g.lhs == doctest::Approx(hf * vol).epsilon(1e-10));
  CHECK(g.rhs == doctest::Approx(area).epsilon(1e-12));
  CHECK(unit_sphere_area(1) == doctest::Approx(2 * std::numbers::pi));
  CHECK(unit_sphere_area(3) == doctest::Approx(2 * std::numbers::pi * std::numbers::pi));
}
