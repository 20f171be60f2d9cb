#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "wlab/errors.hpp"
#include "wlab/mesh_gen.hpp"
#include "wlab/spectrum.hpp"

using namespace wlab;

namespace {

/// First nonzero eigenvalue of the P1 pencil on a regular N-gon of radius R.
double polygon_lambda1(int n, double r) {
  const double theta = 2 * std::numbers::pi / n;
  const double h = 2 * r * std::sin(theta / 2);
  return 6 * (1 - std::cos(theta)) / (h * h * (2 + std::cos(theta)));
}

double dense_lambda1(const OperatorPack& p) {
  const Eigen::MatrixXd s(p.stiffness), m(p.mass);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(s, m);
  return es.eigenvalues()[1];
}

}  // namespace

TEST_CASE("polygon spectrum matches the closed form") {
  for (int n : {16, 64, 512}) {
    const OperatorPack p = assemble(gen_circle(1.3, n), Weight::none());
    const EigenResult r = lambda1_drift(p);
    CHECK(r.lambda1 == doctest::Approx(polygon_lambda1(n, 1.3)).epsilon(1e-9));
    CHECK(r.near_degenerate);
  }
}

TEST_CASE("weighted spectrum agrees with a dense generalized solver") {
  Vec v(2);
  v << 0.8, -0.3;
  const OperatorPack p = assemble(gen_circle(1.0, 90), Weight::field(DensityField::linear(v)));
  CHECK(lambda1_drift(p).lambda1 == doctest::Approx(dense_lambda1(p)).epsilon(1e-9));
  Vec c(3);
  c << 0.1, 0.2, -0.1;
  const OperatorPack q = assemble(gen_icosphere(1.0, 2), Weight::field(DensityField::gaussian(0.5, c)));
  CHECK(lambda1_drift(q).lambda1 == doctest::Approx(dense_lambda1(q)).epsilon(1e-9));
}

TEST_CASE("eigenvector invariants") {
  const OperatorPack p = assemble(perturb_radially(gen_icosphere(1.0, 3), 0.1, 2), Weight::none());
  const EigenResult r = lambda1_drift(p);
  const Vec& v = r.eigenvector;
  const Vec mv = p.mass * v;
  CHECK(std::abs(Vec::Ones(v.size()).dot(mv)) < 1e-8);
  CHECK(v.dot(mv) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((p.stiffness * v - r.lambda1 * mv).norm() <= 1e-9 * r.lambda1 * mv.norm() * 1.0001);
  Eigen::Index imax;
  v.cwiseAbs().maxCoeff(&imax);
  CHECK(v[imax] > 0);
  CHECK(r.lambda2 >= r.lambda1);
}

TEST_CASE("sphere eigenvalue converges to 2") {
  double prev = 1e9;
  for (int s = 2; s <= 4; ++s) {
    const double err = std::abs(lambda1_drift(assemble(gen_icosphere(1.0, s), Weight::none())).lambda1 - 2.0);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 0.02 * 2);
}

TEST_CASE("Rayleigh quotient bounds lambda1 from above") {
  const SimplicialMesh s = gen_icosphere(1.0, 3);
  const OperatorPack p = assemble(s, Weight::none());
  const double l1 = lambda1_drift(p).lambda1;
  for (int k = 0; k < 3; ++k) CHECK(rayleigh_quotient(p, s.vertices().col(k)) >= l1 * (1 - 1e-9));
  Vec z = s.vertices().col(2).array().square();
  CHECK(rayleigh_quotient(p, z) > l1);
  CHECK_THROWS_AS(rayleigh_quotient(p, Vec::Constant(s.vertex_count(), 3.0)), ZeroFunction);
  const Vec m = remove_mean(p, z);
  CHECK(std::abs((p.mass * m).sum()) < 1e-12);
}

TEST_CASE("eigensolver is deterministic and reports stalls") {
  const OperatorPack p = assemble(gen_icosphere(1.0, 2), Weight::none());
  const EigenResult a = lambda1_drift(p), b = lambda1_drift(p);
  CHECK(a.lambda1 == b.lambda1);
  CHECK(a.eigenvector == b.eigenvector);
  EigenOptions o;
  o.max_iter = 1;
  o.tol = 1e-15;
  CHECK_THROWS_AS(lambda1_drift(p, o), SolverStall);
}
