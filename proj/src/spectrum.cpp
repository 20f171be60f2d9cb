#include "wlab/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <limits>
#include <random>

#include "wlab/errors.hpp"

namespace wlab {

namespace {

double m_norm(const SparseMatrix& m, const Eigen::VectorXd& v) { return std::sqrt(std::max(0.0, v.dot(m * v))); }

// Modified Gram-Schmidt in the M inner product, run twice. Columns that
// collapse are replaced from `rng`.
void m_orthonormalize(const OperatorPack& pack, Eigen::MatrixXd& x, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int pass = 0; pass < 2; ++pass) {
    for (int j = 0; j < x.cols(); ++j) {
      for (int attempt = 0;; ++attempt) {
        for (int i = 0; i < j; ++i) x.col(j) -= x.col(i).dot(pack.mass * x.col(j)) * x.col(i);
        const double n = m_norm(pack.mass, x.col(j));
        if (n > 1e-10 || attempt > 4) {
          x.col(j) /= n;
          break;
        }
        for (int r = 0; r < x.rows(); ++r) x(r, j) = unit(rng);
        x.col(j) = remove_mean(pack, x.col(j));
      }
    }
  }
}

}  // namespace

Eigen::VectorXd remove_mean(const OperatorPack& pack, const Eigen::VectorXd& phi) {
  const Eigen::VectorXd m1 = pack.mass * Eigen::VectorXd::Ones(phi.size());
  return phi - Eigen::VectorXd::Constant(phi.size(), m1.dot(phi) / m1.sum());
}

double rayleigh_quotient(const OperatorPack& pack, const Eigen::VectorXd& phi) {
  if (phi.size() != pack.vertex_count) throw InvalidParams("mesh function has the wrong length");
  const Eigen::VectorXd p = remove_mean(pack, phi);
  const double den = p.dot(pack.mass * p);
  const double scale = std::max(phi.dot(pack.mass * phi), std::numeric_limits<double>::min());
  if (!(den > 1e-24 * scale)) throw ZeroFunction("function is constant");
  return p.dot(pack.stiffness * p) / den;
}

EigenResult lambda1_drift(const OperatorPack& pack, const EigenOptions& opts) {
  const int n = pack.vertex_count;
  const int b = std::min(opts.block, n - 1);
  if (b < 1) throw InvalidParams("mesh too small for an eigensolve");

  std::mt19937_64 rng(opts.seed);
  auto uniform = [&rng] { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0; };
  Eigen::MatrixXd x(n, b);
  for (int j = 0; j < b; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = uniform();
  for (int j = 0; j < b; ++j) x.col(j) = remove_mean(pack, x.col(j));
  m_orthonormalize(pack, x, rng);

  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-13);
  cg.setMaxIterations(std::max(1000, 4 * n));
  cg.compute(pack.stiffness);

  EigenResult best;
  best.residual = std::numeric_limits<double>::infinity();
  Eigen::VectorXd theta = Eigen::VectorXd::Ones(b);
  for (int it = 1; it <= opts.max_iter; ++it) {
    Eigen::MatrixXd y(n, b);
    for (int j = 0; j < b; ++j) {
      const Eigen::VectorXd rhs = pack.mass * x.col(j);
      const Eigen::VectorXd guess = x.col(j) / std::max(theta[j], 1e-300);
      y.col(j) = remove_mean(pack, cg.solveWithGuess(rhs, guess));
    }
    m_orthonormalize(pack, y, rng);
    const Eigen::MatrixXd a = y.transpose() * (pack.stiffness * y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
    theta = es.eigenvalues();
    x = y * es.eigenvectors();

    const Eigen::VectorXd v = x.col(0);
    const Eigen::VectorXd mv = pack.mass * v;
    const double res = (pack.stiffness * v - theta[0] * mv).norm() / mv.norm();
    const double rel = theta[0] > 0 ? res / theta[0] : res;
    if (rel < best.residual) {
      best.residual = rel;
      best.lambda1 = theta[0];
      best.eigenvector = v;
      best.iterations = it;
      best.lambda2 = b > 1 ? theta[1] : std::numeric_limits<double>::infinity();
    }
    if (rel <= opts.tol) break;
    if (it == opts.max_iter)
      throw SolverStall("inverse iteration did not converge in " + std::to_string(opts.max_iter) + " iterations",
                        best.residual);
  }

  Eigen::VectorXd& v = best.eigenvector;
  v /= m_norm(pack.mass, v);
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0) v = -v;
  best.near_degenerate = best.lambda2 - best.lambda1 < 1e-6 * best.lambda1;
  return best;
}

}  // namespace wlab
