#pragma once

#include <cstdint>

#include "wlab/operators.hpp"

namespace wlab {

struct EigenOptions {
  int block = 4;
  int max_iter = 10000;
  /// Converged when |S v - lambda M v| <= tol * lambda * |M v|.
  double tol = 1e-9;
  std::uint64_t seed = 0x5EED;
};

struct EigenResult {
  double lambda1 = 0;
  /// M-normalized, M-orthogonal to constants, largest entry positive.
  Eigen::VectorXd eigenvector;
  double residual = 0;
  int iterations = 0;
  /// Second Ritz value of the converged block.
  double lambda2 = 0;
  /// lambda2 - lambda1 < 1e-6 lambda1: the eigenvector is not unique.
  bool near_degenerate = false;
};

/// First nonzero eigenvalue of S v = lambda M v on a closed mesh, by block
/// inverse iteration with Rayleigh-Ritz and deflation of the constants.
/// Throws SolverStall after max_iter iterations.
EigenResult lambda1_drift(const OperatorPack& pack, const EigenOptions& opts = {});

/// Rayleigh quotient of phi after M-orthogonal projection off the
/// constants. Throws ZeroFunction when nothing is left.
double rayleigh_quotient(const OperatorPack& pack, const Eigen::VectorXd& phi);

/// phi minus its M-weighted mean.
Eigen::VectorXd remove_mean(const OperatorPack& pack, const Eigen::VectorXd& phi);

}  // namespace wlab
