#pragma once

#include <functional>
#include <map>

#include "wlab/density.hpp"
#include "wlab/operators.hpp"
#include "wlab/report.hpp"

namespace wlab {

/// Default pass and equality tolerances of a single check.
struct Tolerances {
  double absolute = 1e-9;
  /// Added to `absolute` after scaling by max(|lhs|, |rhs|).
  double relative = 0;
  double equality = 1e-2;

  double pass_tolerance(double lhs, double rhs) const;
};

enum class BcKind { dirichlet, mixed };

struct PoissonSolution {
  Eigen::VectorXd u;
  /// Outward normal derivative at clamped boundary vertices (flux method).
  std::map<int, double> u_nu;
  double residual = 0;
  BcKind bc = BcKind::dirichlet;
};

/// Delta_f u = 1 in the domain, u = 0 on the whole boundary.
PoissonSolution solve_dirichlet(const SimplicialMesh& domain, const DensityField& f,
                                const AssemblyOptions& opts = {});
/// Delta_f u = 1, u = 0 on arc vertices, natural condition on cone faces.
/// Throws MissingLabels unless both labels are present.
PoissonSolution solve_mixed(const SimplicialMesh& domain, const DensityField& f,
                            const AssemblyOptions& opts = {});

/// Smooth function on R^d given by value, gradient and Hessian.
struct AnalyticFunction {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Eigen::MatrixXd(const Vec&)> hessian;

  /// u = x^T H x / 2 + <g, x> + c.
  static AnalyticFunction quadratic(Eigen::MatrixXd hessian, Vec gradient, double constant);
};

/// Both sides of the weighted Reilly identity on a planar domain,
///   lhs = int_Omega (Delta_f u)^2 - |Hess u|^2 - Hess f(grad u, grad u) dmu,
///   rhs = int_dOmega 2 u_nu Delta_f(u|M) + u_nu^2 H_f + kappa <grad u, t>^2 dmu.
/// Interior integrals use a triangle rule with `quad_points` points;
/// boundary terms use the discrete boundary geometry.
CheckReport reilly_residual(const SimplicialMesh& domain, const DensityField& f, const AnalyticFunction& u,
                            int quad_points = 7, const Tolerances& tol = {});

/// Reilly residual of a mesh function, with derivatives recovered by
/// averaging cell gradients. Low order.
CheckReport reilly_residual(const SimplicialMesh& domain, const DensityField& f, const PoissonSolution& sol,
                            const Tolerances& tol = {});

/// |Hess u|^2 - (Delta_f u)^2 / m + <grad f, grad u>^2 / (m - d) at x,
/// the last term dropped for m = inf.
double hessian_gap(const DensityField& f, const BakryEmeryParams& params, const Vec& x, const AnalyticFunction& u);

/// Minimum of hessian_gap over random quadratic u and points, plus the
/// largest gap on constructed equality cases (Hess u = lambda I with linear
/// f tuned to the equality condition).
CheckReport hessian_sample_check(const DensityField& f, const BakryEmeryParams& params, int n_samples,
                                std::uint64_t seed, const Tolerances& tol = {});

/// Vol_f(Omega) <= ((m - 1) / m) int_dOmega dmu / H_f.
CheckReport check_ros(const SimplicialMesh& domain, const DensityField& f, const BakryEmeryParams& params,
                      const Tolerances& tol = {});
/// Same with the boundary integral over arc edges only. Needs cone info.
CheckReport check_cone(const SimplicialMesh& domain, const DensityField& f, const BakryEmeryParams& params,
                       const Tolerances& tol = {});
/// H_f Vol_f(Omega) <= ((m - 1) / m) Vol_f(M), M the arc part. Throws
/// NotCMC when H_f varies by more than 1e-6 relative.
CheckReport check_linear_isoperimetric(const SimplicialMesh& domain, const DensityField& f,
                                       const BakryEmeryParams& params, const Tolerances& tol = {});

/// Closed-form ball of radius R in R^(n+1) with radial f around its center:
/// H_f Vol_f(B) against ((m - 1) / m) Vol_f(dB), volumes by Gauss-Legendre.
CheckReport ball_linear_isoperimetric(int n, double radius, const DensityField& f,
                                      const BakryEmeryParams& params, const Tolerances& tol = {});

/// Volume of the unit n-sphere in R^(n+1).
double unit_sphere_area(int n);

}  // namespace wlab
