#pragma once

#include <optional>

#include "wlab/mesh_gen.hpp"
#include "wlab/reilly.hpp"
#include "wlab/spectrum.hpp"

namespace wlab {

/// Closed submanifold M of a space form: a mesh plus the embedding of its
/// vertices in the model. Euclidean meshes are their own embedding;
/// geodesic spheres carry an intrinsic mesh and analytic fields.
struct Submanifold {
  SimplicialMesh mesh;
  AmbientSpace space;
  Eigen::MatrixXd ambient_points;
  std::optional<ImmersionFields> analytic;

  static Submanifold embedded(SimplicialMesh mesh);
  static Submanifold geodesic_sphere(const AmbientSpace& space, GeodesicSphere sphere);

  int n() const { return mesh.intrinsic_dim(); }
  Vec ambient_point(int i) const { return ambient_points.row(i).transpose(); }
  /// f at the vertices (through the embedding) as a mesh weight.
  Weight weight(const DensityField& f) const;
};

struct CenterOfMass {
  Vec point;
  /// |sum mu_i (s/r)_i log_p x_i| / Vol_f(M).
  double gradient_norm = 0;
  int iterations = 0;
};

/// Weighted center of mass: the point p with sum mu_i (s(r_i)/r_i) log_p x_i = 0
/// (lumped measure mu). In Euclidean space this is the weighted centroid.
/// Throws NoConvergence after 200 iterations and, for delta > 0, OutOfBall
/// when M leaves the ball of radius pi / (4 sqrt(delta)) around p.
CenterOfMass weighted_center_of_mass(const Submanifold& m, const DensityField& f, const AssemblyOptions& opts = {});

/// Columns (s/r) x_i for normal coordinates x_i at `center`, then for
/// delta > 0 the column (c(r) - mean c) / sqrt(delta).
Eigen::MatrixXd test_functions(const Submanifold& m, const Vec& center, const OperatorPack& pack);

/// Per-vertex fields relative to `center`. Analytic fields are returned
/// as they are when the center is the model origin.
ImmersionFields immersion_fields(const Submanifold& m, const DensityField& f, const Vec& center,
                                 const OperatorPack& pack);

/// n int c dmu <= -int s <V, grad r> dmu <= int s |V| dmu with V = H_f - grad f.
/// lhs/rhs are the outer terms; details carry the middle one.
CheckReport chain_check(const Submanifold& m, const DensityField& f, const Tolerances& tol = {},
                          const AssemblyOptions& opts = {});

/// Part (1) as max over cells of sum |grad phi_i|^2 + delta |X^T|^2 against
/// n + eps(h); part (2) for delta <= 0 in the details.
CheckReport frame_check(const Submanifold& m, const DensityField& f, const Tolerances& tol = {},
                          const AssemblyOptions& opts = {});

/// lambda_1 <= n delta + max |V|^2 / n, delta < 0.
CheckReport eigen_max_bound(const Submanifold& m, const DensityField& f, const Tolerances& tol = {},
                       const AssemblyOptions& opts = {}, const EigenOptions& eig = {});
/// lambda_1 <= n delta + int |V|^2 dmu / (n Vol_f(M)), delta >= 0.
CheckReport eigen_mean_bound(const Submanifold& m, const DensityField& f, const Tolerances& tol = {},
                       const AssemblyOptions& opts = {}, const EigenOptions& eig = {});

/// Fits s grad r = lambda V by weighted least squares and reports the
/// weighted standard deviation of F = lambda f + int_0^r s. Throws
/// NotNearEquality unless |bound.relative_gap| < bound.equality_tolerance.
CheckReport equality_diagnostic(const Submanifold& m, const DensityField& f, const CheckReport& bound,
                                const AssemblyOptions& opts = {});

/// Positive root of r s_delta(r) = 2 n c_delta(r).
double shrinker_radius(double delta, int n);

/// Geodesic sphere of the shrinker radius with f = r^2 / 4: H_f vanishes
/// while |H_f - grad f|^2 = |H|^2 stays positive.
CheckReport shrinker_check(const AmbientSpace& space, int n, int resolution);

}  // namespace wlab
