#pragma once

#include <Eigen/Dense>
#include <vector>

namespace wlab {

using Vec = Eigen::VectorXd;

/// Solution of g'' + delta g = 0 with g(0) = 0, g'(0) = 1.
double s_delta(double delta, double t);

/// Derivative of s_delta in t. Satisfies c^2 + delta s^2 = 1.
double c_delta(double delta, double t);

/// Primitive of s_delta vanishing at 0, i.e. (1 - c_delta) / delta.
double s_delta_integral(double delta, double t);

enum class Model { euclidean, sphere, hyperboloid };

/// Simply connected space form of constant curvature `delta` and dimension
/// `dim`, realized by an explicit embedding:
///   - delta = 0: R^dim itself;
///   - delta > 0: sphere of radius 1/sqrt(delta) in R^(dim+1);
///   - delta < 0: upper sheet of the hyperboloid <x,x>_L = 1/delta in
///     Minkowski space R^(1,dim), time coordinate first.
/// Points and tangent vectors are expressed in embedding coordinates.
class AmbientSpace {
 public:
  AmbientSpace(double delta, int dim);

  double delta() const { return delta_; }
  int dim() const { return dim_; }
  Model model() const { return model_; }
  int embedding_dim() const { return model_ == Model::euclidean ? dim_ : dim_ + 1; }

  /// 1/sqrt(|delta|); infinity for the Euclidean model.
  double curvature_radius() const;

  /// pi/sqrt(delta) on the sphere, infinity otherwise.
  double injectivity_radius() const;

  /// Distinguished base point: the origin, the north pole (R,0,..,0) or the
  /// hyperboloid apex (R,0,..,0).
  Vec origin() const;

  /// Ambient metric restricted to tangent vectors (Minkowski form for the
  /// hyperboloid).
  double inner(const Vec& a, const Vec& b) const;
  double norm(const Vec& v) const;

  bool contains(const Vec& p, double tol = 1e-9) const;
  Vec project_to_model(const Vec& p) const;
  Vec project_tangent(const Vec& base, const Vec& v) const;

  /// Orthonormal basis of the tangent space at `base`.
  std::vector<Vec> tangent_basis(const Vec& base) const;

  double distance(const Vec& a, const Vec& b) const;
  Vec exp_map(const Vec& base, const Vec& v) const;

  /// Inverse of exp_map. Throws AntipodalPoint when the target lies within
  /// 1e-9 of the cut locus of `base`.
  Vec log_map(const Vec& base, const Vec& target) const;

  /// s_delta(r) grad r at p, r the distance to base; zero at p == base.
  Vec radial_field(const Vec& base, const Vec& p) const;

 private:
  double delta_;
  int dim_;
  Model model_;
};

}  // namespace wlab
