#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "wlab/report.hpp"
#include "wlab/spaceform.hpp"

namespace wlab {

enum class DensityKind { constant, gaussian, linear, polynomial };

/// coeff * prod_k x_k^powers[k]
struct Monomial {
  double coeff = 0;
  std::vector<int> powers;
};

/// Analytic weight f of the measure e^(-f) dvol.
///
/// Evaluators act on Euclidean coordinates. A field may carry a rigid shift
/// and a uniform scale, f_t(x) = f((x - shift) / scale), so scenarios can be
/// translated or dilated together with their meshes.
class DensityField {
 public:
  static DensityField constant(double c);
  /// f = a |x - center|^2; an empty center means the origin.
  static DensityField gaussian(double a, Vec center = Vec());
  /// f = <v, x>
  static DensityField linear(Vec v);
  static DensityField polynomial(std::vector<Monomial> terms);

  DensityKind kind() const { return kind_; }
  double constant_value() const { return c_; }
  double gaussian_coefficient() const { return a_; }
  const Vec& center() const { return center_; }
  const Vec& direction() const { return v_; }
  const std::vector<Monomial>& terms() const { return terms_; }
  const Vec& shift() const { return shift_; }
  double scale() const { return scale_; }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Eigen::MatrixXd hessian(const Vec& x) const;

  bool is_constant() const;
  /// Constant or gaussian: a function of the distance to a single point.
  bool is_radial() const;

  /// Radial profile f(r) of a radial field (r measured from its center).
  double radial_value(double r) const;
  double radial_derivative(double r) const;

  DensityField translated(const Vec& t) const;
  DensityField scaled(double t) const;

 private:
  DensityField() = default;
  Vec local(const Vec& x) const;

  DensityKind kind_ = DensityKind::constant;
  double c_ = 0;
  double a_ = 0;
  Vec center_;
  Vec v_;
  std::vector<Monomial> terms_;
  Vec shift_;
  double scale_ = 1.0;
};

/// Evaluation of f on a space form. On curved models only radial fields
/// centered at the model origin are supported (r = geodesic distance).
double ambient_value(const AmbientSpace& space, const DensityField& f, const Vec& x);
Vec ambient_gradient(const AmbientSpace& space, const DensityField& f, const Vec& x);
/// Hessian of f as a bilinear form on tangent vectors at x.
double ambient_hessian(const AmbientSpace& space, const DensityField& f, const Vec& x,
                       const Vec& u, const Vec& w);

/// e^(-f(x))
double weighted_element(const DensityField& f, const Vec& x);

constexpr double kInfiniteM = std::numeric_limits<double>::infinity();

struct BakryEmeryParams {
  double m = kInfiniteM;
  int d = 2;

  bool infinite() const { return std::isinf(m); }
  /// (m - 1) / m, or 1 in the m = infinity limit.
  double ros_factor() const { return infinite() ? 1.0 : (m - 1.0) / m; }
  /// Throws InvalidParams unless m > d, m = d with constant f, or m = inf.
  void validate(const DensityField& f) const;
};

/// Ric(v,v) + Hess f(v,v) - <grad f, v>^2 / (m - d) for a unit vector v.
double bakry_emery_m(const AmbientSpace& space, const DensityField& f,
                     const BakryEmeryParams& params, const Vec& x, const Vec& v);

/// Ball of sample points; on curved models the center is ignored and the
/// ball is taken around the model origin.
struct SampleRegion {
  Vec center;
  double radius = 1.0;
};

/// Quasi-random (Halton) search for the minimum of bakry_emery_m over
/// points in `region` and unit directions. Passes iff the minimum is
/// >= -1e-10. Sampling, not a proof.
CheckReport certify_nonneg_BE(const AmbientSpace& space, const DensityField& f,
                              const BakryEmeryParams& params, const SampleRegion& region,
                              int n_samples);

/// i-th element of the van der Corput sequence in the given prime base.
double halton(long index, int base);

}  // namespace wlab
