#include "wlab/spaceform.hpp"

#include <cmath>
#include <limits>

#include "wlab/errors.hpp"

namespace wlab {

namespace {

constexpr double kSeriesThreshold = 1e-8;
constexpr double kCutLocusMargin = 1e-9;

double minkowski(const Vec& a, const Vec& b) {
  return -a[0] * b[0] + a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
}

}  // namespace

double s_delta(double delta, double t) {
  if (std::abs(delta) < kSeriesThreshold) {
    const double t2 = t * t;
    return t * (1.0 - delta * t2 / 6.0 + delta * delta * t2 * t2 / 120.0 -
                delta * delta * delta * t2 * t2 * t2 / 5040.0);
  }
  if (delta > 0) {
    const double k = std::sqrt(delta);
    return std::sin(k * t) / k;
  }
  const double k = std::sqrt(-delta);
  return std::sinh(k * t) / k;
}

double c_delta(double delta, double t) {
  if (std::abs(delta) < kSeriesThreshold) {
    const double t2 = t * t;
    return 1.0 - delta * t2 / 2.0 + delta * delta * t2 * t2 / 24.0 -
           delta * delta * delta * t2 * t2 * t2 / 720.0;
  }
  if (delta > 0) return std::cos(std::sqrt(delta) * t);
  return std::cosh(std::sqrt(-delta) * t);
}

double s_delta_integral(double delta, double t) {
  if (std::abs(delta) < kSeriesThreshold) {
    const double t2 = t * t;
    return t2 * (0.5 - delta * t2 / 24.0 + delta * delta * t2 * t2 / 720.0 -
                 delta * delta * delta * t2 * t2 * t2 / 40320.0);
  }
  // 1 - cos x = 2 sin^2(x/2) avoids cancellation for small arguments.
  if (delta > 0) {
    const double h = std::sin(0.5 * std::sqrt(delta) * t);
    return 2.0 * h * h / delta;
  }
  const double h = std::sinh(0.5 * std::sqrt(-delta) * t);
  return 2.0 * h * h / (-delta);
}

AmbientSpace::AmbientSpace(double delta, int dim) : delta_(delta), dim_(dim) {
  if (dim < 1) throw InvalidParams("ambient dimension must be >= 1");
  if (!std::isfinite(delta)) throw InvalidParams("curvature must be finite");
  model_ = delta == 0.0 ? Model::euclidean : (delta > 0 ? Model::sphere : Model::hyperboloid);
}

double AmbientSpace::curvature_radius() const {
  if (model_ == Model::euclidean) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(std::abs(delta_));
}

double AmbientSpace::injectivity_radius() const {
  if (model_ != Model::sphere) return std::numeric_limits<double>::infinity();
  return M_PI / std::sqrt(delta_);
}

Vec AmbientSpace::origin() const {
  Vec o = Vec::Zero(embedding_dim());
  if (model_ != Model::euclidean) o[0] = curvature_radius();
  return o;
}

double AmbientSpace::inner(const Vec& a, const Vec& b) const {
  return model_ == Model::hyperboloid ? minkowski(a, b) : a.dot(b);
}

double AmbientSpace::norm(const Vec& v) const { return std::sqrt(std::max(0.0, inner(v, v))); }

bool AmbientSpace::contains(const Vec& p, double tol) const {
  if (p.size() != embedding_dim()) return false;
  if (model_ == Model::euclidean) return p.allFinite();
  const double r2 = curvature_radius() * curvature_radius();
  if (model_ == Model::sphere) return std::abs(p.squaredNorm() - r2) <= tol * r2;
  return p[0] > 0 && std::abs(minkowski(p, p) + r2) <= tol * r2;
}

Vec AmbientSpace::project_to_model(const Vec& p) const {
  switch (model_) {
    case Model::euclidean:
      return p;
    case Model::sphere:
      return p * (curvature_radius() / p.norm());
    case Model::hyperboloid: {
      Vec q = p;
      const double r = curvature_radius();
      q[0] = std::sqrt(r * r + p.tail(p.size() - 1).squaredNorm());
      return q;
    }
  }
  return p;
}

Vec AmbientSpace::project_tangent(const Vec& base, const Vec& v) const {
  switch (model_) {
    case Model::euclidean:
      return v;
    case Model::sphere:
      return v - (base.dot(v) / base.squaredNorm()) * base;
    case Model::hyperboloid:
      return v - (minkowski(base, v) / minkowski(base, base)) * base;
  }
  return v;
}

std::vector<Vec> AmbientSpace::tangent_basis(const Vec& base) const {
  std::vector<Vec> basis;
  const int e = embedding_dim();
  for (int k = 0; k < e && static_cast<int>(basis.size()) < dim_; ++k) {
    if (model_ == Model::hyperboloid && k == 0) continue;
    Vec v = project_tangent(base, Vec::Unit(e, k));
    for (const Vec& b : basis) v -= inner(b, v) * b;
    for (const Vec& b : basis) v -= inner(b, v) * b;
    const double n = norm(v);
    if (n > 1e-6) basis.push_back(v / n);
  }
  return basis;
}

double AmbientSpace::distance(const Vec& a, const Vec& b) const {
  switch (model_) {
    case Model::euclidean:
      return (a - b).norm();
    case Model::sphere:
      return curvature_radius() * 2.0 * std::atan2((a - b).norm(), (a + b).norm());
    case Model::hyperboloid: {
      const Vec d = a - b;
      const double r = curvature_radius();
      return 2.0 * r * std::asinh(std::sqrt(std::max(0.0, minkowski(d, d))) / (2.0 * r));
    }
  }
  return 0.0;
}

Vec AmbientSpace::exp_map(const Vec& base, const Vec& v) const {
  if (model_ == Model::euclidean) return base + v;
  const double n = norm(v);
  if (n == 0.0) return base;
  const double r = curvature_radius();
  if (model_ == Model::sphere) return std::cos(n / r) * base + (r * std::sin(n / r) / n) * v;
  return std::cosh(n / r) * base + (r * std::sinh(n / r) / n) * v;
}

Vec AmbientSpace::log_map(const Vec& base, const Vec& target) const {
  if (model_ == Model::euclidean) return target - base;
  const double d = distance(base, target);
  if (model_ == Model::sphere && d >= injectivity_radius() - kCutLocusMargin) {
    throw AntipodalPoint("log map undefined: target at distance " + std::to_string(d) +
                         " reaches the cut locus");
  }
  const double r2 = curvature_radius() * curvature_radius();
  const Vec diff = target - base;
  // Tangential part of (target - base); sign of the correction differs by model.
  Vec v = model_ == Model::sphere ? Vec(diff - (base.dot(diff) / r2) * base)
                                  : Vec(diff + (minkowski(base, diff) / r2) * base);
  const double n = norm(v);
  if (n == 0.0 || d == 0.0) return Vec::Zero(base.size());
  return (d / n) * v;
}

Vec AmbientSpace::radial_field(const Vec& base, const Vec& p) const {
  const double r = distance(base, p);
  if (r == 0.0) return Vec::Zero(p.size());
  return (-s_delta(delta_, r) / r) * log_map(p, base);
}

}  // namespace wlab
