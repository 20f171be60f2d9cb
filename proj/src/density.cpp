#include "wlab/density.hpp"

#include <cmath>

#include "wlab/errors.hpp"

namespace wlab {

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

double coord(const Vec& y, std::size_t k) { return k < static_cast<std::size_t>(y.size()) ? y[k] : 0.0; }

double monomial_value(const Monomial& m, const Vec& y) {
  double v = m.coeff;
  for (std::size_t k = 0; k < m.powers.size(); ++k) v *= ipow(coord(y, k), m.powers[k]);
  return v;
}

// d/dy_i of the monomial, or d2/dy_i dy_j when j >= 0.
double monomial_derivative(const Monomial& m, const Vec& y, std::size_t i, long j = -1) {
  std::vector<int> p = m.powers;
  double c = m.coeff;
  auto differentiate = [&](std::size_t k) {
    if (k >= p.size() || p[k] == 0) {
      c = 0;
      return;
    }
    c *= p[k];
    --p[k];
  };
  differentiate(i);
  if (j >= 0) differentiate(static_cast<std::size_t>(j));
  if (c == 0) return 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) c *= ipow(coord(y, k), p[k]);
  return c;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

DensityField DensityField::constant(double c) {
  DensityField f;
  f.kind_ = DensityKind::constant;
  f.c_ = c;
  return f;
}

DensityField DensityField::gaussian(double a, Vec center) {
  DensityField f;
  f.kind_ = DensityKind::gaussian;
  f.a_ = a;
  f.center_ = std::move(center);
  return f;
}

DensityField DensityField::linear(Vec v) {
  DensityField f;
  f.kind_ = DensityKind::linear;
  f.v_ = std::move(v);
  return f;
}

DensityField DensityField::polynomial(std::vector<Monomial> terms) {
  for (const auto& t : terms)
    for (int p : t.powers)
      if (p < 0) throw InvalidParams("polynomial exponents must be non-negative");
  DensityField f;
  f.kind_ = DensityKind::polynomial;
  f.terms_ = std::move(terms);
  return f;
}

Vec DensityField::local(const Vec& x) const {
  Vec y = x;
  if (shift_.size() > 0) {
    if (shift_.size() != x.size()) throw InvalidParams("density shift dimension mismatch");
    y -= shift_;
  }
  if (scale_ != 1.0) y /= scale_;
  return y;
}

double DensityField::value(const Vec& x) const {
  const Vec y = local(x);
  switch (kind_) {
    case DensityKind::constant:
      return c_;
    case DensityKind::gaussian: {
      if (center_.size() == 0) return a_ * y.squaredNorm();
      if (center_.size() != y.size()) throw InvalidParams("gaussian center dimension mismatch");
      return a_ * (y - center_).squaredNorm();
    }
    case DensityKind::linear: {
      if (v_.size() > y.size()) throw InvalidParams("linear density direction dimension mismatch");
      return v_.dot(y.head(v_.size()));
    }
    case DensityKind::polynomial: {
      double s = 0;
      for (const auto& t : terms_) s += monomial_value(t, y);
      return s;
    }
  }
  return 0;
}

Vec DensityField::gradient(const Vec& x) const {
  const Vec y = local(x);
  Vec g = Vec::Zero(y.size());
  switch (kind_) {
    case DensityKind::constant:
      break;
    case DensityKind::gaussian:
      g = center_.size() == 0 ? Vec(2.0 * a_ * y) : Vec(2.0 * a_ * (y - center_));
      break;
    case DensityKind::linear:
      if (v_.size() > y.size()) throw InvalidParams("linear density direction dimension mismatch");
      g.head(v_.size()) = v_;
      break;
    case DensityKind::polynomial:
      for (const auto& t : terms_)
        for (Eigen::Index i = 0; i < y.size(); ++i) g[i] += monomial_derivative(t, y, i);
      break;
  }
  return g / scale_;
}

Eigen::MatrixXd DensityField::hessian(const Vec& x) const {
  const Vec y = local(x);
  const auto d = y.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  switch (kind_) {
    case DensityKind::constant:
    case DensityKind::linear:
      break;
    case DensityKind::gaussian:
      h = 2.0 * a_ * Eigen::MatrixXd::Identity(d, d);
      break;
    case DensityKind::polynomial:
      for (const auto& t : terms_)
        for (Eigen::Index i = 0; i < d; ++i)
          for (Eigen::Index j = 0; j < d; ++j) h(i, j) += monomial_derivative(t, y, i, j);
      break;
  }
  return h / (scale_ * scale_);
}

bool DensityField::is_constant() const {
  switch (kind_) {
    case DensityKind::constant:
      return true;
    case DensityKind::gaussian:
      return a_ == 0;
    case DensityKind::linear:
      return v_.size() == 0 || v_.isZero(0);
    case DensityKind::polynomial:
      for (const auto& t : terms_) {
        if (t.coeff == 0) continue;
        for (int p : t.powers)
          if (p != 0) return false;
      }
      return true;
  }
  return false;
}

bool DensityField::is_radial() const {
  return kind_ == DensityKind::constant || kind_ == DensityKind::gaussian || is_constant();
}

double DensityField::radial_value(double r) const {
  if (kind_ == DensityKind::gaussian) return a_ * (r / scale_) * (r / scale_);
  if (is_constant()) {
    if (kind_ == DensityKind::constant) return c_;
    double s = 0;
    if (kind_ == DensityKind::polynomial)
      for (const auto& t : terms_) s += t.coeff;
    return s;
  }
  throw InvalidParams("radial profile requested for a non-radial density");
}

double DensityField::radial_derivative(double r) const {
  if (kind_ == DensityKind::gaussian) return 2.0 * a_ * r / (scale_ * scale_);
  if (is_constant()) return 0.0;
  throw InvalidParams("radial profile requested for a non-radial density");
}

DensityField DensityField::translated(const Vec& t) const {
  DensityField f = *this;
  // f_t(x) = f(x - t) = base((x - t - shift) / scale)
  f.shift_ = shift_.size() == 0 ? t : Vec(shift_ + t);
  return f;
}

DensityField DensityField::scaled(double t) const {
  if (!(t > 0)) throw InvalidParams("scale factor must be positive");
  DensityField f = *this;
  // f_t(x) = f(x / t) = base((x / t - shift) / scale) = base((x - t shift) / (t scale))
  if (shift_.size() > 0) f.shift_ = t * shift_;
  f.scale_ = scale_ * t;
  return f;
}

namespace {

void require_origin_radial(const DensityField& f) {
  if (!f.is_radial()) throw InvalidParams("curved ambients support only radial densities");
  if (f.kind() == DensityKind::gaussian) {
    const bool centered = (f.center().size() == 0 || f.center().isZero(0)) &&
                          (f.shift().size() == 0 || f.shift().isZero(0));
    if (!centered) throw InvalidParams("curved ambients need densities centered at the model origin");
  }
}

}  // namespace

double ambient_value(const AmbientSpace& space, const DensityField& f, const Vec& x) {
  if (space.model() == Model::euclidean) return f.value(x);
  require_origin_radial(f);
  return f.radial_value(space.distance(space.origin(), x));
}

Vec ambient_gradient(const AmbientSpace& space, const DensityField& f, const Vec& x) {
  if (space.model() == Model::euclidean) return f.gradient(x);
  require_origin_radial(f);
  const double r = space.distance(space.origin(), x);
  if (r == 0.0) return Vec::Zero(x.size());
  const Vec grad_r = -space.log_map(x, space.origin()) / r;
  return f.radial_derivative(r) * grad_r;
}

double ambient_hessian(const AmbientSpace& space, const DensityField& f, const Vec& x,
                       const Vec& u, const Vec& w) {
  if (space.model() == Model::euclidean) return u.dot(f.hessian(x) * w);
  require_origin_radial(f);
  const double r = space.distance(space.origin(), x);
  const double d2 = f.kind() == DensityKind::gaussian
                        ? 2.0 * f.gaussian_coefficient() / (f.scale() * f.scale())
                        : 0.0;
  const double uw = space.inner(u, w);
  if (r < 1e-12) return d2 * uw;
  const Vec grad_r = -space.log_map(x, space.origin()) / r;
  const double ur = space.inner(grad_r, u);
  const double wr = space.inner(grad_r, w);
  const double delta = space.delta();
  const double shape = c_delta(delta, r) / s_delta(delta, r);
  return d2 * ur * wr + f.radial_derivative(r) * shape * (uw - ur * wr);
}

double weighted_element(const DensityField& f, const Vec& x) { return std::exp(-f.value(x)); }

void BakryEmeryParams::validate(const DensityField& f) const {
  if (std::isnan(m)) throw InvalidParams("m is NaN");
  if (m < d) throw InvalidParams("m must be >= the ambient dimension");
  if (m == d && !f.is_constant())
    throw InvalidParams("m = d only makes sense for a constant density");
}

double bakry_emery_m(const AmbientSpace& space, const DensityField& f,
                     const BakryEmeryParams& params, const Vec& x, const Vec& v) {
  params.validate(f);
  if (params.d != space.dim()) throw InvalidParams("Bakry-Emery d must equal the ambient dimension");
  if (std::abs(space.norm(v) - 1.0) > 1e-9) throw InvalidParams("direction must be a unit vector");
  double value = space.delta() * (params.d - 1) + ambient_hessian(space, f, x, v, v);
  if (!params.infinite() && params.m > params.d) {
    const double gv = space.inner(ambient_gradient(space, f, x), v);
    value -= gv * gv / (params.m - params.d);
  }
  return value;
}

double halton(long index, int base) {
  double result = 0.0;
  double frac = 1.0 / base;
  while (index > 0) {
    result += frac * static_cast<double>(index % base);
    index /= base;
    frac /= base;
  }
  return result;
}

CheckReport certify_nonneg_BE(const AmbientSpace& space, const DensityField& f,
                              const BakryEmeryParams& params, const SampleRegion& region,
                              int n_samples) {
  if (n_samples < 1) throw InvalidParams("n_samples must be >= 1");
  params.validate(f);
  const int dim = space.dim();
  if (2 * dim > static_cast<int>(std::size(kPrimes)))
    throw InvalidParams("ambient dimension too large for the Halton sampler");

  // Cube point in [-1,1]^dim from the Halton sequence using bases offset..offset+dim-1.
  auto cube = [&](long idx, int offset) {
    Vec y(dim);
    for (int k = 0; k < dim; ++k) y[k] = 2.0 * halton(idx, kPrimes[offset + k]) - 1.0;
    return y;
  };

  const Vec o = space.origin();
  const auto basis0 = space.tangent_basis(o);
  double min_value = std::numeric_limits<double>::infinity();
  Vec argmin;
  long pidx = 0, didx = 0;
  for (int s = 0; s < n_samples; ++s) {
    Vec y;
    do y = cube(++pidx, 0);
    while (y.norm() > 1.0);
    Vec x;
    if (space.model() == Model::euclidean) {
      x = region.center.size() == dim ? Vec(region.center + region.radius * y) : Vec(region.radius * y);
    } else {
      Vec t = Vec::Zero(space.embedding_dim());
      for (int k = 0; k < dim; ++k) t += region.radius * y[k] * basis0[k];
      x = space.exp_map(o, t);
    }
    Vec z;
    do z = cube(++didx, dim);
    while (z.norm() > 1.0 || z.norm() < 0.1);
    z.normalize();
    Vec v;
    if (space.model() == Model::euclidean) {
      v = z;
    } else {
      const auto basis = space.tangent_basis(x);
      v = Vec::Zero(space.embedding_dim());
      for (int k = 0; k < dim; ++k) v += z[k] * basis[k];
      v /= space.norm(v);
    }
    const double value = bakry_emery_m(space, f, params, x, v);
    if (value < min_value) {
      min_value = value;
      argmin = x;
    }
  }

  CheckReport report;
  report.check = "be_nonneg";
  report.lhs = 0.0;
  report.rhs = min_value;
  report.details["min"] = min_value;
  report.details["n_samples"] = n_samples;
  report.details["region_radius"] = region.radius;
  for (Eigen::Index k = 0; k < argmin.size(); ++k)
    report.details["argmin_x" + std::to_string(k)] = argmin[k];
  report.notes.push_back("sampling-based search, not a certificate");
  report.finalize(1e-10, 0.0);
  report.hypotheses["be_nonneg"] = report.pass ? "ok" : "failed";
  return report;
}

}  // namespace wlab
