#include "wlab/heintze.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "wlab/errors.hpp"

namespace wlab {

namespace {

constexpr int kMaxCenterIterations = 200;

bool is_hypersurface(const SimplicialMesh& mesh) {
  return (mesh.kind() == CellKind::curve && mesh.ambient_dim() == 2) ||
         (mesh.kind() == CellKind::surface && mesh.ambient_dim() == 3);
}

double weighted_sum(const Eigen::VectorXd& mu, const Eigen::VectorXd& v) { return mu.dot(v); }

// sum mu_i (s/r)_i log_p x_i
Vec heintze_field(const Submanifold& m, const Eigen::VectorXd& mu, const Vec& p, double& weight_total) {
  const double delta = m.space.delta();
  Vec acc = Vec::Zero(p.size());
  weight_total = 0;
  for (int i = 0; i < m.mesh.vertex_count(); ++i) {
    const Vec lg = m.space.log_map(p, m.ambient_point(i));
    const double r = m.space.norm(lg);
    const double w = mu[i] * (r < 1e-9 ? 1.0 : s_delta(delta, r) / r);
    acc += w * lg;
    weight_total += w;
  }
  return acc;
}

void check_ball(const Submanifold& m, const Vec& p) {
  const double delta = m.space.delta();
  if (delta <= 0) return;
  const double bound = std::numbers::pi / (4.0 * std::sqrt(delta));
  for (int i = 0; i < m.mesh.vertex_count(); ++i) {
    const double r = m.space.distance(p, m.ambient_point(i));
    if (r > bound + 1e-9)
      throw OutOfBall("vertex " + std::to_string(i) + " lies at distance " + std::to_string(r) +
                      " from the center, beyond pi / (4 sqrt(delta))");
  }
}

struct Setup {
  OperatorPack pack;
  CenterOfMass center;
  ImmersionFields fields;
  double volume = 0;
};

Setup prepare(const Submanifold& m, const DensityField& f, const AssemblyOptions& opts) {
  Setup s;
  s.pack = assemble(m.mesh, m.weight(f), opts);
  s.center = weighted_center_of_mass(m, f, opts);
  s.fields = immersion_fields(m, f, s.center.point, s.pack);
  s.volume = s.pack.lumped.sum();
  return s;
}

void fill_center_details(CheckReport& rep, const CenterOfMass& c) {
  rep.details["center_residual"] = c.gradient_norm;
  rep.details["center_iterations"] = c.iterations;
}

CheckReport eigen_bound(const std::string& name, const Submanifold& m, const Setup& s, double rhs, const Tolerances& tol, const EigenOptions& eig) {
  const EigenResult er = lambda1_drift(s.pack, eig);
  CheckReport rep;
  rep.check = name;
  rep.lhs = er.lambda1;
  rep.rhs = rhs;
  rep.details["eigen_residual"] = er.residual;
  rep.details["eigen_iterations"] = er.iterations;
  rep.details["lambda2_ritz"] = er.lambda2;
  rep.details["near_degenerate"] = er.near_degenerate ? 1.0 : 0.0;
  rep.details["volume"] = s.volume;
  fill_center_details(rep, s.center);
  if (er.near_degenerate) rep.notes.push_back("near-degenerate first eigenvalue");

  // Test-function Rayleigh quotient: lambda_1 int s^2 <= int sum |grad phi_i|^2.
  const Eigen::MatrixXd phi = test_functions(m, s.center.point, s.pack);
  double num = 0, den = 0;
  for (int k = 0; k < phi.cols(); ++k) {
    num += phi.col(k).dot(s.pack.stiffness * phi.col(k));
    den += phi.col(k).dot(s.pack.mass * phi.col(k));
  }
  rep.details["test_rayleigh_quotient"] = num / den;
  rep.finalize(tol.pass_tolerance(rep.lhs, rep.rhs), tol.equality);
  return rep;
}

}  // namespace

Submanifold Submanifold::embedded(SimplicialMesh mesh) {
  if (!mesh.closed()) throw InvalidParams("submanifolds must be closed meshes");
  AmbientSpace space(0.0, mesh.ambient_dim());
  Eigen::MatrixXd pts = mesh.vertices();
  return {std::move(mesh), space, std::move(pts), std::nullopt};
}

Submanifold Submanifold::geodesic_sphere(const AmbientSpace& space, GeodesicSphere sphere) {
  if (space.dim() != sphere.n + 1) throw InvalidParams("ambient dimension must be n + 1");
  return {std::move(sphere.mesh), space, std::move(sphere.ambient_points), std::move(sphere.fields)};
}

Weight Submanifold::weight(const DensityField& f) const {
  if (space.model() == Model::euclidean && !analytic) return Weight::field(f);
  Eigen::VectorXd vals(mesh.vertex_count());
  for (int i = 0; i < mesh.vertex_count(); ++i) vals[i] = ambient_value(space, f, ambient_point(i));
  return Weight::vertex_values(std::move(vals));
}

CenterOfMass weighted_center_of_mass(const Submanifold& m, const DensityField& f, const AssemblyOptions& opts) {
  const Eigen::VectorXd mu = assemble(m.mesh, m.weight(f), opts).lumped;
  const double vol = mu.sum();
  CenterOfMass out;
  if (m.space.model() == Model::euclidean) {
    out.point = (m.ambient_points.transpose() * mu) / vol;
    Vec res = Vec::Zero(out.point.size());
    for (int i = 0; i < m.mesh.vertex_count(); ++i) res += mu[i] * (m.ambient_point(i) - out.point);
    out.gradient_norm = res.norm() / vol;
    out.iterations = 1;
    return out;
  }

  Vec mean = (m.ambient_points.transpose() * mu) / vol;
  Vec p = mean.norm() > 1e-12 ? m.space.project_to_model(mean) : m.space.origin();
  double wt = 0;
  Vec g = heintze_field(m, mu, p, wt);
  double res = m.space.norm(g) / vol;
  double damping = 1.0;
  int it = 0;
  while (res > 1e-13 && it < kMaxCenterIterations) {
    ++it;
    const Vec step = (damping / wt) * g;
    const Vec q = m.space.project_to_model(m.space.exp_map(p, step));
    double wq = 0;
    const Vec gq = heintze_field(m, mu, q, wq);
    const double rq = m.space.norm(gq) / vol;
    if (rq > res && damping > 0.5) {
      damping = 0.5;
      continue;
    }
    p = q;
    g = gq;
    wt = wq;
    res = rq;
    if (m.space.norm(step) < 1e-12) break;
  }
  if (res > 1e-9) throw NoConvergence("center of mass iteration did not converge", res);
  out.point = p;
  out.gradient_norm = res;
  out.iterations = it;
  check_ball(m, p);
  return out;
}

Eigen::MatrixXd test_functions(const Submanifold& m, const Vec& center, const OperatorPack& pack) {
  const double delta = m.space.delta();
  const int d = m.space.dim();
  const int nv = m.mesh.vertex_count();
  check_ball(m, center);
  const auto basis = m.space.tangent_basis(center);
  Eigen::MatrixXd phi(nv, delta > 0 ? d + 1 : d);
  Eigen::VectorXd c(nv);
  for (int i = 0; i < nv; ++i) {
    const Vec lg = m.space.log_map(center, m.ambient_point(i));
    const double r = m.space.norm(lg);
    const double factor = r < 1e-9 ? 1.0 : s_delta(delta, r) / r;
    for (int k = 0; k < d; ++k) phi(i, k) = factor * m.space.inner(lg, basis[k]);
    c[i] = c_delta(delta, r);
  }
  if (delta > 0) {
    const double cbar = weighted_sum(pack.lumped, c) / pack.lumped.sum();
    phi.col(d) = (c.array() - cbar) / std::sqrt(delta);
  }
  return phi;
}

ImmersionFields immersion_fields(const Submanifold& m, const DensityField& f, const Vec& center,
                                 const OperatorPack& pack) {
  if (m.analytic) {
    if (m.space.distance(center, m.space.origin()) > 1e-8)
      throw InvalidParams("analytic fields are given relative to the model origin");
    return *m.analytic;
  }
  if (m.space.model() != Model::euclidean) throw InvalidParams("computed fields need a Euclidean embedding");
  const int nv = m.mesh.vertex_count();
  const Eigen::MatrixXd v = embedding_drift_laplacian(m.mesh, pack);
  ImmersionFields out;
  out.source = FieldSource::computed;
  out.r.resize(nv);
  out.f_val.resize(nv);
  out.v_dot_grad_r.resize(nv);
  out.hf_minus_gradf_sq = v.rowwise().squaredNorm();
  Eigen::MatrixXd grad_r = Eigen::MatrixXd::Zero(nv, m.mesh.ambient_dim());
  for (int i = 0; i < nv; ++i) {
    const Vec x = m.mesh.vertex(i);
    const Vec d = x - center;
    out.r[i] = d.norm();
    if (out.r[i] > 0) grad_r.row(i) = (d / out.r[i]).transpose();
    out.v_dot_grad_r[i] = v.row(i).dot(grad_r.row(i));
    out.f_val[i] = f.value(x);
  }
  if (is_hypersurface(m.mesh)) out.hf_scalar = weighted_mean_curvature(m.mesh, f);
  out.v = v;
  out.grad_r = grad_r;
  return out;
}

CheckReport chain_check(const Submanifold& m, const DensityField& f, const Tolerances& tol,
                          const AssemblyOptions& opts) {
  const Setup s = prepare(m, f, opts);
  const double delta = m.space.delta();
  const Eigen::VectorXd& mu = s.pack.lumped;
  double a = 0, b = 0, c = 0;
  for (int i = 0; i < m.mesh.vertex_count(); ++i) {
    const double r = s.fields.r[i];
    const double sr = s_delta(delta, r);
    a += mu[i] * m.n() * c_delta(delta, r);
    b -= mu[i] * sr * s.fields.v_dot_grad_r[i];
    c += mu[i] * sr * std::sqrt(std::max(0.0, s.fields.hf_minus_gradf_sq[i]));
  }
  CheckReport rep;
  rep.check = "radial_chain";
  rep.lhs = a;
  rep.rhs = c;
  rep.details["middle"] = b;
  rep.details["ratio_middle_right"] = c > 0 ? b / c : std::numeric_limits<double>::quiet_NaN();
  rep.details["gap_left"] = b - a;
  rep.details["gap_right"] = c - b;
  fill_center_details(rep, s.center);
  const double t = tol.pass_tolerance(a, c) + 1e-12 * std::max(std::abs(a), std::abs(c));
  rep.finalize(t, tol.equality);
  rep.details["tolerance_used"] = t;
  if (b - a < -t || c - b < -t) {
    rep.pass = false;
    if (rep.status == CheckStatus::pass) rep.status = CheckStatus::fail;
  }
  return rep;
}

CheckReport frame_check(const Submanifold& m, const DensityField& f, const Tolerances& tol,
                          const AssemblyOptions& opts) {
  const Setup s = prepare(m, f, opts);
  const double delta = m.space.delta();
  const int n = m.n(), d = m.space.dim();
  const Eigen::MatrixXd phi = test_functions(m, s.center.point, s.pack);
  Eigen::VectorXd sr(m.mesh.vertex_count()), cr(m.mesh.vertex_count()), big_s(m.mesh.vertex_count());
  for (int i = 0; i < m.mesh.vertex_count(); ++i) {
    const double r = s.fields.r[i];
    sr[i] = s_delta(delta, r);
    cr[i] = c_delta(delta, r);
    big_s[i] = s_delta_integral(delta, r);
  }
  std::vector<TangentField> grads;
  for (int k = 0; k < d; ++k) grads.push_back(tangential_gradient(m.mesh, phi.col(k)));
  const TangentField xt = tangential_gradient(m.mesh, big_s);

  // Operator error on the mesh's own coordinates bounds the discrete overshoot.
  double coord_err = 0, part1 = 0;
  std::vector<TangentField> coord;
  for (int k = 0; k < m.mesh.ambient_dim(); ++k) coord.push_back(tangential_gradient(m.mesh, m.mesh.vertices().col(k)));
  for (int c = 0; c < m.mesh.cell_count(); ++c) {
    double sum = 0, csum = 0;
    for (const auto& g : grads) sum += g.values.row(c).squaredNorm();
    sum += delta * xt.values.row(c).squaredNorm();
    for (const auto& g : coord) csum += g.values.row(c).squaredNorm();
    part1 = std::max(part1, sum);
    coord_err = std::max(coord_err, std::abs(csum - n));
  }
  const double eps = std::max(1e-9 * n, coord_err);

  const Eigen::VectorXd& mu = s.pack.lumped;
  CheckReport rep;
  rep.check = "frame_bound";
  rep.lhs = part1;
  rep.rhs = n + eps;
  rep.details["part1_max"] = part1;
  rep.details["part1_eps"] = eps;
  bool part2_ok = true;
  if (delta <= 0) {
    const double p2l = mu.dot(sr) * mu.dot(sr.cwiseProduct(cr));
    const double p2r = mu.dot(sr.cwiseProduct(sr)) * mu.dot(cr);
    rep.details["part2_lhs"] = p2l;
    rep.details["part2_rhs"] = p2r;
    rep.details["part2_gap"] = p2r - p2l;
    part2_ok = p2r - p2l >= -1e-12 * std::max(std::abs(p2l), std::abs(p2r));
    rep.hypotheses["part2"] = "ok";
  } else {
    rep.hypotheses["part2"] = "n/a";
  }
  // Weighted means of the test functions.
  const double scale = phi.cwiseAbs().maxCoeff() * mu.sum();
  double mean_err = 0;
  for (int k = 0; k < phi.cols(); ++k) mean_err = std::max(mean_err, std::abs(mu.dot(phi.col(k))) / scale);
  rep.details["test_mean_error"] = mean_err;
  fill_center_details(rep, s.center);
  rep.finalize(tol.absolute, tol.equality);
  if (!part2_ok) {
    rep.pass = false;
    if (rep.status == CheckStatus::pass) rep.status = CheckStatus::fail;
    rep.notes.push_back("part (2) violated");
  }
  return rep;
}

CheckReport eigen_max_bound(const Submanifold& m, const DensityField& f, const Tolerances& tol,
                       const AssemblyOptions& opts, const EigenOptions& eig) {
  const double delta = m.space.delta();
  if (!(delta < 0)) throw WrongCurvatureSign("the max-curvature bound needs delta < 0");
  const Setup s = prepare(m, f, opts);
  const int n = m.n();
  const double vmax = s.fields.hf_minus_gradf_sq.maxCoeff();
  CheckReport rep = eigen_bound("eigen_max", m, s, n * delta + vmax / n, tol, eig);
  rep.details["max_hf_minus_gradf_sq"] = vmax;

  // Integrals of the intermediate estimate delta int |X^T|^2 >= n int c^2 - int c s |V|.
  const Eigen::VectorXd& mu = s.pack.lumped;
  Eigen::VectorXd big_s(m.mesh.vertex_count());
  double c2 = 0, csv = 0;
  for (int i = 0; i < m.mesh.vertex_count(); ++i) {
    const double r = s.fields.r[i];
    big_s[i] = s_delta_integral(delta, r);
    c2 += mu[i] * c_delta(delta, r) * c_delta(delta, r);
    csv += mu[i] * c_delta(delta, r) * s_delta(delta, r) * std::sqrt(s.fields.hf_minus_gradf_sq[i]);
  }
  rep.details["tangent_energy_lhs"] = delta * big_s.dot(s.pack.stiffness * big_s);
  rep.details["tangent_energy_rhs"] = n * c2 - csv;
  return rep;
}

CheckReport eigen_mean_bound(const Submanifold& m, const DensityField& f, const Tolerances& tol,
                       const AssemblyOptions& opts, const EigenOptions& eig) {
  const double delta = m.space.delta();
  if (delta < 0) throw WrongCurvatureSign("the averaged bound needs delta >= 0");
  const Setup s = prepare(m, f, opts);
  const int n = m.n();
  const double integral = s.pack.lumped.dot(s.fields.hf_minus_gradf_sq);
  CheckReport rep = eigen_bound("eigen_mean", m, s, n * delta + integral / (n * s.volume), tol, eig);
  rep.details["mean_hf_minus_gradf_sq"] = integral / s.volume;
  rep.details["max_r"] = s.fields.r.maxCoeff();
  rep.hypotheses["ball_containment"] = "ok";
  return rep;
}

CheckReport equality_diagnostic(const Submanifold& m, const DensityField& f, const CheckReport& bound,
                                const AssemblyOptions& opts) {
  if (!(std::abs(bound.relative_gap) < bound.equality_tolerance))
    throw NotNearEquality("eigenvalue bound is not within its equality tolerance");
  const Setup s = prepare(m, f, opts);
  const double delta = m.space.delta();
  const Eigen::VectorXd& mu = s.pack.lumped;
  const double vol = mu.sum();
  const int nv = m.mesh.vertex_count();
  Eigen::VectorXd sv(nv), ssq(nv);
  for (int i = 0; i < nv; ++i) {
    const double sr = s_delta(delta, s.fields.r[i]);
    sv[i] = sr * s.fields.v_dot_grad_r[i];
    ssq[i] = sr * sr;
  }
  const double lambda = mu.dot(sv) / mu.dot(s.fields.hf_minus_gradf_sq);
  auto wstd = [&](const Eigen::VectorXd& x) {
    const double mean = mu.dot(x) / vol;
    return std::sqrt(std::max(0.0, mu.dot((x.array() - mean).square().matrix()) / vol));
  };
  const double fstd = wstd(s.fields.f_val);
  const bool unconstrained = fstd * fstd < 1e-14;
  Eigen::VectorXd big_f(nv);
  for (int i = 0; i < nv; ++i) big_f[i] = lambda * s.fields.f_val[i] + s_delta_integral(delta, s.fields.r[i]);
  const double dev = wstd(big_f);
  const double fit = std::sqrt(std::max(
      0.0, (mu.dot(ssq) - 2 * lambda * mu.dot(sv) + lambda * lambda * mu.dot(s.fields.hf_minus_gradf_sq)) / vol));

  CheckReport rep;
  rep.check = "equality_diagnostic";
  rep.lhs = 0.0;
  rep.rhs = dev;
  rep.gap = dev;
  const double fmean = std::abs(mu.dot(big_f) / vol);
  rep.relative_gap = dev / std::max(fmean, 1e-300);
  rep.tolerance = 0;
  rep.equality_tolerance = 1e-8;
  rep.pass = true;
  rep.equality = dev < 1e-8 * std::max(1.0, fmean);
  rep.status = CheckStatus::pass;
  rep.details["lambda"] = lambda;
  rep.details["lambda_unconstrained"] = unconstrained ? 1.0 : 0.0;
  rep.details["f_std"] = fstd;
  rep.details["F_std"] = dev;
  rep.details["fit_residual"] = fit;
  if (unconstrained) rep.notes.push_back("f is constant on M; lambda unconstrained");
  return rep;
}

double shrinker_radius(double delta, int n) {
  if (n < 1) throw InvalidParams("n must be >= 1");
  if (delta == 0.0) return std::sqrt(2.0 * n);
  auto g = [&](double r) { return r * s_delta(delta, r) - 2.0 * n * c_delta(delta, r); };
  double lo = 0.0, hi;
  if (delta > 0) {
    hi = std::numbers::pi / (2.0 * std::sqrt(delta));
  } else {
    hi = 1.0;
    while (g(hi) < 0 && hi < 1e6) hi *= 2;
  }
  if (!(g(lo) < 0 && g(hi) > 0)) throw NoRoot("no sign change for the shrinker equation");
  for (int it = 0; it < 2000 && hi - lo > 0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < 0 ? lo : hi) = mid;
  }
  const double r = std::abs(g(lo)) < std::abs(g(hi)) ? lo : hi;
  if (std::abs(g(r)) > 1e-12) throw NoRoot("bisection did not reach the residual target");
  return r;
}

CheckReport shrinker_check(const AmbientSpace& space, int n, int resolution) {
  const double r0 = shrinker_radius(space.delta(), n);
  const DensityField f = DensityField::gaussian(0.25);
  const GeodesicSphere sphere = scaled_sphere_with_analytic_fields(space, r0, n, resolution, f);
  const double max_hf = sphere.fields.hf_scalar->cwiseAbs().maxCoeff();
  const double min_v = sphere.fields.hf_minus_gradf_sq.minCoeff();
  CheckReport rep;
  rep.check = "shrinker";
  rep.lhs = max_hf;
  rep.rhs = min_v;
  rep.details["radius"] = r0;
  rep.details["root_residual"] = r0 * s_delta(space.delta(), r0) - 2.0 * n * c_delta(space.delta(), r0);
  rep.details["max_abs_hf"] = max_hf;
  rep.details["min_hf_minus_gradf_sq"] = min_v;
  if (space.model() == Model::euclidean) {
    const Eigen::VectorXd hf = weighted_mean_curvature(sphere.mesh, f);
    rep.details["discrete_max_abs_hf"] = hf.cwiseAbs().maxCoeff();
  }
  rep.finalize(0.0, 1e-2);
  rep.pass = max_hf < 1e-8 && min_v > 0 && std::abs(rep.details["root_residual"]) < 1e-12;
  rep.equality = false;
  rep.status = rep.pass ? CheckStatus::pass : CheckStatus::fail;
  return rep;
}

}  // namespace wlab
