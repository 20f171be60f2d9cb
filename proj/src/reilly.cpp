#include "wlab/reilly.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

#include "wlab/errors.hpp"
#include "wlab/quadrature.hpp"

namespace wlab {

double Tolerances::pass_tolerance(double lhs, double rhs) const {
  double scale = 0;
  if (std::isfinite(lhs)) scale = std::max(scale, std::abs(lhs));
  if (std::isfinite(rhs)) scale = std::max(scale, std::abs(rhs));
  return absolute + relative * scale;
}

namespace {

PoissonSolution solve_clamped(const SimplicialMesh& domain, const DensityField& f, const AssemblyOptions& opts,
                              const std::set<int>& clamped, BcKind bc) {
  if (domain.kind() != CellKind::planar_domain) throw InvalidParams("Poisson problems need a planar domain");
  const OperatorPack pack = assemble(domain, Weight::field(f), opts);
  const int nv = domain.vertex_count();
  const Eigen::VectorXd b = pack.mass * Eigen::VectorXd::Ones(nv);

  std::vector<int> free_index(nv, -1);
  int nf = 0;
  for (int i = 0; i < nv; ++i)
    if (!clamped.count(i)) free_index[i] = nf++;
  if (nf == 0) throw SingularSystem("no free vertices");

  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < pack.stiffness.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(pack.stiffness, k); it; ++it) {
      const int r = free_index[it.row()], c = free_index[it.col()];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  SparseMatrix sii(nf, nf);
  sii.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd rhs(nf);
  for (int i = 0; i < nv; ++i)
    if (free_index[i] >= 0) rhs[free_index[i]] = -b[i];

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(sii);
  if (ldlt.info() != Eigen::Success) throw SingularSystem("factorization of the interior stiffness failed");
  const Eigen::VectorXd ui = ldlt.solve(rhs);
  if (ldlt.info() != Eigen::Success || !ui.allFinite()) throw SingularSystem("interior solve failed");

  PoissonSolution sol;
  sol.bc = bc;
  sol.residual = (sii * ui - rhs).norm() / std::max(rhs.norm(), 1e-300);
  sol.u = Eigen::VectorXd::Zero(nv);
  for (int i = 0; i < nv; ++i)
    if (free_index[i] >= 0) sol.u[i] = ui[free_index[i]];

  // Flux recovery: the residual of the unconstrained equations at a clamped
  // vertex is the boundary integral of u_nu against its hat function.
  const Eigen::VectorXd r = pack.stiffness * sol.u + b;
  std::map<int, double> dual;
  const auto& rule = segment_rule(2);
  for (const auto& e : domain.boundary()) {
    if (!clamped.count(e.a) || !clamped.count(e.b)) continue;
    if (bc == BcKind::mixed && e.label != BoundaryLabel::arc) continue;
    const Vec pa = domain.vertex(e.a), pb = domain.vertex(e.b);
    const double len = (pb - pa).norm();
    for (const auto& q : rule) {
      const double wf = std::exp(-f.value(q.bary[0] * pa + q.bary[1] * pb)) * q.weight * len;
      dual[e.a] += wf * q.bary[0];
      dual[e.b] += wf * q.bary[1];
    }
  }
  for (const auto& [v, d] : dual)
    if (d > 0) sol.u_nu[v] = r[v] / d;
  return sol;
}

double factor(const BakryEmeryParams& params) { return params.ros_factor(); }

// Boundary vertices of both labels; labels only matter at chain ends.
std::vector<BoundaryVertex> full_boundary(const SimplicialMesh& domain, const DensityField& f) {
  auto out = boundary_geometry(domain, BoundaryLabel::arc, f);
  auto more = boundary_geometry(domain, BoundaryLabel::cone_face, f);
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

void attach_be(CheckReport& rep, const SimplicialMesh& domain, const DensityField& f,
               const BakryEmeryParams& params) {
  const AmbientSpace plane(0.0, 2);
  Vec center = domain.vertices().colwise().mean().transpose();
  double radius = 0;
  for (int i = 0; i < domain.vertex_count(); ++i) radius = std::max(radius, (domain.vertex(i) - center).norm());
  const CheckReport be = certify_nonneg_BE(plane, f, params, {center, radius}, 512);
  rep.hypotheses["be_nonneg"] = be.pass ? "ok" : "failed";
  rep.details["be_min"] = be.rhs;
  if (params.infinite() && !f.is_constant()) rep.notes.push_back("limit case m = inf, outside the hypotheses");
}

CheckReport ros_like(const std::string& name, const SimplicialMesh& domain, const DensityField& f,
                     const BakryEmeryParams& params, const std::vector<BoundaryVertex>& m_part,
                     const Tolerances& tol) {
  params.validate(f);
  if (params.d != 2) throw InvalidParams("planar domains need d = 2");
  CheckReport rep;
  rep.check = name;
  rep.lhs = weighted_measure(domain, f);
  double sum = 0, min_hf = std::numeric_limits<double>::infinity();
  int worst = -1;
  for (const auto& bv : m_part) {
    const double hf = bv.kappa - f.gradient(domain.vertex(bv.index)).dot(bv.normal);
    if (hf < min_hf) {
      min_hf = hf;
      worst = bv.index;
    }
    sum += bv.weighted_dual / hf;
  }
  rep.details["min_hf"] = min_hf;
  rep.details["factor"] = factor(params);
  rep.details["boundary_vertices"] = static_cast<double>(m_part.size());
  if (min_hf > 0) {
    rep.hypotheses["hf_positive"] = "ok";
    rep.rhs = factor(params) * sum;
  } else {
    rep.hypotheses["hf_positive"] = "failed";
    rep.notes.push_back("H_f <= 0 at boundary vertex " + std::to_string(worst));
    rep.rhs = std::numeric_limits<double>::quiet_NaN();
  }
  attach_be(rep, domain, f, params);
  rep.finalize(tol.pass_tolerance(rep.lhs, rep.rhs), tol.equality);
  return rep;
}

}  // namespace

PoissonSolution solve_dirichlet(const SimplicialMesh& domain, const DensityField& f, const AssemblyOptions& opts) {
  std::set<int> clamped;
  for (const auto& e : domain.boundary()) {
    clamped.insert(e.a);
    clamped.insert(e.b);
  }
  return solve_clamped(domain, f, opts, clamped, BcKind::dirichlet);
}

PoissonSolution solve_mixed(const SimplicialMesh& domain, const DensityField& f, const AssemblyOptions& opts) {
  if (!domain.has_label(BoundaryLabel::arc) || !domain.has_label(BoundaryLabel::cone_face))
    throw MissingLabels("mixed problem needs arc and cone-face boundary labels");
  std::set<int> clamped;
  for (const auto& e : domain.boundary())
    if (e.label == BoundaryLabel::arc) {
      clamped.insert(e.a);
      clamped.insert(e.b);
    }
  return solve_clamped(domain, f, opts, clamped, BcKind::mixed);
}

AnalyticFunction AnalyticFunction::quadratic(Eigen::MatrixXd hessian, Vec gradient, double constant) {
  const Eigen::MatrixXd h = 0.5 * (hessian + hessian.transpose());
  AnalyticFunction u;
  u.value = [h, gradient, constant](const Vec& x) { return 0.5 * x.dot(h * x) + gradient.dot(x) + constant; };
  u.gradient = [h, gradient](const Vec& x) -> Vec { return h * x + gradient; };
  u.hessian = [h](const Vec&) { return h; };
  return u;
}

CheckReport reilly_residual(const SimplicialMesh& domain, const DensityField& f, const AnalyticFunction& u,
                            int quad_points, const Tolerances& tol) {
  if (domain.kind() != CellKind::planar_domain) throw InvalidParams("Reilly identity needs a planar domain");
  const auto& rule = triangle_rule(quad_points);
  double lhs = 0;
  for (int c = 0; c < domain.cell_count(); ++c) {
    double s = 0;
    for (const auto& q : rule) {
      const Vec x = domain.point(c, q.bary);
      const Vec gu = u.gradient(x), gf = f.gradient(x);
      const Eigen::MatrixXd hu = u.hessian(x);
      const double lap = hu.trace() - gf.dot(gu);
      s += q.weight * std::exp(-f.value(x)) * (lap * lap - hu.squaredNorm() - gu.dot(f.hessian(x) * gu));
    }
    lhs += s * domain.cell_measure(c);
  }
  double rhs = 0;
  for (const auto& bv : full_boundary(domain, f)) {
    const Vec x = domain.vertex(bv.index);
    const Vec gu = u.gradient(x), gf = f.gradient(x);
    const Eigen::MatrixXd hu = u.hessian(x);
    const double un = gu.dot(bv.normal), ut = gu.dot(bv.tangent);
    const double hf = bv.kappa - gf.dot(bv.normal);
    const double lap_m = bv.tangent.dot(hu * bv.tangent) - bv.kappa * un - gf.dot(bv.tangent) * ut;
    rhs += bv.weighted_dual * (2.0 * un * lap_m + un * un * hf + bv.kappa * ut * ut);
  }
  CheckReport rep;
  rep.check = "reilly";
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.details["quad_points"] = quad_points;
  rep.finalize_identity(tol.pass_tolerance(rep.lhs, rep.rhs), tol.equality);
  return rep;
}

CheckReport reilly_residual(const SimplicialMesh& domain, const DensityField& f, const PoissonSolution& sol,
                            const Tolerances& tol) {
  const int nv = domain.vertex_count();
  const auto& cells = domain.cells();
  std::vector<double> share(nv, 0.0);
  auto average = [&](const TangentField& t) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(nv, 2);
    std::fill(share.begin(), share.end(), 0.0);
    for (int c = 0; c < domain.cell_count(); ++c) {
      const double a = domain.cell_measure(c);
      for (int j = 0; j < 3; ++j) {
        g.row(cells(c, j)) += a * t.values.row(c);
        share[cells(c, j)] += a;
      }
    }
    for (int i = 0; i < nv; ++i) g.row(i) /= share[i];
    return g;
  };
  const TangentField cell_grad = tangential_gradient(domain, sol.u);
  const Eigen::MatrixXd grad = average(cell_grad);
  const TangentField hx = tangential_gradient(domain, grad.col(0));
  const TangentField hy = tangential_gradient(domain, grad.col(1));

  double lhs = 0;
  const std::array<double, 3> mid{1.0 / 3, 1.0 / 3, 1.0 / 3};
  for (int c = 0; c < domain.cell_count(); ++c) {
    Eigen::Matrix2d h;
    h.row(0) = hx.values.row(c);
    h.row(1) = hy.values.row(c);
    h = 0.5 * (h + h.transpose()).eval();
    const Vec x = domain.point(c, mid);
    const Vec gu = cell_grad.values.row(c).transpose();
    const Vec gf = f.gradient(x);
    const double lap = h.trace() - gf.dot(gu);
    lhs += domain.cell_measure(c) * std::exp(-f.value(x)) *
           (lap * lap - h.squaredNorm() - gu.dot(f.hessian(x) * gu));
  }

  // Vertex Hessians for the tangential boundary terms.
  Eigen::MatrixXd hxx = average(hx), hyy = average(hy);
  double rhs = 0;
  for (const auto& bv : full_boundary(domain, f)) {
    const auto it = sol.u_nu.find(bv.index);
    if (it == sol.u_nu.end()) continue;
    const Vec x = domain.vertex(bv.index);
    const Vec gu = grad.row(bv.index).transpose(), gf = f.gradient(x);
    Eigen::Matrix2d h;
    h.row(0) = hxx.row(bv.index);
    h.row(1) = hyy.row(bv.index);
    h = 0.5 * (h + h.transpose()).eval();
    const double un = it->second, ut = gu.dot(bv.tangent);
    const double hf = bv.kappa - gf.dot(bv.normal);
    const double lap_m = bv.tangent.dot(h * bv.tangent) - bv.kappa * un - gf.dot(bv.tangent) * ut;
    rhs += bv.weighted_dual * (2.0 * un * lap_m + un * un * hf + bv.kappa * ut * ut);
  }
  CheckReport rep;
  rep.check = "reilly";
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.notes.push_back("mesh-function mode: recovered derivatives, low order");
  rep.finalize_identity(tol.pass_tolerance(rep.lhs, rep.rhs), tol.equality);
  return rep;
}

double hessian_gap(const DensityField& f, const BakryEmeryParams& params, const Vec& x, const AnalyticFunction& u) {
  params.validate(f);
  if (params.d != x.size()) throw InvalidParams("point dimension must equal d");
  const Eigen::MatrixXd h = u.hessian(x);
  const Vec gu = u.gradient(x), gf = f.gradient(x);
  const double lap = h.trace() - gf.dot(gu);
  if (params.infinite()) return h.squaredNorm();
  double gap = h.squaredNorm() - lap * lap / params.m;
  if (params.m > params.d) gap += gf.dot(gu) * gf.dot(gu) / (params.m - params.d);
  return gap;
}

CheckReport hessian_sample_check(const DensityField& f, const BakryEmeryParams& params, int n_samples,
                                std::uint64_t seed, const Tolerances& tol) {
  params.validate(f);
  const int d = params.d;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  double min_gap = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    Eigen::MatrixXd h(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) h(i, j) = normal(rng);
    Vec g(d), x(d);
    for (int i = 0; i < d; ++i) g[i] = normal(rng);
    for (int i = 0; i < d; ++i) x[i] = box(rng);
    min_gap = std::min(min_gap, hessian_gap(f, params, x, AnalyticFunction::quadratic(h, g, 0.0)));
  }

  // Equality cases: Hess u = lambda I and <grad f, grad u> = -(m - d) lambda.
  double eq_max = 0;
  const int n_eq = 100;
  for (int s = 0; s < n_eq; ++s) {
    const double lambda = params.infinite() ? 0.0 : normal(rng);
    Vec b(d), x(d);
    for (int i = 0; i < d; ++i) b[i] = normal(rng);
    for (int i = 0; i < d; ++i) x[i] = box(rng);
    const AnalyticFunction u = AnalyticFunction::quadratic(lambda * Eigen::MatrixXd::Identity(d, d), b, 0.0);
    DensityField fe = DensityField::constant(0.0);
    if (!params.infinite() && params.m > d) {
      const Vec gu = u.gradient(x);
      fe = DensityField::linear((-(params.m - d) * lambda / gu.squaredNorm()) * gu);
    }
    eq_max = std::max(eq_max, std::abs(hessian_gap(fe, params, x, u)));
  }

  CheckReport rep;
  rep.check = "hessian";
  rep.lhs = 0.0;
  rep.rhs = min_gap;
  rep.details["samples"] = n_samples;
  rep.details["equality_cases"] = n_eq;
  rep.details["equality_max_gap"] = eq_max;
  rep.finalize(tol.pass_tolerance(rep.lhs, rep.rhs), tol.equality);
  if (eq_max >= 1e-10) {
    rep.pass = false;
    rep.status = CheckStatus::fail;
    rep.notes.push_back("equality construction left a gap above 1e-10");
  }
  return rep;
}

CheckReport check_ros(const SimplicialMesh& domain, const DensityField& f, const BakryEmeryParams& params,
                      const Tolerances& tol) {
  if (domain.kind() != CellKind::planar_domain) throw InvalidParams("ros check needs a planar domain");
  return ros_like("ros", domain, f, params, full_boundary(domain, f), tol);
}

CheckReport check_cone(const SimplicialMesh& domain, const DensityField& f, const BakryEmeryParams& params,
                       const Tolerances& tol) {
  if (domain.kind() != CellKind::planar_domain) throw InvalidParams("cone check needs a planar domain");
  if (!domain.cone()) throw InvalidParams("cone check needs a wedge domain with cone information");
  if (domain.cone()->opening_angle > std::numbers::pi + 1e-12) throw NonConvexCone("cone opening exceeds pi");
  if (!domain.has_label(BoundaryLabel::arc)) throw MissingLabels("no arc-labeled boundary");
  CheckReport rep = ros_like("cone", domain, f, params, boundary_geometry(domain, BoundaryLabel::arc, f), tol);
  rep.details["epsilon_vertex"] = domain.cone()->epsilon_vertex;
  rep.details["opening_angle"] = domain.cone()->opening_angle;
  return rep;
}

CheckReport check_linear_isoperimetric(const SimplicialMesh& domain, const DensityField& f,
                                       const BakryEmeryParams& params, const Tolerances& tol) {
  if (domain.kind() != CellKind::planar_domain) throw InvalidParams("linear isoperimetric check needs a planar domain");
  params.validate(f);
  if (domain.cone() && domain.cone()->opening_angle > std::numbers::pi + 1e-12)
    throw NonConvexCone("cone opening exceeds pi");
  const auto m_part = domain.cone() ? boundary_geometry(domain, BoundaryLabel::arc, f) : full_boundary(domain, f);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, area = 0, hsum = 0;
  for (const auto& bv : m_part) {
    const double hf = bv.kappa - f.gradient(domain.vertex(bv.index)).dot(bv.normal);
    lo = std::min(lo, hf);
    hi = std::max(hi, hf);
    area += bv.weighted_dual;
    hsum += hf * bv.weighted_dual;
  }
  const double hmean = hsum / area;
  if (hi - lo > 1e-6 * std::abs(hmean)) throw NotCMC("H_f is not constant along the boundary");
  CheckReport rep;
  rep.check = "linear_isoperimetric";
  rep.lhs = hmean * weighted_measure(domain, f);
  rep.rhs = params.ros_factor() * area;
  rep.details["hf"] = hmean;
  rep.hypotheses["hf_positive"] = lo > 0 ? "ok" : "failed";
  attach_be(rep, domain, f, params);
  rep.finalize(tol.pass_tolerance(rep.lhs, rep.rhs), tol.equality);
  return rep;
}

double unit_sphere_area(int n) {
  const double k = 0.5 * (n + 1);
  return 2.0 * std::pow(std::numbers::pi, k) / std::tgamma(k);
}

CheckReport ball_linear_isoperimetric(int n, double radius, const DensityField& f, const BakryEmeryParams& params,
                                      const Tolerances& tol) {
  if (n < 1 || !(radius > 0)) throw InvalidParams("ball needs n >= 1 and a positive radius");
  if (!f.is_radial()) throw InvalidParams("analytic ball path needs a radial density");
  params.validate(f);
  if (params.d != n + 1) throw InvalidParams("ball in R^(n+1) needs d = n + 1");
  std::vector<double> x, w;
  gauss_legendre(40, 0.0, radius, x, w);
  double vol = 0;
  for (std::size_t i = 0; i < x.size(); ++i) vol += w[i] * std::pow(x[i], n) * std::exp(-f.radial_value(x[i]));
  const double sigma = unit_sphere_area(n);
  vol *= sigma;
  const double area = sigma * std::pow(radius, n) * std::exp(-f.radial_value(radius));
  const double hf = n / radius - f.radial_derivative(radius);
  CheckReport rep;
  rep.check = "ball_linear_isoperimetric";
  rep.lhs = hf * vol;
  rep.rhs = params.ros_factor() * area;
  rep.details["hf"] = hf;
  rep.details["volume"] = vol;
  rep.details["boundary_volume"] = area;
  rep.hypotheses["hf_positive"] = hf > 0 ? "ok" : "failed";
  rep.finalize(tol.pass_tolerance(rep.lhs, rep.rhs), tol.equality);
  return rep;
}

}  // namespace wlab
