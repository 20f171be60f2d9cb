#include "wlab/operators.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <unsupported/Eigen/SparseExtra>

#include "wlab/errors.hpp"
#include "wlab/quadrature.hpp"

namespace wlab {

namespace {

constexpr double kMinAngle = 1e-6;

const std::vector<QuadPoint>& rule_for(const SimplicialMesh& mesh, int quad_points) {
  if (mesh.kind() == CellKind::curve) return segment_rule(quad_points > 0 ? quad_points : 2);
  return triangle_rule(quad_points > 0 ? quad_points : 3);
}

double hat(const std::array<double, 3>& bary, int j) { return bary[j]; }

// Mixed-Voronoi share of the cell measure per corner.
std::array<double, 3> corner_shares(const SimplicialMesh& mesh, int c) {
  const double area = mesh.cell_measure(c);
  if (mesh.kind() == CellKind::curve) return {0.5 * area, 0.5 * area, 0.0};
  const auto& cells = mesh.cells();
  std::array<Vec, 3> p;
  for (int j = 0; j < 3; ++j) p[j] = mesh.vertex(cells(c, j));
  std::array<double, 3> ang{}, cot{};
  for (int j = 0; j < 3; ++j) {
    const Vec u = p[(j + 1) % 3] - p[j], v = p[(j + 2) % 3] - p[j];
    const double cross = std::sqrt(std::max(0.0, u.squaredNorm() * v.squaredNorm() - u.dot(v) * u.dot(v)));
    ang[j] = std::atan2(cross, u.dot(v));
    cot[j] = u.dot(v) / cross;
  }
  for (int j = 0; j < 3; ++j) {
    if (ang[j] > std::numbers::pi / 2) {
      std::array<double, 3> s{0.25 * area, 0.25 * area, 0.25 * area};
      s[j] = 0.5 * area;
      return s;
    }
  }
  std::array<double, 3> s{};
  for (int j = 0; j < 3; ++j) {
    const int a = (j + 1) % 3, b = (j + 2) % 3;
    // Edge j-a is opposite corner b, edge j-b opposite corner a.
    s[j] = ((p[a] - p[j]).squaredNorm() * cot[b] + (p[b] - p[j]).squaredNorm() * cot[a]) / 8.0;
  }
  return s;
}

void check_angles(const SimplicialMesh& mesh, int c) {
  if (mesh.kind() == CellKind::curve) return;
  const auto& cells = mesh.cells();
  for (int j = 0; j < 3; ++j) {
    const Vec u = mesh.vertex(cells(c, (j + 1) % 3)) - mesh.vertex(cells(c, j));
    const Vec v = mesh.vertex(cells(c, (j + 2) % 3)) - mesh.vertex(cells(c, j));
    const double cross = std::sqrt(std::max(0.0, u.squaredNorm() * v.squaredNorm() - u.dot(v) * u.dot(v)));
    if (std::atan2(cross, u.dot(v)) < kMinAngle)
      throw DegenerateCell("triangle " + std::to_string(c) + " has an angle below 1e-6 rad");
  }
}

Vec cell_normal(const SimplicialMesh& mesh, int c) {
  const auto& cells = mesh.cells();
  const Eigen::Vector3d a = mesh.vertex(cells(c, 0)), b = mesh.vertex(cells(c, 1)), d = mesh.vertex(cells(c, 2));
  return (b - a).cross(d - a).normalized();
}

// +1 when the stored orientation of a closed hypersurface is outward.
double orientation_sign(const SimplicialMesh& mesh) {
  const auto& cells = mesh.cells();
  double vol = 0;
  if (mesh.kind() == CellKind::curve) {
    for (int c = 0; c < mesh.cell_count(); ++c) {
      const Vec a = mesh.vertex(cells(c, 0)), b = mesh.vertex(cells(c, 1));
      vol += a[0] * b[1] - a[1] * b[0];
    }
  } else {
    for (int c = 0; c < mesh.cell_count(); ++c) {
      const Eigen::Vector3d a = mesh.vertex(cells(c, 0)), b = mesh.vertex(cells(c, 1)), d = mesh.vertex(cells(c, 2));
      vol += a.dot(b.cross(d));
    }
  }
  return vol >= 0 ? 1.0 : -1.0;
}

void require_hypersurface(const SimplicialMesh& mesh) {
  const bool ok = (mesh.kind() == CellKind::curve && mesh.ambient_dim() == 2) ||
                  (mesh.kind() == CellKind::surface && mesh.ambient_dim() == 3);
  if (!ok) throw InvalidParams("normals need a closed curve in R^2 or a closed surface in R^3");
}

}  // namespace

Weight Weight::field(DensityField f) {
  Weight w;
  w.field_ = std::move(f);
  return w;
}

Weight Weight::vertex_values(Eigen::VectorXd f) {
  Weight w;
  w.values_ = std::move(f);
  return w;
}

double Weight::f(const SimplicialMesh& mesh, int cell, const std::array<double, 3>& bary) const {
  if (field_) return field_->value(mesh.point(cell, bary));
  if (values_.size() != mesh.vertex_count()) throw InvalidParams("per-vertex weight has the wrong length");
  double s = 0;
  for (int j = 0; j < mesh.cell_size(); ++j) s += bary[j] * values_[mesh.cells()(cell, j)];
  return s;
}

double Weight::f_at_vertex(const SimplicialMesh& mesh, int v) const {
  if (field_) return field_->value(mesh.vertex(v));
  if (values_.size() != mesh.vertex_count()) throw InvalidParams("per-vertex weight has the wrong length");
  return values_[v];
}

double weighted_measure(const SimplicialMesh& mesh, const Weight& w, int quad_points) {
  const auto& rule = rule_for(mesh, quad_points);
  double total = 0;
  for (int c = 0; c < mesh.cell_count(); ++c) {
    double s = 0;
    for (const auto& q : rule) s += q.weight * std::exp(-w.f(mesh, c, q.bary));
    total += s * mesh.cell_measure(c);
  }
  return total;
}

double weighted_measure(const SimplicialMesh& mesh, const DensityField& f, int quad_points) {
  return weighted_measure(mesh, Weight::field(f), quad_points);
}

Eigen::MatrixXd hat_gradients(const SimplicialMesh& mesh, int c) {
  const auto& cells = mesh.cells();
  const int d = mesh.ambient_dim();
  if (mesh.kind() == CellKind::curve) {
    const Vec e = mesh.vertex(cells(c, 1)) - mesh.vertex(cells(c, 0));
    Eigen::MatrixXd g(2, d);
    g.row(1) = (e / e.squaredNorm()).transpose();
    g.row(0) = -g.row(1);
    return g;
  }
  const Vec p0 = mesh.vertex(cells(c, 0));
  const Vec e1 = mesh.vertex(cells(c, 1)) - p0, e2 = mesh.vertex(cells(c, 2)) - p0;
  Eigen::Matrix2d gram;
  gram << e1.dot(e1), e1.dot(e2), e1.dot(e2), e2.dot(e2);
  const Eigen::Matrix2d inv = gram.inverse();
  Eigen::MatrixXd g(3, d);
  g.row(1) = (inv(0, 0) * e1 + inv(0, 1) * e2).transpose();
  g.row(2) = (inv(1, 0) * e1 + inv(1, 1) * e2).transpose();
  g.row(0) = -g.row(1) - g.row(2);
  return g;
}

OperatorPack assemble(const SimplicialMesh& mesh, const Weight& w, const AssemblyOptions& opts) {
  const int nv = mesh.vertex_count();
  const int k = mesh.cell_size();
  const auto& cells = mesh.cells();
  const auto& rule = rule_for(mesh, opts.quad_points);
  const std::array<double, 3> centroid =
      k == 2 ? std::array<double, 3>{0.5, 0.5, 0.0} : std::array<double, 3>{1.0 / 3, 1.0 / 3, 1.0 / 3};

  std::vector<Eigen::Triplet<double>> st, mt;
  st.reserve(static_cast<std::size_t>(mesh.cell_count()) * k * k);
  mt.reserve(st.capacity());
  OperatorPack pack;
  pack.vertex_count = nv;
  pack.lumped = Eigen::VectorXd::Zero(nv);
  pack.cell_weight = Eigen::VectorXd::Zero(mesh.cell_count());

  for (int c = 0; c < mesh.cell_count(); ++c) {
    check_angles(mesh, c);
    const double area = mesh.cell_measure(c);
    std::vector<double> wq(rule.size());
    double mean = 0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      wq[q] = std::exp(-w.f(mesh, c, rule[q].bary));
      mean += rule[q].weight * wq[q];
    }
    const double wc = opts.density == StiffnessDensity::matched ? mean : std::exp(-w.f(mesh, c, centroid));
    pack.cell_weight[c] = wc;

    const Eigen::MatrixXd g = hat_gradients(mesh, c);
    const Eigen::MatrixXd local = wc * area * (g * g.transpose());
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        st.emplace_back(cells(c, a), cells(c, b), local(a, b));
        double m = 0;
        for (std::size_t q = 0; q < rule.size(); ++q)
          m += rule[q].weight * wq[q] * hat(rule[q].bary, a) * hat(rule[q].bary, b);
        mt.emplace_back(cells(c, a), cells(c, b), m * area);
      }
    }
    const auto share = corner_shares(mesh, c);
    for (int a = 0; a < k; ++a) pack.lumped[cells(c, a)] += wc * share[a];
  }
  pack.stiffness.resize(nv, nv);
  pack.stiffness.setFromTriplets(st.begin(), st.end());
  pack.mass.resize(nv, nv);
  pack.mass.setFromTriplets(mt.begin(), mt.end());
  // Exact symmetry regardless of summation order.
  SparseMatrix sym = SparseMatrix(pack.stiffness.transpose());
  pack.stiffness = 0.5 * (pack.stiffness + sym);
  return pack;
}

Eigen::VectorXd drift_laplacian(const OperatorPack& pack, const Eigen::VectorXd& u) {
  return -(pack.stiffness * u).cwiseQuotient(pack.lumped);
}

Eigen::MatrixXd embedding_drift_laplacian(const SimplicialMesh& mesh, const OperatorPack& pack) {
  Eigen::MatrixXd v = -(pack.stiffness * mesh.vertices());
  for (int i = 0; i < v.rows(); ++i) v.row(i) /= pack.lumped[i];
  return v;
}

Eigen::MatrixXd mean_curvature_vector(const SimplicialMesh& mesh) {
  return embedding_drift_laplacian(mesh, assemble(mesh, Weight::none()));
}

Eigen::MatrixXd vertex_normals(const SimplicialMesh& mesh) {
  require_hypersurface(mesh);
  const auto& cells = mesh.cells();
  const double sign = orientation_sign(mesh);
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(mesh.vertex_count(), mesh.ambient_dim());
  for (int c = 0; c < mesh.cell_count(); ++c) {
    Vec nc;
    if (mesh.kind() == CellKind::curve) {
      const Vec e = mesh.vertex(cells(c, 1)) - mesh.vertex(cells(c, 0));
      nc = Vec(2);
      nc << e[1], -e[0];
      nc.normalize();
    } else {
      nc = cell_normal(mesh, c);
    }
    nc *= sign * mesh.cell_measure(c);
    for (int j = 0; j < mesh.cell_size(); ++j) n.row(cells(c, j)) += nc.transpose();
  }
  for (int i = 0; i < n.rows(); ++i) n.row(i).normalize();
  return n;
}

Eigen::VectorXd weighted_mean_curvature(const SimplicialMesh& mesh, const DensityField& f, Orientation o) {
  const Eigen::MatrixXd hv = mean_curvature_vector(mesh);
  const Eigen::MatrixXd nu = vertex_normals(mesh);
  Eigen::VectorXd h(mesh.vertex_count());
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const Vec n = nu.row(i).transpose();
    h[i] = -hv.row(i).dot(n) - f.gradient(mesh.vertex(i)).dot(n);
  }
  return o == Orientation::outward ? h : Eigen::VectorXd(-h);
}

Eigen::VectorXd hf_minus_gradf_sq(const SimplicialMesh& mesh, const Weight& w, const AssemblyOptions& opts) {
  return embedding_drift_laplacian(mesh, assemble(mesh, w, opts)).rowwise().squaredNorm();
}

TangentField tangential_gradient(const SimplicialMesh& mesh, const Eigen::VectorXd& u) {
  TangentField t;
  t.location = TangentField::Location::cell;
  t.values = Eigen::MatrixXd::Zero(mesh.cell_count(), mesh.ambient_dim());
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const Eigen::MatrixXd g = hat_gradients(mesh, c);
    for (int j = 0; j < mesh.cell_size(); ++j) t.values.row(c) += u[mesh.cells()(c, j)] * g.row(j);
  }
  return t;
}

Eigen::VectorXd f_divergence(const SimplicialMesh& mesh, const OperatorPack& pack, const TangentField& y) {
  const bool per_vertex = y.location == TangentField::Location::vertex;
  const int rows = per_vertex ? mesh.vertex_count() : mesh.cell_count();
  if (y.values.rows() != rows || y.values.cols() != mesh.ambient_dim())
    throw InvalidParams("tangent field has the wrong shape");

  auto require_tangent = [](const Vec& v, const Vec& n) {
    if (std::abs(v.dot(n)) > 1e-8 * std::max(1.0, v.norm())) throw NonTangent("vector field is not tangent");
  };
  if (mesh.kind() != CellKind::planar_domain) {
    if (per_vertex) {
      const Eigen::MatrixXd nu = vertex_normals(mesh);
      for (int i = 0; i < rows; ++i) require_tangent(y.values.row(i).transpose(), nu.row(i).transpose());
    } else {
      for (int c = 0; c < rows; ++c) {
        if (mesh.kind() == CellKind::curve) {
          const Vec e = mesh.vertex(mesh.cells()(c, 1)) - mesh.vertex(mesh.cells()(c, 0));
          const Vec yc = y.values.row(c).transpose();
          const Vec normal_part = yc - (yc.dot(e) / e.squaredNorm()) * e;
          if (normal_part.norm() > 1e-8 * std::max(1.0, yc.norm())) throw NonTangent("vector field is not tangent");
        } else {
          require_tangent(y.values.row(c).transpose(), cell_normal(mesh, c));
        }
      }
    }
  }

  Eigen::VectorXd div = Eigen::VectorXd::Zero(mesh.vertex_count());
  const int k = mesh.cell_size();
  for (int c = 0; c < mesh.cell_count(); ++c) {
    Vec yc = Vec::Zero(mesh.ambient_dim());
    if (per_vertex) {
      for (int j = 0; j < k; ++j) yc += y.values.row(mesh.cells()(c, j)).transpose();
      yc /= k;
    } else {
      yc = y.values.row(c).transpose();
    }
    const Eigen::MatrixXd g = hat_gradients(mesh, c);
    const double wa = pack.cell_weight[c] * mesh.cell_measure(c);
    for (int j = 0; j < k; ++j) div[mesh.cells()(c, j)] -= wa * g.row(j).dot(yc);
  }
  return div.cwiseQuotient(pack.lumped);
}

std::vector<BoundaryVertex> boundary_geometry(const SimplicialMesh& mesh, BoundaryLabel label,
                                              const DensityField& f) {
  if (mesh.kind() != CellKind::planar_domain) throw InvalidParams("boundary geometry needs a planar domain");
  std::map<int, int> next, prev;
  std::map<int, double> wdual;
  const auto& rule = segment_rule(2);
  for (const auto& e : mesh.boundary()) {
    if (e.label != label) continue;
    next[e.a] = e.b;
    prev[e.b] = e.a;
    const Vec pa = mesh.vertex(e.a), pb = mesh.vertex(e.b);
    const double len = (pb - pa).norm();
    for (const auto& q : rule) {
      const Vec x = q.bary[0] * pa + q.bary[1] * pb;
      const double wf = std::exp(-f.value(x)) * q.weight * len;
      wdual[e.a] += wf * q.bary[0];
      wdual[e.b] += wf * q.bary[1];
    }
  }
  auto rot = [](const Vec& t) {
    Vec n(2);
    n << t[1], -t[0];
    return n;
  };

  std::vector<BoundaryVertex> out;
  for (const auto& [v, wd] : wdual) {
    BoundaryVertex bv;
    bv.index = v;
    bv.weighted_dual = wd;
    const Vec p = mesh.vertex(v);
    const auto in = prev.find(v), on = next.find(v);
    if (in != prev.end() && on != next.end()) {
      const Vec a = mesh.vertex(in->second), b = mesh.vertex(on->second);
      const Vec t_in = (p - a).normalized(), t_out = (b - p).normalized();
      bv.dual_length = 0.5 * ((p - a).norm() + (b - p).norm());
      bv.tangent = (t_in + t_out).normalized();
      bv.normal = rot(bv.tangent);
      bv.kappa = -(t_out - t_in).dot(bv.normal) / bv.dual_length;
    } else {
      bv.chain_end = true;
      // Walk two steps along the chain away from the end.
      const bool at_start = in == prev.end();
      const auto& step = at_start ? next : prev;
      const int n1 = step.at(v);
      const auto it2 = step.find(n1);
      bv.dual_length = 0.5 * (mesh.vertex(n1) - p).norm();
      Vec edge_t = at_start ? Vec((mesh.vertex(n1) - p).normalized()) : Vec((p - mesh.vertex(n1)).normalized());
      bv.tangent = edge_t;
      bv.normal = rot(edge_t);
      bv.kappa = 0;
      if (it2 != step.end() && it2->second != v) {
        // Chain order a -> b -> c in traversal direction.
        const Vec a = at_start ? p : mesh.vertex(it2->second);
        const Vec b = mesh.vertex(n1);
        const Vec c = at_start ? mesh.vertex(it2->second) : p;
        const Vec ab = b - a, bc = c - b, ac = c - a;
        const double cross = ab[0] * bc[1] - ab[1] * bc[0];
        // Signed curvature of the circumcircle, positive for left turns.
        bv.kappa = 2.0 * cross / (ab.norm() * bc.norm() * ac.norm());
        if (std::abs(bv.kappa) > 1e-12) {
          // Circumcenter from the perpendicular bisector equations.
          Eigen::Matrix2d m;
          m << ab[0], ab[1], ac[0], ac[1];
          Eigen::Vector2d rhs(0.5 * ab.squaredNorm(), 0.5 * ac.squaredNorm());
          const Vec center = a + Vec(m.inverse() * rhs);
          Vec radial = (p - center).normalized();
          bv.normal = bv.kappa > 0 ? radial : Vec(-radial);
          bv.tangent = Vec(2);
          bv.tangent << -bv.normal[1], bv.normal[0];
        }
      }
    }
    out.push_back(std::move(bv));
  }
  return out;
}

void write_matrix_market(const SparseMatrix& m, const std::string& path) {
  if (!Eigen::saveMarket(m, path)) throw InvalidParams("cannot write " + path);
}

}  // namespace wlab
