#include "wlab/mesh_gen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>

#include "wlab/errors.hpp"

namespace wlab {

namespace {

using std::numbers::pi;

struct Builder {
  std::vector<Eigen::Vector2d> pts;
  std::vector<Eigen::Vector3i> tris;

  int add(double x, double y) {
    pts.emplace_back(x, y);
    return static_cast<int>(pts.size()) - 1;
  }

  void tri(int a, int b, int c) {
    const Eigen::Vector2d u = pts[b] - pts[a], v = pts[c] - pts[a];
    if (u.x() * v.y() - u.y() * v.x() < 0) std::swap(b, c);
    tris.emplace_back(a, b, c);
  }

  // Strip between two vertex chains parameterized on [0,1]. With `closed`
  // the chains wrap around and their last vertex is the first one again.
  void zip(const std::vector<int>& inner, const std::vector<int>& outer, bool closed) {
    const long p = closed ? static_cast<long>(inner.size()) : static_cast<long>(inner.size()) - 1;
    const long q = closed ? static_cast<long>(outer.size()) : static_cast<long>(outer.size()) - 1;
    auto at = [&](const std::vector<int>& ring, long i) { return ring[i % static_cast<long>(ring.size())]; };
    long i = 0, j = 0;
    while (i < p || j < q) {
      if (j == q || (i < p && (i + 1) * q < (j + 1) * p)) {
        tri(at(inner, i), at(inner, i + 1), at(outer, j));
        ++i;
      } else {
        tri(at(inner, i), at(outer, j + 1), at(outer, j));
        ++j;
      }
    }
  }

  SimplicialMesh build() const {
    Eigen::MatrixXd v(pts.size(), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) v.row(i) = pts[i].transpose();
    Eigen::MatrixXi c(tris.size(), 3);
    for (std::size_t i = 0; i < tris.size(); ++i) c.row(i) = tris[i].transpose();
    return SimplicialMesh(CellKind::planar_domain, std::move(v), std::move(c));
  }
};

SimplicialMesh closed_polyline(const Eigen::MatrixXd& v) {
  const int n = static_cast<int>(v.rows());
  Eigen::MatrixXi c(n, 2);
  for (int i = 0; i < n; ++i) c.row(i) << i, (i + 1) % n;
  return SimplicialMesh(CellKind::curve, v, std::move(c));
}

// Sector mesher. `profile(phi)` is the outer radius at angle phi; rings are
// scaled copies of the outer curve, graded so cells near the apex stay
// shape-regular.
SimplicialMesh gen_sector(const std::function<double(double)>& profile, double ref_radius,
                          double opening_angle, int n_rings, double eps) {
  if (!(opening_angle > 0)) throw DegenerateInput("opening angle must be positive");
  if (opening_angle > pi + 1e-12) throw NonConvexCone("opening angle exceeds pi");
  if (n_rings < 2) throw DegenerateInput("n_rings must be >= 2");
  if (!(eps > 0) || eps >= 0.5 * ref_radius) throw DegenerateInput("vertex cutoff out of range");

  const double h = ref_radius / n_rings;
  const int a_min = std::max(2, static_cast<int>(std::ceil(opening_angle / (pi / 8))));
  auto segments = [&](double r) {
    return std::max(a_min, static_cast<int>(std::ceil(opening_angle * r / h - 1e-9)));
  };

  std::vector<double> radii{eps};
  while (radii.back() < ref_radius) {
    const double r = radii.back();
    const double step = std::min(h, opening_angle * r / segments(r));
    double next = r + step;
    if (ref_radius - next < 0.5 * std::min(h, opening_angle * next / segments(next))) next = ref_radius;
    radii.push_back(next);
  }

  Builder b;
  std::vector<std::vector<int>> rings;
  const double span = ref_radius - eps;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double t = (radii[k] - eps) / span;
    const int a = segments(radii[k]);
    std::vector<int> ring;
    for (int j = 0; j <= a; ++j) {
      const double phi = opening_angle * j / a;
      const double rad = eps + t * (profile(phi) - eps);
      ring.push_back(b.add(rad * std::cos(phi), rad * std::sin(phi)));
    }
    rings.push_back(std::move(ring));
  }
  for (std::size_t k = 1; k < rings.size(); ++k) b.zip(rings[k - 1], rings[k], false);

  SimplicialMesh mesh = b.build();
  std::map<int, BoundaryLabel> labels;
  for (const auto& e : mesh.boundary()) {
    labels[e.a] = BoundaryLabel::cone_face;
    labels[e.b] = BoundaryLabel::cone_face;
  }
  for (int v : rings.back()) labels[v] = BoundaryLabel::arc;
  mesh.apply_vertex_labels(labels);
  mesh.set_cone({Vec::Zero(2), opening_angle, eps});
  return mesh;
}

}  // namespace

SimplicialMesh gen_circle(double radius, int n_segments, const Vec& center) {
  if (!(radius > 0) || n_segments < 8) throw DegenerateInput("gen_circle needs radius > 0 and n_segments >= 8");
  Eigen::MatrixXd v(n_segments, 2);
  for (int i = 0; i < n_segments; ++i) {
    const double t = 2.0 * pi * i / n_segments;
    v.row(i) << radius * std::cos(t), radius * std::sin(t);
  }
  if (center.size() == 2) v.rowwise() += center.transpose();
  return closed_polyline(v);
}

SimplicialMesh gen_ellipse_curve(double a, double b, int n_segments) {
  if (!(a > 0) || !(b > 0) || n_segments < 8) throw DegenerateInput("invalid ellipse parameters");
  Eigen::MatrixXd v(n_segments, 2);
  for (int i = 0; i < n_segments; ++i) {
    const double t = 2.0 * pi * i / n_segments;
    v.row(i) << a * std::cos(t), b * std::sin(t);
  }
  return closed_polyline(v);
}

SimplicialMesh gen_icosphere(double radius, int subdivisions) {
  if (!(radius > 0) || subdivisions < 0 || subdivisions > 8)
    throw DegenerateInput("gen_icosphere needs radius > 0 and 0 <= subdivisions <= 8");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> pts = {{-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0},
                                      {0, -1, t}, {0, 1, t},   {0, -1, -t}, {0, 1, -t},
                                      {t, 0, -1}, {t, 0, 1},   {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : pts) p.normalize();
  std::vector<Eigen::Vector3i> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      pts.push_back((pts[a] + pts[b]).normalized());
      const int idx = static_cast<int>(pts.size()) - 1;
      mid[key] = idx;
      return idx;
    };
    std::vector<Eigen::Vector3i> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int a = midpoint(f[0], f[1]), b = midpoint(f[1], f[2]), c = midpoint(f[2], f[0]);
      next.emplace_back(f[0], a, c);
      next.emplace_back(f[1], b, a);
      next.emplace_back(f[2], c, b);
      next.emplace_back(a, b, c);
    }
    faces = std::move(next);
  }
  Eigen::MatrixXd v(pts.size(), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) v.row(i) = radius * pts[i].transpose();
  Eigen::MatrixXi c(faces.size(), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    Eigen::Vector3i f = faces[i];
    const Eigen::Vector3d n = (pts[f[1]] - pts[f[0]]).cross(pts[f[2]] - pts[f[0]]);
    if (n.dot(pts[f[0]] + pts[f[1]] + pts[f[2]]) < 0) std::swap(f[1], f[2]);
    c.row(i) = f.transpose();
  }
  return SimplicialMesh(CellKind::surface, std::move(v), std::move(c));
}

SimplicialMesh gen_disk(double radius, int n_rings) {
  if (!(radius > 0) || n_rings < 2) throw DegenerateInput("gen_disk needs radius > 0 and n_rings >= 2");
  Builder b;
  std::vector<int> prev{b.add(0, 0)};
  for (int k = 1; k <= n_rings; ++k) {
    const double r = radius * k / n_rings;
    std::vector<int> ring;
    for (int j = 0; j < 6 * k; ++j) {
      const double t = 2.0 * pi * j / (6 * k);
      ring.push_back(b.add(r * std::cos(t), r * std::sin(t)));
    }
    if (k == 1) {
      for (int j = 0; j < 6; ++j) b.tri(prev[0], ring[j], ring[(j + 1) % 6]);
    } else {
      b.zip(prev, ring, true);
    }
    prev = std::move(ring);
  }
  return b.build();
}

SimplicialMesh gen_ellipse(double a, double b, int n_rings) {
  if (!(a > 0) || !(b > 0)) throw DegenerateInput("ellipse semi-axes must be positive");
  const SimplicialMesh disk = gen_disk(1.0, n_rings);
  Eigen::MatrixXd v = disk.vertices();
  v.col(0) *= a;
  v.col(1) *= b;
  return disk.with_vertices(std::move(v));
}

SimplicialMesh gen_annulus(double r_in, double r_out, int n_rings) {
  if (!(r_in > 0) || !(r_out > r_in) || n_rings < 2) throw DegenerateInput("invalid annulus parameters");
  const double h = (r_out - r_in) / n_rings;
  const int count = std::max(8, static_cast<int>(std::ceil(2.0 * pi * r_out / h)));
  Builder b;
  std::vector<int> prev;
  for (int k = 0; k <= n_rings; ++k) {
    const double r = r_in + k * h;
    std::vector<int> ring;
    for (int j = 0; j < count; ++j) {
      const double t = 2.0 * pi * (j + 0.5 * (k % 2)) / count;
      ring.push_back(b.add(r * std::cos(t), r * std::sin(t)));
    }
    if (k > 0) b.zip(prev, ring, true);
    prev = std::move(ring);
  }
  return b.build();
}

SimplicialMesh gen_wedge(double radius, double opening_angle, int n_rings, double eps) {
  if (!(radius > 0)) throw DegenerateInput("wedge radius must be positive");
  if (eps <= 0) eps = 1e-3 * radius;
  return gen_sector([radius](double) { return radius; }, radius, opening_angle, n_rings, eps);
}

SimplicialMesh gen_offcenter_wedge(double arc_radius, const Vec& arc_center, double opening_angle,
                                   int n_rings, double eps) {
  if (arc_center.size() != 2) throw DegenerateInput("arc center must be a planar point");
  if (!(arc_radius > arc_center.norm())) throw DegenerateInput("the apex must lie inside the arc circle");
  const double ref = arc_radius + arc_center.norm();
  if (eps <= 0) eps = 1e-3 * (arc_radius - arc_center.norm());
  const Eigen::Vector2d c = arc_center;
  auto profile = [c, arc_radius](double phi) {
    const double uc = std::cos(phi) * c.x() + std::sin(phi) * c.y();
    return uc + std::sqrt(uc * uc - c.squaredNorm() + arc_radius * arc_radius);
  };
  return gen_sector(profile, ref, opening_angle, n_rings, eps);
}

SimplicialMesh perturb_radially(const SimplicialMesh& mesh, double amplitude, std::uint64_t seed) {
  if (!mesh.closed()) throw InvalidParams("radial perturbation needs a closed mesh");
  if (!(std::abs(amplitude) < 0.5)) throw InvalidParams("perturbation amplitude must be below 0.5");
  const int d = mesh.ambient_dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  struct Mode {
    Vec dir;
    double c2, c3;
  };
  std::vector<Mode> modes(4);
  for (auto& m : modes) {
    m.dir = Vec(d);
    for (int k = 0; k < d; ++k) m.dir[k] = normal(rng);
    m.dir.normalize();
    m.c2 = unit(rng);
    m.c3 = unit(rng);
  }
  const Eigen::MatrixXd& v = mesh.vertices();
  Vec g(mesh.vertex_count());
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const Vec u = v.row(i).transpose().normalized();
    double s = 0;
    for (const auto& m : modes) {
      const double t = u.dot(m.dir);
      s += m.c2 * 0.5 * (3 * t * t - 1) + m.c3 * 0.5 * (5 * t * t * t - 3 * t);
    }
    g[i] = s;
  }
  const double gmax = g.cwiseAbs().maxCoeff();
  if (gmax > 0) g /= gmax;
  Eigen::MatrixXd out = v;
  for (int i = 0; i < mesh.vertex_count(); ++i) out.row(i) *= 1.0 + amplitude * g[i];
  return mesh.with_vertices(std::move(out));
}

GeodesicSphere scaled_sphere_with_analytic_fields(const AmbientSpace& space, double rho, int n,
                                                  int resolution, const DensityField& field) {
  const double delta = space.delta();
  if (!(rho > 0)) throw DomainError("geodesic radius must be positive");
  if (delta > 0 && rho >= pi / (2.0 * std::sqrt(delta)))
    throw DomainError("geodesic radius must stay below pi / (2 sqrt(delta))");
  if (n != 1 && n != 2) throw InvalidParams("geodesic spheres are supported for n = 1 and n = 2");
  if (space.dim() != n + 1) throw InvalidParams("ambient dimension must be n + 1");
  if (!field.is_radial()) throw InvalidParams("geodesic-sphere fields need a radial density");
  if (field.kind() == DensityKind::gaussian &&
      !((field.center().size() == 0 || field.center().isZero(0)) &&
        (field.shift().size() == 0 || field.shift().isZero(0))))
    throw InvalidParams("geodesic-sphere fields need a density centered at the origin");

  const double s = s_delta(delta, rho), c = c_delta(delta, rho);
  SimplicialMesh mesh = n == 1 ? gen_circle(s, resolution) : gen_icosphere(s, resolution);

  const Vec o = space.origin();
  const auto basis = space.tangent_basis(o);
  Eigen::MatrixXd amb(mesh.vertex_count(), space.embedding_dim());
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const Vec u = mesh.vertex(i).normalized();
    Vec t = Vec::Zero(space.embedding_dim());
    for (int k = 0; k <= n; ++k) t += rho * u[k] * basis[k];
    amb.row(i) = space.exp_map(o, t).transpose();
  }

  const int nv = mesh.vertex_count();
  const double h = n * c / s;
  ImmersionFields fields;
  fields.source = FieldSource::analytic;
  fields.r = Vec::Constant(nv, rho);
  fields.f_val = Vec::Constant(nv, field.radial_value(rho));
  fields.hf_scalar = Vec::Constant(nv, h - field.radial_derivative(rho));
  fields.hf_minus_gradf_sq = Vec::Constant(nv, h * h);
  fields.v_dot_grad_r = Vec::Constant(nv, -h);
  return {std::move(mesh), std::move(fields), std::move(amb), rho, n};
}

}  // namespace wlab
