#include "wlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "wlab/errors.hpp"

namespace wlab {

const char* to_string(CellKind k) {
  switch (k) {
    case CellKind::curve:
      return "curve";
    case CellKind::surface:
      return "surface";
    case CellKind::planar_domain:
      return "planar-domain";
  }
  return "curve";
}

const char* to_string(BoundaryLabel l) { return l == BoundaryLabel::arc ? "arc" : "cone-face"; }

BoundaryLabel parse_boundary_label(const std::string& s) {
  if (s == "arc") return BoundaryLabel::arc;
  if (s == "cone-face") return BoundaryLabel::cone_face;
  throw InvalidParams("unknown boundary label '" + s + "'");
}

namespace {

using Edge = std::pair<int, int>;

double triangle_area(const Vec& a, const Vec& b, const Vec& c) {
  const Vec u = b - a, v = c - a;
  const double uu = u.squaredNorm(), vv = v.squaredNorm(), uv = u.dot(v);
  return 0.5 * std::sqrt(std::max(0.0, uu * vv - uv * uv));
}

double signed_area_2d(const Vec& a, const Vec& b, const Vec& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

double triangle_quality(const Vec& a, const Vec& b, const Vec& c) {
  const double la = (b - c).norm(), lb = (a - c).norm(), lc = (a - b).norm();
  const double area = triangle_area(a, b, c);
  const double denom = (la + lb + lc) * la * lb * lc;
  return denom > 0 ? 8.0 * area * area / denom : 0.0;
}

}  // namespace

SimplicialMesh::SimplicialMesh(CellKind kind, Eigen::MatrixXd vertices, Eigen::MatrixXi cells,
                               double quality_floor)
    : kind_(kind), vertices_(std::move(vertices)), cells_(std::move(cells)), quality_floor_(quality_floor) {
  validate(quality_floor);
}

void SimplicialMesh::validate(double quality_floor) {
  const int nv = vertex_count();
  const int k = kind_ == CellKind::curve ? 2 : 3;
  if (nv == 0 || cell_count() == 0) throw InvalidTopology("mesh has no vertices or cells");
  if (cells_.cols() != k) throw InvalidTopology("cell arity does not match the mesh kind");
  if (!vertices_.allFinite()) throw InvalidTopology("non-finite vertex coordinate");
  if (kind_ == CellKind::surface && ambient_dim() != 3)
    throw InvalidTopology("surface meshes must live in R^3");
  if (kind_ == CellKind::planar_domain && ambient_dim() != 2)
    throw InvalidTopology("planar domains must live in R^2");
  if (kind_ == CellKind::curve && ambient_dim() < 2) throw InvalidTopology("curves need ambient dim >= 2");

  std::vector<int> used(nv, 0);
  for (int c = 0; c < cell_count(); ++c) {
    std::set<int> distinct;
    for (int j = 0; j < k; ++j) {
      const int v = cells_(c, j);
      if (v < 0 || v >= nv) throw InvalidTopology("cell " + std::to_string(c) + " references a missing vertex");
      ++used[v];
      distinct.insert(v);
    }
    if (static_cast<int>(distinct.size()) != k)
      throw InvalidTopology("cell " + std::to_string(c) + " repeats a vertex");
  }
  for (int v = 0; v < nv; ++v)
    if (used[v] == 0) throw InvalidTopology("vertex " + std::to_string(v) + " is not used by any cell");

  if (kind_ == CellKind::curve) {
    std::vector<int> out(nv, 0), in(nv, 0);
    for (int c = 0; c < cell_count(); ++c) {
      ++out[cells_(c, 0)];
      ++in[cells_(c, 1)];
      if ((vertex(cells_(c, 0)) - vertex(cells_(c, 1))).norm() <= 0)
        throw DegenerateCell("segment " + std::to_string(c) + " has zero length");
    }
    for (int v = 0; v < nv; ++v)
      if (out[v] != 1 || in[v] != 1)
        throw InvalidTopology("curve is not a closed consistently oriented polyline at vertex " +
                              std::to_string(v));
    return;
  }

  if (kind_ == CellKind::planar_domain) {
    int positive = 0, negative = 0;
    for (int c = 0; c < cell_count(); ++c) {
      const double a = signed_area_2d(vertex(cells_(c, 0)), vertex(cells_(c, 1)), vertex(cells_(c, 2)));
      (a > 0 ? positive : negative)++;
    }
    if (positive > 0 && negative > 0) throw InvalidTopology("planar triangles are inconsistently oriented");
    if (negative > 0) cells_.col(1).swap(cells_.col(2));
  }

  std::map<Edge, int> directed;
  for (int c = 0; c < cell_count(); ++c) {
    for (int j = 0; j < 3; ++j) {
      const Edge e{cells_(c, j), cells_(c, (j + 1) % 3)};
      if (++directed[e] > 1)
        throw InvalidTopology("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                              ") is used twice with the same orientation");
    }
  }
  boundary_.clear();
  for (int c = 0; c < cell_count(); ++c) {
    for (int j = 0; j < 3; ++j) {
      const int a = cells_(c, j), b = cells_(c, (j + 1) % 3);
      if (directed.count({b, a})) continue;
      if (kind_ == CellKind::surface)
        throw InvalidTopology("edge (" + std::to_string(a) + "," + std::to_string(b) +
                              ") belongs to a single triangle of a closed surface");
      boundary_.push_back({a, b, BoundaryLabel::arc});
    }
  }
  if (kind_ == CellKind::planar_domain && boundary_.empty())
    throw InvalidTopology("planar domain has no boundary");

  for (int c = 0; c < cell_count(); ++c) {
    const double q = triangle_quality(vertex(cells_(c, 0)), vertex(cells_(c, 1)), vertex(cells_(c, 2)));
    if (q < quality_floor)
      throw DegenerateCell("triangle " + std::to_string(c) + " has quality " + std::to_string(q) +
                           " below the floor");
  }
}

double SimplicialMesh::cell_measure(int c) const {
  if (kind_ == CellKind::curve) return (vertex(cells_(c, 1)) - vertex(cells_(c, 0))).norm();
  return triangle_area(vertex(cells_(c, 0)), vertex(cells_(c, 1)), vertex(cells_(c, 2)));
}

Vec SimplicialMesh::point(int c, const std::array<double, 3>& bary) const {
  Vec p = bary[0] * vertex(cells_(c, 0)) + bary[1] * vertex(cells_(c, 1));
  if (kind_ != CellKind::curve) p += bary[2] * vertex(cells_(c, 2));
  return p;
}

double SimplicialMesh::min_quality() const {
  if (kind_ == CellKind::curve) return 1.0;
  double q = 1.0;
  for (int c = 0; c < cell_count(); ++c)
    q = std::min(q, triangle_quality(vertex(cells_(c, 0)), vertex(cells_(c, 1)), vertex(cells_(c, 2))));
  return q;
}

double SimplicialMesh::max_edge_length() const {
  double h = 0;
  const int k = cell_size();
  for (int c = 0; c < cell_count(); ++c)
    for (int j = 0; j < k; ++j)
      h = std::max(h, (vertex(cells_(c, j)) - vertex(cells_(c, (j + 1) % k))).norm());
  return h;
}

int SimplicialMesh::edge_count() const {
  if (kind_ == CellKind::curve) return cell_count();
  std::set<Edge> edges;
  for (int c = 0; c < cell_count(); ++c)
    for (int j = 0; j < 3; ++j) {
      const int a = cells_(c, j), b = cells_(c, (j + 1) % 3);
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  return static_cast<int>(edges.size());
}

int SimplicialMesh::euler_characteristic() const {
  const int f = kind_ == CellKind::curve ? 0 : cell_count();
  return vertex_count() - edge_count() + f;
}

double SimplicialMesh::total_measure() const {
  double s = 0;
  for (int c = 0; c < cell_count(); ++c) s += cell_measure(c);
  return s;
}

std::map<int, BoundaryLabel> SimplicialMesh::vertex_labels() const {
  std::map<int, BoundaryLabel> labels;
  for (const auto& e : boundary_) {
    for (int v : {e.a, e.b}) {
      auto it = labels.find(v);
      if (it == labels.end())
        labels[v] = e.label;
      else if (e.label == BoundaryLabel::arc)
        it->second = BoundaryLabel::arc;
    }
  }
  return labels;
}

void SimplicialMesh::apply_vertex_labels(const std::map<int, BoundaryLabel>& labels) {
  for (auto& e : boundary_) {
    auto la = labels.find(e.a), lb = labels.find(e.b);
    if (la == labels.end() || lb == labels.end())
      throw MissingLabels("boundary vertex without a label");
    e.label = (la->second == BoundaryLabel::arc && lb->second == BoundaryLabel::arc)
                  ? BoundaryLabel::arc
                  : BoundaryLabel::cone_face;
  }
}

void SimplicialMesh::set_edge_labels(const std::vector<BoundaryLabel>& labels) {
  if (labels.size() != boundary_.size()) throw InvalidParams("one label per boundary edge expected");
  for (std::size_t i = 0; i < labels.size(); ++i) boundary_[i].label = labels[i];
}

bool SimplicialMesh::has_label(BoundaryLabel l) const {
  return std::any_of(boundary_.begin(), boundary_.end(), [&](const auto& e) { return e.label == l; });
}

SimplicialMesh SimplicialMesh::with_vertices(Eigen::MatrixXd v) const {
  if (v.rows() != vertices_.rows()) throw InvalidParams("vertex count mismatch");
  SimplicialMesh m(kind_, std::move(v), cells_, quality_floor_);
  if (m.boundary_.size() == boundary_.size()) m.boundary_ = boundary_;
  m.cone_ = cone_;
  return m;
}

SimplicialMesh SimplicialMesh::translated(const Vec& t) const {
  if (t.size() != ambient_dim()) throw InvalidParams("translation dimension mismatch");
  Eigen::MatrixXd v = vertices_.rowwise() + t.transpose();
  SimplicialMesh m = with_vertices(std::move(v));
  if (m.cone_) m.cone_->apex += t;
  return m;
}

SimplicialMesh SimplicialMesh::scaled(double s) const {
  if (!(s > 0)) throw InvalidParams("scale factor must be positive");
  SimplicialMesh m = with_vertices(vertices_ * s);
  if (m.cone_) {
    m.cone_->apex *= s;
    m.cone_->epsilon_vertex *= s;
  }
  return m;
}

}  // namespace wlab
