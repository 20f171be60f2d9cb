#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wlab/spaceform.hpp"

namespace wlab {

enum class CellKind { curve, surface, planar_domain };

const char* to_string(CellKind k);

/// Boundary part of a planar domain: the free hypersurface M (Dirichlet in
/// the mixed problem) or a face of the confining cone (natural condition).
enum class BoundaryLabel : std::uint8_t { arc, cone_face };

const char* to_string(BoundaryLabel l);
BoundaryLabel parse_boundary_label(const std::string& s);

/// Oriented boundary edge of a planar domain; the domain lies to the left.
struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryLabel label = BoundaryLabel::arc;
};

/// Geometry of the solid cone a wedge domain lives in.
struct ConeInfo {
  Vec apex;
  double opening_angle = 0;
  double epsilon_vertex = 0;
};

/// Closed polyline (n = 1), closed triangle surface (n = 2) or planar
/// triangulated domain. Immutable once constructed; the constructor checks
/// the manifold, orientation and cell-quality invariants.
class SimplicialMesh {
 public:
  static constexpr double kDefaultQualityFloor = 1e-3;

  /// `vertices` has one row per vertex. Planar domains are reoriented
  /// counter-clockwise when every triangle is clockwise.
  SimplicialMesh(CellKind kind, Eigen::MatrixXd vertices, Eigen::MatrixXi cells,
                 double quality_floor = kDefaultQualityFloor);

  CellKind kind() const { return kind_; }
  const Eigen::MatrixXd& vertices() const { return vertices_; }
  const Eigen::MatrixXi& cells() const { return cells_; }
  Vec vertex(int i) const { return vertices_.row(i).transpose(); }
  int vertex_count() const { return static_cast<int>(vertices_.rows()); }
  int cell_count() const { return static_cast<int>(cells_.rows()); }
  int ambient_dim() const { return static_cast<int>(vertices_.cols()); }
  int intrinsic_dim() const { return kind_ == CellKind::curve ? 1 : 2; }
  int cell_size() const { return static_cast<int>(cells_.cols()); }
  bool closed() const { return kind_ != CellKind::planar_domain; }

  /// Length or area of a cell.
  double cell_measure(int c) const;
  /// Point of a cell from barycentric weights (third ignored on segments).
  Vec point(int c, const std::array<double, 3>& bary) const;

  /// Smallest inradius/circumradius ratio over triangles (1 for curves).
  double min_quality() const;
  double max_edge_length() const;
  int edge_count() const;
  int euler_characteristic() const;
  /// Sum of cell measures.
  double total_measure() const;

  /// Boundary of a planar domain (empty for closed meshes).
  const std::vector<BoundaryEdge>& boundary() const { return boundary_; }
  /// Per boundary vertex label; vertices touching an arc edge are arc.
  std::map<int, BoundaryLabel> vertex_labels() const;
  /// Labels each boundary edge: arc iff both endpoints are labeled arc.
  void apply_vertex_labels(const std::map<int, BoundaryLabel>& labels);
  void set_edge_labels(const std::vector<BoundaryLabel>& labels);
  bool has_label(BoundaryLabel l) const;

  const std::optional<ConeInfo>& cone() const { return cone_; }
  void set_cone(ConeInfo info) { cone_ = std::move(info); }

  SimplicialMesh translated(const Vec& t) const;
  SimplicialMesh scaled(double s) const;
  /// Same connectivity and labels with new vertex positions.
  SimplicialMesh with_vertices(Eigen::MatrixXd v) const;

 private:
  void validate(double quality_floor);

  CellKind kind_;
  Eigen::MatrixXd vertices_;
  Eigen::MatrixXi cells_;
  std::vector<BoundaryEdge> boundary_;
  std::optional<ConeInfo> cone_;
  double quality_floor_;
};

enum class FieldSource { computed, analytic };

/// Per-vertex extrinsic data of an immersed submanifold M relative to a
/// base point (the center of mass). V denotes H_f - grad f, the weighted
/// mean curvature vector minus the ambient gradient of f, which equals
/// H - (grad f)^T.
struct ImmersionFields {
  Eigen::VectorXd r;
  Eigen::VectorXd f_val;
  /// Scalar H_f with respect to the outward normal (hypersurfaces only).
  std::optional<Eigen::VectorXd> hf_scalar;
  /// |V|^2 >= 0.
  Eigen::VectorXd hf_minus_gradf_sq;
  /// <V, grad r>.
  Eigen::VectorXd v_dot_grad_r;
  /// V and grad r as vectors, when M is embedded in Euclidean space.
  std::optional<Eigen::MatrixXd> v;
  std::optional<Eigen::MatrixXd> grad_r;
  FieldSource source = FieldSource::computed;
};

}  // namespace wlab
