#pragma once

#include <Eigen/Sparse>
#include <optional>
#include <string>
#include <vector>

#include "wlab/density.hpp"
#include "wlab/mesh.hpp"

namespace wlab {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// The weight f of a mesh: an analytic field evaluated at points of the
/// mesh, or per-vertex values of f interpolated linearly (used for
/// intrinsic meshes whose vertices are not ambient points).
class Weight {
 public:
  static Weight field(DensityField f);
  static Weight vertex_values(Eigen::VectorXd f);
  static Weight none() { return field(DensityField::constant(0.0)); }

  bool is_field() const { return field_.has_value(); }
  const DensityField& density() const { return *field_; }

  double f(const SimplicialMesh& mesh, int cell, const std::array<double, 3>& bary) const;
  double f_at_vertex(const SimplicialMesh& mesh, int v) const;

 private:
  std::optional<DensityField> field_;
  Eigen::VectorXd values_;
};

/// Sum over cells of the integral of e^(-f). `quad_points` = 0 selects 3
/// points on triangles and 2 on segments.
double weighted_measure(const SimplicialMesh& mesh, const Weight& w, int quad_points = 0);
double weighted_measure(const SimplicialMesh& mesh, const DensityField& f, int quad_points = 0);

enum class StiffnessDensity { midpoint, matched };

struct AssemblyOptions {
  /// midpoint: e^(-f) at the cell barycenter; matched: the mean of e^(-f)
  /// over the mass quadrature points, so stiffness and mass see the same
  /// cell weight.
  StiffnessDensity density = StiffnessDensity::midpoint;
  int quad_points = 0;
};

/// P1 finite element matrices of the weighted Dirichlet form.
struct OperatorPack {
  SparseMatrix stiffness;
  SparseMatrix mass;
  /// Diagonal mass: the mixed-Voronoi share of w_c |c| per vertex, where
  /// w_c is the stiffness density of cell c.
  Eigen::VectorXd lumped;
  Eigen::VectorXd cell_weight;
  int vertex_count = 0;
};

/// Throws DegenerateCell when a triangle angle is below 1e-6 rad.
OperatorPack assemble(const SimplicialMesh& mesh, const Weight& w, const AssemblyOptions& opts = {});

/// Gradients of the three (or two) hat functions on a cell, one per row.
Eigen::MatrixXd hat_gradients(const SimplicialMesh& mesh, int c);

/// Delta_f u = lumped^-1 (-S u).
Eigen::VectorXd drift_laplacian(const OperatorPack& pack, const Eigen::VectorXd& u);

/// Delta x of the vertex positions with unweighted operators; rows are
/// vertices. Points inward on convex closed meshes.
Eigen::MatrixXd mean_curvature_vector(const SimplicialMesh& mesh);

/// Weighted drift Laplacian of the embedding, Delta_f x, the discrete form
/// of H - (grad f)^T.
Eigen::MatrixXd embedding_drift_laplacian(const SimplicialMesh& mesh, const OperatorPack& pack);

/// Outward unit normals of a closed hypersurface (curve in R^2, surface in
/// R^3); area-weighted for surfaces.
Eigen::MatrixXd vertex_normals(const SimplicialMesh& mesh);

enum class Orientation { outward, inward };

/// H_f = H - <grad f, nu> with H = -<H-vector, nu>, nu outward; negated for
/// the inward orientation.
Eigen::VectorXd weighted_mean_curvature(const SimplicialMesh& mesh, const DensityField& f,
                                        Orientation o = Orientation::outward);

/// |Delta_f x|^2 per vertex, i.e. |H_f - grad f|^2.
Eigen::VectorXd hf_minus_gradf_sq(const SimplicialMesh& mesh, const Weight& w,
                                  const AssemblyOptions& opts = {});

/// Vector field sampled per vertex or per cell (rows).
struct TangentField {
  enum class Location { vertex, cell };
  Location location = Location::cell;
  Eigen::MatrixXd values;
};

/// Cellwise gradient of the P1 interpolant of u.
TangentField tangential_gradient(const SimplicialMesh& mesh, const Eigen::VectorXd& u);

/// Weak weighted divergence: (D_f Y)_i = -(1/lumped_i) sum_c w_c |c| <grad phi_i, Y_c>,
/// with vertex fields averaged over each cell. Throws NonTangent when Y
/// has a normal component above 1e-8 (relative to max(1, |Y|)).
Eigen::VectorXd f_divergence(const SimplicialMesh& mesh, const OperatorPack& pack, const TangentField& y);

/// Geometry of one boundary vertex of a planar domain.
struct BoundaryVertex {
  int index = 0;
  Vec normal;
  Vec tangent;
  /// Signed curvature, positive where the domain is convex.
  double kappa = 0;
  /// Half the length of the adjacent edges carrying the label.
  double dual_length = 0;
  /// Same with the weight e^(-f) (2-point Gauss per edge).
  double weighted_dual = 0;
  bool chain_end = false;
};

/// Boundary vertices touched by edges with the given label. Curvature uses
/// turning angles in the interior of a chain and the circle through the
/// last three vertices at chain ends.
std::vector<BoundaryVertex> boundary_geometry(const SimplicialMesh& mesh, BoundaryLabel label,
                                              const DensityField& f);

void write_matrix_market(const SparseMatrix& m, const std::string& path);

}  // namespace wlab
