#pragma once

#include <cstdint>

#include "wlab/density.hpp"
#include "wlab/mesh.hpp"
#include "wlab/spaceform.hpp"

namespace wlab {

/// Regular polygon inscribed in the circle of the given radius, CCW.
SimplicialMesh gen_circle(double radius, int n_segments, const Vec& center = Vec());
/// Polyline through (a cos t, b sin t) at uniform parameter steps.
SimplicialMesh gen_ellipse_curve(double a, double b, int n_segments);
/// Subdivided icosahedron projected to the sphere, outward orientation.
SimplicialMesh gen_icosphere(double radius, int subdivisions);

/// Disk triangulated by concentric rings; ring k carries 6k vertices.
SimplicialMesh gen_disk(double radius, int n_rings);
/// The disk mesh with x and y scaled by a and b.
SimplicialMesh gen_ellipse(double a, double b, int n_rings);
SimplicialMesh gen_annulus(double r_in, double r_out, int n_rings);

/// Circular sector {0 <= angle <= opening_angle, eps <= r <= radius} with
/// apex at the origin. The outer arc is labeled arc; the two rays and the
/// cutoff ring around the apex are labeled cone-face. A non-positive eps
/// selects 1e-3 radius. Rings are graded toward the apex.
SimplicialMesh gen_wedge(double radius, double opening_angle, int n_rings, double eps = -1);

/// Like gen_wedge, but the outer boundary is the part of the circle of
/// radius `arc_radius` around `arc_center` inside the wedge. The apex must
/// lie inside that circle.
SimplicialMesh gen_offcenter_wedge(double arc_radius, const Vec& arc_center, double opening_angle,
                                   int n_rings, double eps = -1);

/// Closed mesh with every vertex moved along its position vector by a
/// smooth random factor 1 + amplitude * g, max |g| = 1 over the vertices.
SimplicialMesh perturb_radially(const SimplicialMesh& mesh, double amplitude, std::uint64_t seed);

/// Geodesic sphere of a space form, represented intrinsically.
struct GeodesicSphere {
  SimplicialMesh mesh;
  ImmersionFields fields;
  /// Rows: embedding coordinates of exp_origin(rho u) in the model.
  Eigen::MatrixXd ambient_points;
  double rho = 0;
  int n = 1;
};

/// Geodesic sphere of radius rho around the model origin: a round n-sphere
/// of radius s_delta(rho) (n = 1: `resolution` segments; n = 2:
/// `resolution` icosphere subdivisions) with analytic fields. `field` must
/// be constant or radial around the origin.
GeodesicSphere scaled_sphere_with_analytic_fields(const AmbientSpace& space, double rho, int n,
                                                  int resolution, const DensityField& field);

}  // namespace wlab
