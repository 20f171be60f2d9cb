#pragma once

#include <array>
#include <vector>

namespace wlab {

/// Quadrature node in barycentric coordinates; weights of a rule sum to 1
/// and are multiplied by the cell measure by the caller.
struct QuadPoint {
  std::array<double, 3> bary{};
  double weight = 0;
};

/// Gauss-Legendre rule on a segment with 1, 2, 3 or 5 points.
const std::vector<QuadPoint>& segment_rule(int points);

/// Symmetric triangle rule with 1 (degree 1), 3 (degree 2) or 7 (degree 5)
/// points.
const std::vector<QuadPoint>& triangle_rule(int points);

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w);

}  // namespace wlab
