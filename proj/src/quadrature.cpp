#include "wlab/quadrature.hpp"

#include <cmath>

#include "wlab/errors.hpp"

namespace wlab {

namespace {

std::vector<QuadPoint> segment_from_gauss(int n) {
  std::vector<double> x, w;
  gauss_legendre(n, 0.0, 1.0, x, w);
  std::vector<QuadPoint> rule;
  for (int i = 0; i < n; ++i) rule.push_back({{1.0 - x[i], x[i], 0.0}, w[i]});
  return rule;
}

std::vector<QuadPoint> radon7() {
  const double s15 = std::sqrt(15.0);
  const double a = (6.0 - s15) / 21.0;
  const double b = (6.0 + s15) / 21.0;
  const double wa = (155.0 - s15) / 1200.0;
  const double wb = (155.0 + s15) / 1200.0;
  return {{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 9.0 / 40.0},
          {{a, a, 1 - 2 * a}, wa},
          {{a, 1 - 2 * a, a}, wa},
          {{1 - 2 * a, a, a}, wa},
          {{b, b, 1 - 2 * b}, wb},
          {{b, 1 - 2 * b, b}, wb},
          {{1 - 2 * b, b, b}, wb}};
}

}  // namespace

void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw InvalidParams("Gauss-Legendre needs at least one node");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n == 1 ? 1.0 : n * (z * p1 - p0) / (z * z - 1.0);
    }
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    x[n - 1 - i] = 0.5 * (a + b) + 0.5 * (b - a) * z;
    w[n - 1 - i] = 0.5 * (b - a) * wi;
  }
}

const std::vector<QuadPoint>& segment_rule(int points) {
  static const std::vector<QuadPoint> g1 = segment_from_gauss(1);
  static const std::vector<QuadPoint> g2 = segment_from_gauss(2);
  static const std::vector<QuadPoint> g3 = segment_from_gauss(3);
  static const std::vector<QuadPoint> g5 = segment_from_gauss(5);
  switch (points) {
    case 1:
      return g1;
    case 2:
      return g2;
    case 3:
      return g3;
    case 5:
      return g5;
    default:
      throw InvalidParams("segment quadrature supports 1, 2, 3 or 5 points");
  }
}

const std::vector<QuadPoint>& triangle_rule(int points) {
  static const std::vector<QuadPoint> t1 = {{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 1.0}};
  static const std::vector<QuadPoint> t3 = {{{0.5, 0.5, 0.0}, 1.0 / 3},
                                            {{0.0, 0.5, 0.5}, 1.0 / 3},
                                            {{0.5, 0.0, 0.5}, 1.0 / 3}};
  static const std::vector<QuadPoint> t7 = radon7();
  switch (points) {
    case 1:
      return t1;
    case 3:
      return t3;
    case 7:
      return t7;
    default:
      throw InvalidParams("triangle quadrature supports 1, 3 or 7 points");
  }
}

}  // namespace wlab
