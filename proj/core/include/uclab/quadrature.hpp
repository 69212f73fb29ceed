#pragma once

#include <vector>

#include "uclab/point.hpp"

namespace uclab::quadrature {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]. Cached; safe to call concurrently.
const Rule1D& gauss_legendre(int n);

struct WeightedPoints {
  std::vector<Point> points;
  std::vector<double> weights;
};

/// Product rule on the unit sphere S^{n-1}, n in {2, 3}; weights sum to the
/// surface area. n = 2: `angular`-point trapezoid. n = 3: Gauss-Legendre in
/// cos(theta) (angular / 2 nodes) times trapezoid in phi (angular nodes).
WeightedPoints unit_sphere_rule(int dim, int angular);

/// Radial Gauss-Legendre times unit_sphere_rule; weights sum to the volume.
WeightedPoints unit_ball_rule(int dim, int radial, int angular);

}  // namespace uclab::quadrature
