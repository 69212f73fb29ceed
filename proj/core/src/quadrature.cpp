#include "uclab/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "uclab/error.hpp"

namespace uclab::quadrature {

namespace {

Rule1D compute_gauss_legendre(int n) {
  Rule1D rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

}  // namespace

const Rule1D& gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre order must be positive");
  if (n == 1) {
    static const Rule1D one{{0.0}, {2.0}};
    return one;
  }
  static std::mutex mu;
  static std::map<int, std::unique_ptr<Rule1D>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Rule1D>(compute_gauss_legendre(n));
  return *slot;
}

WeightedPoints unit_sphere_rule(int dim, int angular) {
  if (angular < 2) throw InvalidArgument("angular node count must be >= 2");
  WeightedPoints out;
  const double two_pi = 2.0 * std::numbers::pi;
  if (dim == 2) {
    for (int k = 0; k < angular; ++k) {
      const double t = two_pi * k / angular;
      out.points.push_back(Point{std::cos(t), std::sin(t)});
      out.weights.push_back(two_pi / angular);
    }
    return out;
  }
  if (dim == 3) {
    const auto& gl = gauss_legendre(std::max(2, angular / 2));
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double ct = gl.nodes[i];
      const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      for (int k = 0; k < angular; ++k) {
        const double p = two_pi * k / angular;
        out.points.push_back(Point{st * std::cos(p), st * std::sin(p), ct});
        out.weights.push_back(gl.weights[i] * two_pi / angular);
      }
    }
    return out;
  }
  throw InvalidArgument("sphere quadrature implemented for n = 2, 3 only");
}

WeightedPoints unit_ball_rule(int dim, int radial, int angular) {
  const WeightedPoints sphere = unit_sphere_rule(dim, angular);
  const auto& gl = gauss_legendre(radial);
  WeightedPoints out;
  out.points.reserve(sphere.points.size() * gl.nodes.size());
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double r = 0.5 * (gl.nodes[i] + 1.0);
    const double wr = 0.5 * gl.weights[i] * std::pow(r, dim - 1);
    for (std::size_t k = 0; k < sphere.points.size(); ++k) {
      out.points.push_back(sphere.points[k] * r);
      out.weights.push_back(wr * sphere.weights[k]);
    }
  }
  return out;
}

}  // namespace uclab::quadrature
