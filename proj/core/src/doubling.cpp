#include "uclab/doubling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uclab/error.hpp"
#include "uclab/parallel.hpp"

namespace uclab::doubling {

using harmonic::Ball;
using harmonic::EstimateMode;
using harmonic::NormEstimate;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_radius(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("radius must be positive and finite");
}

// log(a / b) with a two-sided enclosure from the estimates' error bounds.
std::pair<double, double> log_ratio(const NormEstimate& a, const NormEstimate& b) {
  if (b.value < kVanishing) {
    throw VanishingGradient("denominator norm below 1e-30: gradient vanishes near the centre");
  }
  const double value = std::log(a.value / b.value);
  if (a.error_bound == 0.0 && b.error_bound == 0.0) return {value, 0.0};
  const double hi = b.lower() > 0.0 ? std::log(a.upper() / b.lower()) : kInf;
  const double lo = a.lower() > 0.0 ? std::log(a.lower() / b.upper()) : -kInf;
  return {value, std::max(hi - value, value - lo)};
}

double log_error(const NormEstimate& e) {
  if (e.error_bound == 0.0) return 0.0;
  return e.lower() > 0.0 ? std::log(e.upper() / e.lower()) : kInf;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::sup_ratio: return "sup_ratio";
    case Variant::l2_ratio: return "l2_ratio";
    case Variant::maximal_cube: return "maximal_cube";
  }
  return "?";
}

std::string to_string(CubeClass c) {
  switch (c) {
    case CubeClass::good: return "good";
    case CubeClass::bad: return "bad";
    case CubeClass::undecided: return "undecided";
  }
  return "?";
}

DoublingReport doubling_index(const HarmonicFunction& u, const Point& x, double r,
                              const harmonic::SupOptions& opt, double ratio) {
  check_radius(r);
  if (!(ratio > 1.0)) throw InvalidArgument("doubling ratio must exceed 1");
  const auto outer = harmonic::sup_grad(u, Ball(x, ratio * r), opt);
  const auto inner = harmonic::sup_grad(u, Ball(x, r), opt);
  const auto [value, err] = log_ratio(outer, inner);
  DoublingReport rep;
  rep.center = x;
  rep.radius = r;
  rep.index_value = value;
  rep.error_bound = err;
  rep.variant = Variant::sup_ratio;
  rep.ratio = ratio;
  rep.tolerance = opt.tolerance;
  rep.samples = 1;
  return rep;
}

DoublingReport l2_doubling_index(const HarmonicFunction& u, const Point& x, double r,
                                 const harmonic::QuadratureOptions& opt) {
  check_radius(r);
  const auto outer = harmonic::mean_square_grad(u, Ball(x, 2.0 * r), opt);
  const auto inner = harmonic::mean_square_grad(u, Ball(x, r), opt);
  const auto [value, err] = log_ratio(outer, inner);
  DoublingReport rep;
  rep.center = x;
  rep.radius = r;
  rep.index_value = value;
  rep.error_bound = err;
  rep.variant = Variant::l2_ratio;
  rep.tolerance = opt.tolerance;
  rep.samples = 1;
  return rep;
}

std::vector<double> default_ladder(double side, int rungs) {
  if (rungs < 1) throw InvalidArgument("ladder needs at least one rung");
  std::vector<double> out;
  for (int k = 0; k < rungs; ++k) out.push_back(std::ldexp(side, -k));
  return out;
}

namespace {

std::vector<Point> cube_grid(const lattice::Cube& q, int density) {
  if (density < 1) throw InvalidArgument("grid density must be positive");
  const int n = q.dim();
  const Point lo = q.lo();
  const double h = q.side() / density;
  std::vector<Point> pts;
  std::vector<int> k(static_cast<std::size_t>(n), 0);
  while (true) {
    Point p(n);
    for (int i = 0; i < n; ++i) p[i] = lo[i] + (k[static_cast<std::size_t>(i)] + 0.5) * h;
    pts.push_back(p);
    int ax = n - 1;
    while (ax >= 0 && ++k[static_cast<std::size_t>(ax)] == density) k[static_cast<std::size_t>(ax--)] = 0;
    if (ax < 0) break;
  }
  return pts;
}

double resolve_ratio(const MaximalOptions& opt, int n) {
  const double L = opt.ratio > 0.0 ? opt.ratio : 10.0 * n;
  if (!(L > 1.0)) throw InvalidArgument("maximal doubling ratio must exceed 1");
  return L;
}

std::vector<double> resolve_ladder(const MaximalOptions& opt, double side) {
  auto ladder = opt.ladder.empty() ? default_ladder(side, opt.rungs) : opt.ladder;
  for (double r : ladder) {
    check_radius(r);
    if (r > side * (1.0 + 1e-12)) throw InvalidArgument("ladder radius exceeds the cube side");
  }
  return ladder;
}

}  // namespace

DoublingReport maximal_doubling(const HarmonicFunction& u, const lattice::Cube& q,
                                const MaximalOptions& opt) {
  const double L = resolve_ratio(opt, q.dim());
  const auto ladder = resolve_ladder(opt, q.side());
  const auto grid = cube_grid(q, opt.grid_density);
  const std::size_t total = grid.size() * ladder.size();
  const auto lows = parallel_map(total, opt.workers, [&](std::size_t i) {
    const auto& x = grid[i % grid.size()];
    const double r = ladder[i / grid.size()];
    return doubling_index(u, x, r, opt.sup, L).lower();
  });
  DoublingReport rep;
  rep.center = q.center();
  rep.radius = q.side();
  rep.index_value = *std::max_element(lows.begin(), lows.end());
  rep.error_bound = 0.0;
  rep.variant = Variant::maximal_cube;
  rep.ratio = L;
  rep.tolerance = opt.sup.tolerance;
  rep.grid_density = opt.grid_density;
  rep.ladder = ladder;
  rep.samples = static_cast<int>(total);
  rep.is_lower_bound = true;
  return rep;
}

ThreeSpheres three_spheres_defect(const HarmonicFunction& u, const Point& x, double r1, double r2,
                                  double r3, const harmonic::QuadratureOptions& opt) {
  check_radius(r1);
  if (!(r1 <= r2 && r2 <= r3 && r1 < r3)) throw InvalidArgument("radii must satisfy r1 <= r2 <= r3, r1 < r3");
  ThreeSpheres out;
  out.alpha = std::log(r3 / r2) / std::log(r3 / r1);
  const auto n1 = harmonic::sphere_l2_norm(u, Ball(x, r1), opt);
  const auto n2 = r2 == r1 ? n1 : harmonic::sphere_l2_norm(u, Ball(x, r2), opt);
  const auto n3 = r3 == r2 ? n2 : harmonic::sphere_l2_norm(u, Ball(x, r3), opt);
  for (const auto* e : {&n1, &n2, &n3}) {
    if (e->value < kVanishing) throw VanishingGradient("sphere norm below 1e-30");
  }
  out.norms[0] = n1.value;
  out.norms[1] = n2.value;
  out.norms[2] = n3.value;
  if (r2 == r1) {
    out.defect = 0.0;
    return out;
  }
  out.defect = std::log(n2.value) - out.alpha * std::log(n1.value) -
               (1.0 - out.alpha) * std::log(n3.value);
  out.error_bound = log_error(n2) + out.alpha * log_error(n1) + (1.0 - out.alpha) * log_error(n3);
  return out;
}

BigScaleReport big_scale_doubling_check(const HarmonicFunction& u, const Point& x, double r,
                                        double t, double threshold, double slack,
                                        const harmonic::SupOptions& opt) {
  check_radius(r);
  if (!(t > 0.0 && t < 0.5)) throw InvalidArgument("t must lie in (0, 1/2)");
  BigScaleReport rep;
  rep.threshold = threshold;
  rep.slack = slack;
  rep.doubling = doubling_index(u, x, t * r, opt);
  if (rep.doubling.index_value < threshold) return rep;
  rep.applicable = true;
  const auto small = harmonic::sup_grad(u, Ball(x, t * r), opt);
  const auto big = harmonic::sup_grad(u, Ball(x, r), opt);
  const auto [lr, err] = log_ratio(small, big);
  const double lt = std::log(t);
  rep.exponent = lr / lt;
  rep.exponent_error = err / -lt;
  rep.holds = rep.exponent >= threshold / 6.0 - slack;
  return rep;
}

double almost_monotonicity_excess(const HarmonicFunction& u, const Point& x, double r, double theta,
                                  const harmonic::SupOptions& opt) {
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidArgument("theta must lie in (0, 1)");
  const auto small = doubling_index(u, x, theta * r, opt);
  const auto big = doubling_index(u, x, r, opt);
  // worst case over the enclosures
  return small.upper() - 2.0 * big.lower();
}

Classification classify_cube(const HarmonicFunction& u, const lattice::Cube& q, double N,
                             const ClassifyOptions& opt) {
  if (!(N > 0.0)) throw InvalidArgument("threshold N must be positive");
  const auto& mo = opt.maximal;
  const double L = resolve_ratio(mo, q.dim());
  const auto ladder = resolve_ladder(mo, q.side());
  const auto grid = cube_grid(q, mo.grid_density);
  const double margin = opt.margin_fraction * N;
  Classification out;
  out.lower = -kInf;
  // rung by rung so the witness does not depend on scheduling
  for (double r : ladder) {
    const auto lows = parallel_map(grid.size(), mo.workers, [&](std::size_t i) {
      return doubling_index(u, grid[i], r, mo.sup, L).lower();
    });
    out.samples += static_cast<int>(grid.size());
    out.lower = std::max(out.lower, *std::max_element(lows.begin(), lows.end()));
    if (out.lower > N + margin) {
      out.cls = CubeClass::bad;
      out.upper = kInf;
      return out;
    }
  }
  const auto primary = doubling_index(u, q.center(), q.side(), mo.sup, L);
  ++out.samples;
  out.upper = opt.comparability_scale * primary.upper() + opt.comparability_offset;
  out.cls = out.upper < N - margin ? CubeClass::good : CubeClass::undecided;
  return out;
}

}  // namespace uclab::doubling
