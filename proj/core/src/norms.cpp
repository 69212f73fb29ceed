#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <queue>
#include <sstream>

#include "uclab/error.hpp"
#include "uclab/harmonic.hpp"
#include "uclab/quadrature.hpp"

namespace uclab::harmonic {

Ball::Ball(Point c, double r) : center(c), radius(r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("ball radius must be positive");
}

AxisCube::AxisCube(Point c, double s) : center(c), side(s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("cube side must be positive");
}

Point AxisCube::lo() const { return center - Point::filled(center.dim(), 0.5 * side); }
Point AxisCube::hi() const { return center + Point::filled(center.dim(), 0.5 * side); }

std::string to_string(EstimateMode m) {
  switch (m) {
    case EstimateMode::exact: return "exact";
    case EstimateMode::sampled: return "sampled";
    case EstimateMode::certified: return "certified";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

struct Patch {
  std::array<double, kMaxDim> lo{};
  std::array<double, kMaxDim> hi{};
  int face = 0;
  int depth = 0;
  double value = 0.0;
  double upper = 0.0;
};

/// Parametrised boundary of a region, cut into rectangular parameter patches.
class Surface {
 public:
  virtual ~Surface() = default;
  virtual int param_dim() const = 0;
  virtual std::vector<Patch> initial() const = 0;
  virtual Point map(const Patch& p) const = 0;
  /// Upper bound on |y - map(p)| over points y of the patch.
  virtual double radius(const Patch& p) const = 0;
  /// Upper bound on sup (y - sample) . w over the patch.
  virtual double linear_max(const Patch& p, const Point& sample, const Point& w) const = 0;
};

double mid(const Patch& p, int i) { return 0.5 * (p.lo[i] + p.hi[i]); }
double half(const Patch& p, int i) { return 0.5 * (p.hi[i] - p.lo[i]); }

class SphereSurface : public Surface {
 public:
  SphereSurface(const Ball& b) : c_(b.center), r_(b.radius), n_(b.center.dim()) {
    if (n_ != 2 && n_ != 3) throw InvalidArgument("ball regions supported for n = 2, 3");
  }
  int param_dim() const override { return n_ - 1; }
  std::vector<Patch> initial() const override {
    std::vector<Patch> out;
    if (n_ == 2) {
      for (int k = 0; k < 8; ++k) {
        Patch p;
        p.lo[0] = 2.0 * kPi * k / 8;
        p.hi[0] = 2.0 * kPi * (k + 1) / 8;
        out.push_back(p);
      }
    } else {
      for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 8; ++k) {
          Patch p;
          p.lo[0] = kPi * i / 4;
          p.hi[0] = kPi * (i + 1) / 4;
          p.lo[1] = 2.0 * kPi * k / 8;
          p.hi[1] = 2.0 * kPi * (k + 1) / 8;
          out.push_back(p);
        }
      }
    }
    return out;
  }
  Point map(const Patch& p) const override {
    if (n_ == 2) {
      const double t = mid(p, 0);
      return c_ + Point{std::cos(t), std::sin(t)} * r_;
    }
    const double th = mid(p, 0);
    const double ph = mid(p, 1);
    return c_ + Point{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)} * r_;
  }
  double radius(const Patch& p) const override {
    if (n_ == 2) return r_ * half(p, 0);
    // meridian then parallel: geodesic <= dtheta + max sin(theta) * dphi
    double max_sin = std::max(std::sin(p.lo[0]), std::sin(p.hi[0]));
    if (p.lo[0] <= 0.5 * kPi && p.hi[0] >= 0.5 * kPi) max_sin = 1.0;
    return r_ * (half(p, 0) + max_sin * half(p, 1));
  }
  double linear_max(const Patch& p, const Point& sample, const Point& w) const override {
    const double rho = radius(p);
    const Point normal = (sample - c_) * (1.0 / r_);
    const double wn = w.dot(normal);
    const double wt = std::sqrt(std::max(0.0, w.norm2() - wn * wn));
    // (y - s) . normal = -|y - s|^2 / (2R) on the sphere
    return rho * wt + std::max(0.0, -wn) * rho * rho / (2.0 * r_);
  }

 private:
  Point c_;
  double r_;
  int n_;
};

class CubeSurface : public Surface {
 public:
  CubeSurface(const AxisCube& q) : c_(q.center), s_(q.side), n_(q.center.dim()) {}
  int param_dim() const override { return n_ - 1; }
  std::vector<Patch> initial() const override {
    std::vector<Patch> out;
    for (int f = 0; f < 2 * n_; ++f) {
      Patch p;
      p.face = f;
      for (int i = 0; i < n_ - 1; ++i) {
        p.lo[i] = -0.5 * s_;
        p.hi[i] = 0.5 * s_;
      }
      out.push_back(p);
    }
    return out;
  }
  Point map(const Patch& p) const override {
    const int axis = p.face / 2;
    Point x = c_;
    x[axis] += (p.face % 2 == 0 ? -0.5 : 0.5) * s_;
    int k = 0;
    for (int i = 0; i < n_; ++i) {
      if (i == axis) continue;
      x[i] += mid(p, k++);
    }
    return x;
  }
  double radius(const Patch& p) const override {
    double s = 0.0;
    for (int i = 0; i < n_ - 1; ++i) s += half(p, i) * half(p, i);
    return std::sqrt(s);
  }
  double linear_max(const Patch& p, const Point&, const Point& w) const override {
    const int axis = p.face / 2;
    double s = 0.0;
    int k = 0;
    for (int i = 0; i < n_; ++i) {
      if (i == axis) continue;
      s += half(p, k++) * std::abs(w[i]);
    }
    return s;
  }

 private:
  Point c_;
  double s_;
  int n_;
};

// The (n-1)-box {x_axis = center[axis]} inside an axis cube.
class SliceSurface : public Surface {
 public:
  SliceSurface(const AxisCube& q, int axis) : c_(q.center), s_(q.side), n_(q.center.dim()), axis_(axis) {}
  int param_dim() const override { return n_ - 1; }
  std::vector<Patch> initial() const override {
    Patch p;
    for (int i = 0; i < n_ - 1; ++i) {
      p.lo[i] = -0.5 * s_;
      p.hi[i] = 0.5 * s_;
    }
    return {p};
  }
  Point map(const Patch& p) const override {
    Point x = c_;
    int k = 0;
    for (int i = 0; i < n_; ++i) {
      if (i == axis_) continue;
      x[i] += mid(p, k++);
    }
    return x;
  }
  double radius(const Patch& p) const override {
    double s = 0.0;
    for (int i = 0; i < n_ - 1; ++i) s += half(p, i) * half(p, i);
    return std::sqrt(s);
  }
  double linear_max(const Patch& p, const Point&, const Point& w) const override {
    double s = 0.0;
    int k = 0;
    for (int i = 0; i < n_; ++i) {
      if (i == axis_) continue;
      s += half(p, k++) * std::abs(w[i]);
    }
    return s;
  }

 private:
  Point c_;
  double s_;
  int n_;
  int axis_;
};

std::vector<Patch> split(const Patch& p, int pd) {
  std::vector<Patch> out;
  const int count = 1 << pd;
  out.reserve(static_cast<std::size_t>(count));
  for (int mask = 0; mask < count; ++mask) {
    Patch c = p;
    c.depth = p.depth + 1;
    for (int i = 0; i < pd; ++i) {
      const double m = mid(p, i);
      if (mask & (1 << i)) {
        c.lo[i] = m;
      } else {
        c.hi[i] = m;
      }
    }
    out.push_back(c);
  }
  return out;
}

double frobenius(const std::vector<double>& h) {
  double s = 0.0;
  for (double v : h) s += v * v;
  return std::sqrt(s);
}

// Spectral norm of a symmetric n*n matrix: closed form for n <= 3, Frobenius otherwise.
double spectral(const std::vector<double>& h, int n) {
  if (n == 1) return std::abs(h[0]);
  if (n == 2) {
    const double m = 0.5 * (h[0] + h[3]);
    const double d = std::hypot(0.5 * (h[0] - h[3]), h[1]);
    return std::abs(m) + d;
  }
  if (n != 3) return frobenius(h);
  const double q = (h[0] + h[4] + h[8]) / 3.0;
  const double p1 = h[1] * h[1] + h[2] * h[2] + h[5] * h[5];
  const double p2 = (h[0] - q) * (h[0] - q) + (h[4] - q) * (h[4] - q) + (h[8] - q) * (h[8] - q) + 2.0 * p1;
  if (p2 == 0.0) return std::abs(q);
  const double p = std::sqrt(p2 / 6.0);
  std::array<double, 9> b{};
  for (int i = 0; i < 9; ++i) b[static_cast<std::size_t>(i)] = (h[static_cast<std::size_t>(i)] - (i % 4 == 0 ? q : 0.0)) / p;
  const double det = b[0] * (b[4] * b[8] - b[5] * b[7]) - b[1] * (b[3] * b[8] - b[5] * b[6]) +
                     b[2] * (b[3] * b[7] - b[4] * b[6]);
  const double phi = std::acos(std::clamp(0.5 * det, -1.0, 1.0)) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  // guard against rounding in the trigonometric form
  return std::min(frobenius(h), std::max(std::abs(e1), std::abs(e3)) * (1.0 + 1e-12));
}

Point mat_vec(const std::vector<double>& h, const Point& g) {
  const int n = g.dim();
  Point out(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += h[static_cast<std::size_t>(i * n + j)] * g[j];
    out[i] = s;
  }
  return out;
}

struct LocalBounds {
  double value;  // |grad u(sample)|
  double upper;  // sup over the neighbourhood
  double lower;  // inf over the neighbourhood
};

/// Bounds on |grad u| over {y : |y - x| <= rho}; `lin` (optional) bounds the
/// linear Taylor term (y - x) . H g more sharply than rho |H g|.
template <class LinearMax>
// `fourth` bounds the fourth derivative over a convex set containing B(x, rho);
// when finite, the Hessian and third-derivative bounds are recentred at x.
LocalBounds local_bounds(const HarmonicFunction& u, const Point& x, double rho, LinearMax lin,
                         double fourth) {
  const Point g = u.gradient(x);
  const double f = g.norm();
  if (rho == 0.0) return {f, f, f};
  const auto h = u.hessian(x);
  const double hn = frobenius(h);
  double lip = 0.0;
  double t = 0.0;
  if (std::isfinite(fourth)) {
    t = u.third_derivative_norm(x) + rho * fourth;
    lip = hn + rho * t;
  } else {
    const Point lo = x - Point::filled(x.dim(), rho);
    const Point hi = x + Point::filled(x.dim(), rho);
    lip = u.hessian_bound(lo, hi);
    t = u.third_derivative_bound(lo, hi);
  }
  const Point w = mat_vec(h, g);

  const double first_up = f + lip * rho;
  const double hs = spectral(h, x.dim());
  const double q = f * f + 2.0 * lin(w) + rho * rho * hs * hs;
  const double second_up = std::sqrt(std::max(0.0, q)) + 0.5 * t * rho * rho;

  const double first_lo = f - lip * rho;
  const double second_lo = f - rho * hs - 0.5 * t * rho * rho;
  return {f, std::min(first_up, second_up), std::max(0.0, std::max(first_lo, second_lo))};
}

void check_region(const HarmonicFunction& u, const Region& region) {
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if (r.center.dim() != u.dim()) throw InvalidArgument("region dimension mismatch");
        if constexpr (std::is_same_v<T, Ball>) {
          for (const auto& c : u.charges()) {
            if (distance(c.location, r.center) <= r.radius) {
              throw DomainError("ball contains a point charge");
            }
          }
        } else {
          if (u.charge_distance(r.lo(), r.hi()) <= 0.0) {
            throw DomainError("cube contains a point charge");
          }
        }
      },
      region);
}

std::pair<Point, Point> bounding_box(const Region& region) {
  return std::visit(
      [](const auto& r) -> std::pair<Point, Point> {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Ball>) {
          const Point e = Point::filled(r.center.dim(), r.radius);
          return {r.center - e, r.center + e};
        } else {
          return {r.lo(), r.hi()};
        }
      },
      region);
}

Point region_center(const Region& region) {
  return std::visit([](const auto& r) { return r.center; }, region);
}

std::unique_ptr<Surface> make_surface(const Region& region) {
  if (const auto* b = std::get_if<Ball>(&region)) return std::make_unique<SphereSurface>(*b);
  return std::make_unique<CubeSurface>(std::get<AxisCube>(region));
}

NormEstimate sup_grad_sampled(const HarmonicFunction& u, const Region& region, int density) {
  const auto surface = make_surface(region);
  const int pd = surface->param_dim();
  double best = 0.0;
  std::int64_t evals = 0;
  for (const Patch& root : surface->initial()) {
    // uniform grid of patch centres inside each root patch
    std::int64_t total = 1;
    for (int i = 0; i < pd; ++i) total *= density;
    for (std::int64_t idx = 0; idx < total; ++idx) {
      Patch p = root;
      std::int64_t rem = idx;
      for (int i = 0; i < pd; ++i) {
        const int k = static_cast<int>(rem % density);
        rem /= density;
        const double w = (root.hi[i] - root.lo[i]) / density;
        p.lo[i] = root.lo[i] + k * w;
        p.hi[i] = p.lo[i] + w;
      }
      best = std::max(best, u.gradient(surface->map(p)).norm());
      ++evals;
    }
  }
  // interior grid; the boundary dominates but sampling it keeps the mode honest
  const auto [lo, hi] = bounding_box(region);
  const int n = u.dim();
  const int m = std::max(2, density / 4);
  std::int64_t total = 1;
  for (int i = 0; i < n; ++i) total *= m;
  const auto* ball = std::get_if<Ball>(&region);
  for (std::int64_t idx = 0; idx < total; ++idx) {
    Point x(n);
    std::int64_t rem = idx;
    for (int i = 0; i < n; ++i) {
      const int k = static_cast<int>(rem % m);
      rem /= m;
      x[i] = lo[i] + (hi[i] - lo[i]) * (k + 0.5) / m;
    }
    if (ball && distance(x, ball->center) > ball->radius) continue;
    best = std::max(best, u.gradient(x).norm());
    ++evals;
  }
  return {best, 0.0, EstimateMode::sampled, evals};
}

struct ByUpper {
  bool operator()(const Patch& a, const Patch& b) const { return a.upper < b.upper; }
};

}  // namespace

namespace {

NormEstimate branch_and_bound(const HarmonicFunction& u, const Surface& surface_ref, const Point& blo,
                              const Point& bhi, const SupOptions& opt) {
  const Surface* surface = &surface_ref;
  const double fourth = u.fourth_derivative_bound(blo, bhi);
  const int pd = surface->param_dim();
  std::priority_queue<Patch, std::vector<Patch>, ByUpper> queue;
  double lower = 0.0;
  double discarded = 0.0;
  std::int64_t evals = 0;

  auto evaluate = [&](Patch& p) {
    const Point x = surface->map(p);
    const double rho = surface->radius(p);
    const auto b = local_bounds(
        u, x, rho, [&](const Point& w) { return surface->linear_max(p, x, w); }, fourth);
    p.value = b.value;
    p.upper = std::max(b.upper, b.value);
    lower = std::max(lower, b.value);
    ++evals;
  };
  const double keep_ratio = (1.0 + opt.tolerance) / (1.0 - std::min(0.5, opt.tolerance));
  auto push = [&](Patch p) {
    if (p.upper <= lower * keep_ratio) {
      discarded = std::max(discarded, p.upper);
    } else {
      queue.push(p);
    }
  };

  std::vector<Patch> roots = surface->initial();
  for (auto& p : roots) evaluate(p);
  for (auto& p : roots) push(p);

  while (true) {
    const double upper = std::max({queue.empty() ? 0.0 : queue.top().upper, discarded, lower});
    if (upper == 0.0) return {0.0, 0.0, EstimateMode::exact, evals};
    if (upper - lower <= opt.tolerance * (upper + lower)) {
      return {0.5 * (upper + lower), 0.5 * (upper - lower), EstimateMode::certified, evals};
    }
    Patch top = queue.top();
    queue.pop();
    if (top.upper <= lower * keep_ratio) {
      discarded = std::max(discarded, top.upper);
      continue;
    }
    if (top.depth >= opt.max_depth || evals >= opt.max_evaluations) {
      std::ostringstream msg;
      msg << "sup_grad did not certify relative tolerance " << opt.tolerance << " (bounds ["
          << lower << ", " << upper << "], " << evals << " evaluations, depth " << top.depth << ")";
      throw NonConvergence(msg.str());
    }
    for (Patch& c : split(top, pd)) {
      evaluate(c);
      push(c);
    }
  }
}

}  // namespace

NormEstimate sup_grad(const HarmonicFunction& u, const Region& region, const SupOptions& opt) {
  check_region(u, region);
  if (!(opt.tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  const auto [blo, bhi] = bounding_box(region);
  if (u.hessian_bound(blo, bhi) == 0.0) {
    return {u.gradient(region_center(region)).norm(), 0.0, EstimateMode::exact, 1};
  }
  if (opt.mode == EstimateMode::sampled) return sup_grad_sampled(u, region, opt.sample_density);
  return branch_and_bound(u, *make_surface(region), blo, bhi, opt);
}

NormEstimate sup_grad_slice(const HarmonicFunction& u, const AxisCube& q, int axis, const SupOptions& opt) {
  check_region(u, q);
  if (axis < 0 || axis >= u.dim()) throw InvalidArgument("slice axis out of range");
  if (!(opt.tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  Point lo = q.lo();
  Point hi = q.hi();
  lo[axis] = hi[axis] = q.center[axis];
  if (u.hessian_bound(lo, hi) == 0.0) return {u.gradient(q.center).norm(), 0.0, EstimateMode::exact, 1};
  return branch_and_bound(u, SliceSurface(q, axis), lo, hi, opt);
}

namespace {

struct BoxPatch {
  Point lo;
  Point hi;
  int depth = 0;
  double lower = 0.0;
};

struct ByLower {
  bool operator()(const BoxPatch& a, const BoxPatch& b) const { return a.lower > b.lower; }
};

/// Evaluates a sub-box of the region: returns false if the box misses the region.
bool evaluate_box(const HarmonicFunction& u, const Region& region, double fourth, BoxPatch& b,
                  double& sample_value) {
  const int n = u.dim();
  Point c = (b.lo + b.hi) * 0.5;
  if (const auto* ball = std::get_if<Ball>(&region)) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double p = ball->center[i];
      const double d = p < b.lo[i] ? b.lo[i] - p : (p > b.hi[i] ? p - b.hi[i] : 0.0);
      s += d * d;
    }
    if (std::sqrt(s) > ball->radius) return false;
    const double dc = distance(c, ball->center);
    if (dc > ball->radius) c = ball->center + (c - ball->center) * (ball->radius / dc);
  }
  double rho = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = std::max(std::abs(c[i] - b.lo[i]), std::abs(c[i] - b.hi[i]));
    rho += d * d;
  }
  rho = std::sqrt(rho);
  const auto lb = local_bounds(u, c, rho, [&](const Point& w) { return rho * w.norm(); }, fourth);
  b.lower = lb.lower;
  sample_value = lb.value;
  return true;
}

std::vector<BoxPatch> split_box(const BoxPatch& b) {
  const int n = b.lo.dim();
  std::vector<BoxPatch> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    BoxPatch c = b;
    c.depth = b.depth + 1;
    for (int i = 0; i < n; ++i) {
      const double m = 0.5 * (b.lo[i] + b.hi[i]);
      if (mask & (1 << i)) {
        c.lo[i] = m;
      } else {
        c.hi[i] = m;
      }
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

NormEstimate min_grad(const HarmonicFunction& u, const Region& region, const MinOptions& opt) {
  check_region(u, region);
  const auto [lo, hi] = bounding_box(region);
  const double fourth = u.fourth_derivative_bound(lo, hi);
  std::priority_queue<BoxPatch, std::vector<BoxPatch>, ByLower> queue;
  double best = kInf;
  std::int64_t evals = 0;
  auto consider = [&](BoxPatch b) {
    double v = 0.0;
    if (!evaluate_box(u, region, fourth, b, v)) return;
    ++evals;
    best = std::min(best, v);
    if (b.lower < best) queue.push(b);
  };
  consider(BoxPatch{lo, hi, 0, 0.0});
  while (true) {
    const double floor = queue.empty() ? best : std::min(best, queue.top().lower);
    if (best - floor <= opt.abs_tolerance) {
      const EstimateMode mode = best == floor ? EstimateMode::exact : EstimateMode::certified;
      return {0.5 * (best + floor), 0.5 * (best - floor), mode, evals};
    }
    BoxPatch top = queue.top();
    queue.pop();
    if (top.lower >= best) continue;
    if (top.depth >= opt.max_depth || evals >= opt.max_evaluations) {
      std::ostringstream msg;
      msg << "min_grad did not reach absolute tolerance " << opt.abs_tolerance << " (bounds ["
          << floor << ", " << best << "])";
      throw NonConvergence(msg.str());
    }
    for (auto& c : split_box(top)) consider(c);
  }
}

Comparison compare_min_grad(const HarmonicFunction& u, const Region& region, double threshold,
                            int max_depth) {
  check_region(u, region);
  const auto [lo, hi] = bounding_box(region);
  const double fourth = u.fourth_derivative_bound(lo, hi);
  std::priority_queue<BoxPatch, std::vector<BoxPatch>, ByLower> queue;
  bool below = false;
  auto consider = [&](BoxPatch b) {
    double v = 0.0;
    if (!evaluate_box(u, region, fourth, b, v)) return;
    if (v < threshold) below = true;
    if (b.lower < threshold) queue.push(b);
  };
  consider(BoxPatch{lo, hi, 0, 0.0});
  bool undecided = false;
  while (!queue.empty() && !below) {
    BoxPatch top = queue.top();
    queue.pop();
    if (top.depth >= max_depth) {
      undecided = true;
      continue;
    }
    for (auto& c : split_box(top)) consider(c);
  }
  if (below) return Comparison::below;
  return undecided ? Comparison::undecided : Comparison::above;
}

namespace {

void check_ball_domain(const HarmonicFunction& u, const Ball& ball) {
  check_region(u, Region{ball});
}

template <class Integrand>
NormEstimate refine(const QuadratureOptions& opt, Integrand integrate) {
  int radial = std::max(2, opt.radial_nodes / 2);
  int angular = std::max(4, opt.angular_nodes / 2);
  double prev = integrate(radial, angular);
  for (int k = 0; k <= opt.max_refinements; ++k) {
    radial *= 2;
    angular *= 2;
    const double cur = integrate(radial, angular);
    const double change = std::abs(cur - prev);
    if (cur == 0.0 && prev == 0.0) return {0.0, 0.0, EstimateMode::exact, 0};
    if (change <= opt.tolerance * std::abs(cur)) {
      return {cur, change, EstimateMode::sampled, 0};
    }
    prev = cur;
  }
  throw NonConvergence("quadrature did not converge to the requested relative tolerance");
}

}  // namespace

NormEstimate mean_square_grad(const HarmonicFunction& u, const Ball& ball,
                              const QuadratureOptions& opt) {
  check_ball_domain(u, ball);
  const int n = u.dim();
  const Point c = ball.center;
  const Point lo = c - Point::filled(n, ball.radius);
  const Point hi = c + Point::filled(n, ball.radius);
  if (u.hessian_bound(lo, hi) == 0.0) {
    const double g = u.gradient(c).norm();
    return {g * g, 0.0, EstimateMode::exact, 1};
  }
  return refine(opt, [&](int radial, int angular) {
    const auto rule = quadrature::unit_ball_rule(n, radial, angular);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < rule.points.size(); ++i) {
      const Point x = c + rule.points[i] * ball.radius;
      num += rule.weights[i] * u.gradient(x).norm2();
      den += rule.weights[i];
    }
    return num / den;
  });
}

NormEstimate sphere_l2_norm(const HarmonicFunction& u, const Ball& ball,
                            const QuadratureOptions& opt) {
  check_ball_domain(u, ball);
  const int n = u.dim();
  const double area_scale = std::pow(ball.radius, n - 1);
  NormEstimate sq = refine(opt, [&](int, int angular) {
    const auto rule = quadrature::unit_sphere_rule(n, angular);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.points.size(); ++i) {
      const double v = u.value(ball.center + rule.points[i] * ball.radius);
      s += rule.weights[i] * v * v;
    }
    return s * area_scale;
  });
  const double norm = std::sqrt(sq.value);
  // d sqrt(v) ~ dv / (2 sqrt v)
  const double err = norm > 0.0 ? sq.error_bound / (2.0 * norm) : std::sqrt(sq.error_bound);
  return {norm, err, sq.mode, sq.evaluations};
}

NormEstimate sphere_mean_oscillation(const HarmonicFunction& u, const Point& x, double r,
                                     const QuadratureOptions& opt) {
  const Ball ball(x, r);
  check_ball_domain(u, ball);
  const double ux = u.value(x);
  return refine(opt, [&](int, int angular) {
    const auto rule = quadrature::unit_sphere_rule(u.dim(), angular);
    double s = 0.0;
    double area = 0.0;
    for (std::size_t i = 0; i < rule.points.size(); ++i) {
      const double d = u.value(x + rule.points[i] * r) - ux;
      s += rule.weights[i] * d * d;
      area += rule.weights[i];
    }
    return s / area;
  });
}

}  // namespace uclab::harmonic
