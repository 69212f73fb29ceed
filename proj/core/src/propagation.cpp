#include "uclab/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "uclab/error.hpp"
#include "uclab/parallel.hpp"

namespace uclab::propagation {

using doubling::CubeClass;
using lattice::Cube;
using lattice::GridSet;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_branching(int A) {
  if (A < 1 || !lattice::is_power_of_three(2 * A + 1)) {
    throw InvalidArgument("2A+1 must be a power of 3 (A = " + std::to_string(A) + ")");
  }
}

void check_threshold(double N) {
  if (!(N > 0.0) || !std::isfinite(N)) throw InvalidArgument("threshold N must be positive");
}

std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Index of a descendant in the K-grid of q (q mapped to the unit cube).
std::array<std::int64_t, kMaxDim> frame_index(const Cube& q, const Cube& d) {
  std::array<std::int64_t, kMaxDim> idx{};
  const Point lo = q.lo();
  const Point c = d.center();
  for (int i = 0; i < q.dim(); ++i) {
    idx[static_cast<std::size_t>(i)] = std::llround((c[i] - lo[i]) / d.side() - 0.5);
  }
  return idx;
}

std::vector<CubeClass> classify_all(const HarmonicFunction& u, const std::vector<Cube>& cubes, double N,
                                    const CensusOptions& opt) {
  auto co = opt.classify;
  co.maximal.workers = 1;
  return parallel_map(cubes.size(), opt.workers,
                      [&](std::size_t i) { return doubling::classify_cube(u, cubes[i], N, co).cls; });
}

double maximal_lower(const HarmonicFunction& u, const Cube& q, const CensusOptions& opt) {
  auto mo = opt.classify.maximal;
  mo.workers = opt.workers;
  return doubling::maximal_doubling(u, q, mo).index_value;
}

// Hyperplane children of q with their classes; the flagged set lives in q's frame.
struct HyperplaneScan {
  std::int64_t bad = 0;
  std::int64_t undecided = 0;
  std::int64_t total = 0;
  GridSet flagged;
};

HyperplaneScan scan_hyperplane(const HarmonicFunction& u, const Cube& q, int A, double N,
                               const CensusOptions& opt) {
  const auto kids = lattice::hyperplane_children(q, A);
  const auto cls = classify_all(u, kids, N, opt);
  HyperplaneScan s;
  s.total = static_cast<std::int64_t>(kids.size());
  s.flagged = GridSet(q.dim(), 2 * A + 1, true);
  for (std::size_t i = 0; i < kids.size(); ++i) {
    if (cls[i] == CubeClass::good) continue;
    (cls[i] == CubeClass::bad ? s.bad : s.undecided) += 1;
    auto idx = frame_index(q, kids[i]);
    idx[static_cast<std::size_t>(q.dim() - 1)] = A;
    s.flagged.insert(idx);
  }
  return s;
}

void check_on_hyperplane(const Cube& q) {
  const double h = q.center()[q.dim() - 1];
  if (std::abs(h) > 1e-12 * q.side()) throw InvalidArgument("Q must be centred on {x_n = 0}");
}

}  // namespace

CensusReport bad_cube_census(const HarmonicFunction& u, const Cube& q, int A, double N, int generations,
                             const CensusOptions& opt) {
  check_branching(A);
  check_threshold(N);
  if (generations < 1) throw InvalidArgument("generations must be >= 1");
  if (!(opt.c >= 0.0)) throw InvalidArgument("c must be nonnegative");
  if (opt.deltas.empty()) throw InvalidArgument("no delta requested");
  const int n = q.dim();
  const std::int64_t b = 2 * A + 1;
  if (static_cast<double>(n) * generations * std::log(static_cast<double>(b)) > std::log(2e6)) {
    throw InvalidArgument("census too large: more than 2e6 cubes at the last generation");
  }
  CensusReport rep;
  rep.precondition_index = maximal_lower(u, q, opt);
  rep.precondition_limit = (1.0 + opt.c) * N;
  if (rep.precondition_index > rep.precondition_limit) {
    std::ostringstream msg;
    msg << "N(Q) >= " << rep.precondition_index << " exceeds (1+c)N = " << rep.precondition_limit;
    rep.reason = msg.str();
    return rep;
  }
  rep.applicable = true;
  lattice::CubeTree tree(q, A);
  tree.materialize(generations);
  for (int g = 1; g <= generations; ++g) {
    const auto& level = tree.level(g);
    const auto cls = classify_all(u, level, N, opt);
    CensusResult base;
    base.level = g;
    base.threshold_N = N;
    base.total_count = static_cast<std::int64_t>(level.size());
    base.flagged = GridSet(n, ipow(b, g));
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (cls[i] == CubeClass::good) continue;
      (cls[i] == CubeClass::bad ? base.bad_count : base.undecided_count) += 1;
      base.flagged.insert(frame_index(q, level[i]));
    }
    for (double delta : opt.deltas) {
      CensusResult r = base;
      r.context = {A, delta, 0.0, opt.c};
      r.bound = std::pow(0.5 * std::pow(static_cast<double>(b), n - 2 + delta), g);
      rep.results.push_back(std::move(r));
    }
  }
  return rep;
}

CensusReport hyperplane_census(const HarmonicFunction& u, const Cube& q, int A, double N,
                               const CensusOptions& opt) {
  check_branching(A);
  check_threshold(N);
  check_on_hyperplane(q);
  if (opt.deltas.empty() || opt.etas.empty()) throw InvalidArgument("no (eta, delta) pair requested");
  const int n = q.dim();
  CensusReport rep;
  rep.precondition_index = maximal_lower(u, Cube::root(q.center(), 2.0 * q.side()), opt);
  rep.precondition_limit = 2.0 * N;
  if (rep.precondition_index > rep.precondition_limit) {
    std::ostringstream msg;
    msg << "N(2Q) >= " << rep.precondition_index << " exceeds 2N = " << rep.precondition_limit;
    rep.reason = msg.str();
    return rep;
  }
  rep.applicable = true;
  const auto scan = scan_hyperplane(u, q, A, N, opt);
  for (double eta : opt.etas) {
    for (double delta : opt.deltas) {
      CensusResult r;
      r.level = 1;
      r.threshold_N = N;
      r.bad_count = scan.bad;
      r.undecided_count = scan.undecided;
      r.total_count = scan.total;
      r.context = {A, delta, eta, opt.c};
      r.bound = eta * std::pow(static_cast<double>(2 * A + 1), n - 2 + delta);
      r.flagged = scan.flagged;
      rep.results.push_back(std::move(r));
    }
  }
  return rep;
}

CapacityCensus capacity_census(const HarmonicFunction& u, const Cube& q, int A, double N, double delta,
                               const CensusOptions& opt, const gmt::CapacityOptions& cap) {
  check_branching(A);
  check_threshold(N);
  check_on_hyperplane(q);
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  CapacityCensus rep;
  rep.s = q.dim() - 2 + delta;
  rep.doubling_2Q = maximal_lower(u, Cube::root(q.center(), 2.0 * q.side()), opt);
  rep.ratio = rep.doubling_2Q / N;
  if (rep.doubling_2Q > 2.0 * N) {
    std::ostringstream msg;
    msg << "N(2Q) >= " << rep.doubling_2Q << " exceeds 2N = " << 2.0 * N;
    rep.reason = msg.str();
    return rep;
  }
  rep.applicable = true;
  const auto scan = scan_hyperplane(u, q, A, N, opt);
  rep.set = scan.flagged;
  rep.flagged = scan.bad + scan.undecided;
  if (rep.set.empty()) {
    rep.vacuous = true;
    return rep;
  }
  rep.capacity = gmt::riesz_capacity_lower(rep.set, rep.s, cap).lower;
  return rep;
}

namespace {

std::vector<Point> candidate_normals(int n, int directions) {
  std::vector<Point> out;
  if (n == 2) {
    const int k = std::max(2, directions);
    for (int i = 0; i < k; ++i) {
      const double t = std::numbers::pi * i / k;
      out.push_back(Point{std::cos(t), std::sin(t)});
    }
    return out;
  }
  for (int i = 0; i < n; ++i) {
    Point e(n);
    e[i] = 1.0;
    out.push_back(e);
  }
  if (n == 3) {
    // face and body diagonals
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        for (double sgn : {1.0, -1.0}) {
          Point d(3);
          d[i] = 1.0 / std::sqrt(2.0);
          d[j] = sgn / std::sqrt(2.0);
          out.push_back(d);
        }
      }
    }
    for (double sy : {1.0, -1.0}) {
      for (double sz : {1.0, -1.0}) out.push_back(Point{1.0, sy, sz} * (1.0 / std::sqrt(3.0)));
    }
  }
  return out;
}

std::vector<Point> cell_centers(const Cube& q, std::int64_t G) {
  const int n = q.dim();
  const Point lo = q.lo();
  const double h = q.side() / static_cast<double>(G);
  std::vector<Point> pts;
  std::array<std::int64_t, kMaxDim> k{};
  while (true) {
    Point p(n);
    for (int i = 0; i < n; ++i) p[i] = lo[i] + (static_cast<double>(k[static_cast<std::size_t>(i)]) + 0.5) * h;
    pts.push_back(p);
    int ax = n - 1;
    while (ax >= 0 && ++k[static_cast<std::size_t>(ax)] == G) k[static_cast<std::size_t>(ax--)] = 0;
    if (ax < 0) break;
  }
  return pts;
}

}  // namespace

WidthReport width_of_bad_set(const HarmonicFunction& u, const Cube& q, double c, int generations_down,
                             const WidthOptions& opt) {
  if (q.path().empty()) throw InvalidArgument("q must be a descendant (generation >= 1)");
  if (!(c >= 0.0)) throw InvalidArgument("c must be nonnegative");
  if (generations_down < 0 || generations_down > 4) throw InvalidArgument("generations_down must lie in [0, 4]");
  if (opt.rungs < 1) throw InvalidArgument("rungs must be >= 1");
  const int n = q.dim();
  const int b = q.path().back().branching;
  std::vector<lattice::PathStep> up(q.path().begin(), q.path().end() - 1);
  const Cube parent = lattice::follow_path(Cube::root(q.root_center(), q.root_side()), up);

  WidthReport rep;
  rep.diameter = q.side() * std::sqrt(static_cast<double>(n));
  rep.parent_index = doubling::maximal_doubling(u, parent, opt.maximal).index_value;
  rep.threshold = rep.parent_index / (1.0 + c);
  const double L = opt.maximal.ratio > 0.0 ? opt.maximal.ratio : 10.0 * n;
  const double rho = rep.diameter / b;

  std::int64_t G = 1;
  for (int i = 0; i < generations_down; ++i) G *= b;
  if (std::pow(static_cast<double>(G), n) > 1e6) throw InvalidArgument("width sampling grid too large");
  const auto pts = cell_centers(q, G);
  rep.samples = static_cast<std::int64_t>(pts.size());
  const auto member = parallel_map(pts.size(), opt.maximal.workers, [&](std::size_t i) -> char {
    for (int k = 1; k <= opt.rungs; ++k) {
      const double r = std::ldexp(rho, -k);
      if (doubling::doubling_index(u, pts[i], r, opt.maximal.sup, L).lower() > rep.threshold) return 1;
    }
    return 0;
  });
  std::vector<Point> in;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (member[i]) in.push_back(pts[i]);
  }
  rep.in_set = static_cast<std::int64_t>(in.size());
  rep.normal = Point(n);
  if (in.empty()) return rep;
  rep.width = kInf;
  for (const auto& v : candidate_normals(n, opt.directions)) {
    double lo = kInf;
    double hi = -kInf;
    for (const auto& p : in) {
      const double t = p.dot(v);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    if (hi - lo < rep.width) {
      rep.width = hi - lo;
      rep.normal = v;
    }
  }
  rep.relative = rep.width / rep.diameter;
  return rep;
}

SublevelReport sublevel_content(const HarmonicFunction& u, const Cube& q, double a, double s, std::int64_t K,
                                const SublevelOptions& opt) {
  if (!std::isfinite(a)) throw InvalidArgument("a must be finite");
  if (!(s > 0.0)) throw InvalidArgument("s must be positive");
  if (!lattice::is_power_of_three(K)) throw InvalidArgument("K must be a power of 3");
  const int n = q.dim();
  if (std::pow(static_cast<double>(K), n) > 2e7) throw InvalidArgument("sublevel grid too large");
  if (opt.check_normalization) {
    const auto sup = harmonic::sup_grad(u, q.region(), {1e-6});
    if (std::abs(sup.value - 1.0) > opt.normalization_tolerance + sup.error_bound) {
      std::ostringstream msg;
      msg << "u is not normalised on Q: sup |grad u| = " << sup.value;
      throw InvalidArgument(msg.str());
    }
  }
  const double threshold = std::exp(-a);
  const auto pts = cell_centers(q, K);
  const double h = q.side() / static_cast<double>(K);
  const auto cls = parallel_map(pts.size(), opt.workers, [&](std::size_t i) {
    return harmonic::compare_min_grad(u, harmonic::AxisCube(pts[i], h), threshold, opt.compare_depth);
  });
  SublevelReport rep;
  rep.set = GridSet(n, K);
  std::int64_t certified = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (cls[i] == harmonic::Comparison::above) {
      ++certified;
      continue;
    }
    if (cls[i] == harmonic::Comparison::undecided) {
      ++rep.undecided;
    } else {
      ++certified;
    }
    rep.set.insert_linear(static_cast<std::int64_t>(i));
  }
  rep.unresolved = certified == 0;
  rep.scale = std::pow(q.side(), s);
  if (rep.set.empty()) {
    rep.content.s = s;
    return rep;
  }
  rep.content = gmt::hausdorff_content(rep.set, s, opt.search_depth);
  return rep;
}

std::vector<Point> greedy_cover(const std::vector<Point>& points, double r) {
  std::vector<Point> centers;
  for (const auto& p : points) {
    bool covered = false;
    for (const auto& c : centers) {
      if (distance(p, c) <= r) {
        covered = true;
        break;
      }
    }
    if (!covered) centers.push_back(p);
  }
  return centers;
}

CriticalSetCover effective_critical_set(const HarmonicFunction& u, const Cube& q, double r, std::int64_t K,
                                        const CriticalOptions& opt) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("r must be positive");
  if (K < 1) throw InvalidArgument("K must be positive");
  const int n = q.dim();
  if (q.side() / static_cast<double>(K) > r * (1.0 + 1e-12)) throw InvalidArgument("cells must not exceed r (K r >= side)");
  if (std::pow(static_cast<double>(K), n) > 4e6) throw InvalidArgument("critical-set grid too large");
  const auto pts = cell_centers(q, K);
  // 1 detected, 0 not, 2 undecided
  const auto state = parallel_map(pts.size(), opt.workers, [&](std::size_t i) -> char {
    const auto osc = harmonic::sphere_mean_oscillation(u, pts[i], 2.0 * r, opt.quadrature);
    const double f = n / (16.0 * r * r);
    const double lo = std::max(0.0, f * osc.lower());
    const double hi = f * osc.upper();
    const harmonic::Ball ball(pts[i], r);
    if (lo > 0.0 && harmonic::compare_min_grad(u, ball, std::sqrt(lo), opt.compare_depth) ==
                        harmonic::Comparison::below) {
      return 1;
    }
    if (harmonic::compare_min_grad(u, ball, std::sqrt(hi), opt.compare_depth) == harmonic::Comparison::above) {
      return 0;
    }
    return 2;
  });
  CriticalSetCover out;
  out.r = r;
  out.detected = GridSet(n, K);
  std::vector<Point> hits;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (state[i] == 0) continue;
    if (state[i] == 2) ++out.undecided;
    out.detected.insert_linear(static_cast<std::int64_t>(i));
    hits.push_back(pts[i]);
  }
  out.centers = greedy_cover(hits, r);
  out.ball_count = static_cast<std::int64_t>(out.centers.size());
  return out;
}

std::string to_string(RecursionVariant v) { return v == RecursionVariant::proof ? "proof" : "statement"; }

Boundary Boundary::exponential(double C, double beta, double N0) {
  if (!(C >= 0.0 && beta >= 0.0 && N0 > 0.0)) throw InvalidArgument("boundary needs C, beta >= 0 and N0 > 0");
  std::ostringstream d;
  d << C << " exp(-" << beta << " a / " << N0 << ")";
  return {[=](double, double a) { return C * std::exp(-beta * a / N0); }, N0, d.str()};
}

Boundary Boundary::constant(double kappa, double N0) {
  if (!(kappa >= 0.0 && N0 > 0.0)) throw InvalidArgument("boundary needs kappa >= 0 and N0 > 0");
  std::ostringstream d;
  d << "constant " << kappa;
  return {[=](double, double) { return kappa; }, N0, d.str()};
}

Boundary Boundary::tabulated(std::vector<std::pair<double, double>> points, double N0) {
  if (points.empty() || !(N0 > 0.0)) throw InvalidArgument("tabulated boundary needs points and N0 > 0");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].second >= 0.0)) throw InvalidArgument("boundary values must be nonnegative");
    if (i > 0 && !(points[i].first > points[i - 1].first)) throw InvalidArgument("boundary a values must increase");
  }
  auto f = [pts = std::move(points)](double, double a) {
    if (a <= pts.front().first) return pts.front().second;
    if (a >= pts.back().first) return pts.back().second;
    const auto it = std::upper_bound(pts.begin(), pts.end(), a, [](double x, const auto& p) { return x < p.first; });
    const auto& [a1, v1] = *it;
    const auto& [a0, v0] = *(it - 1);
    return v0 + (v1 - v0) * (a - a0) / (a1 - a0);
  };
  return {f, N0, "tabulated"};
}

namespace {

// value between v0 (at t = 0) and v1 (t = 1): geometric when both positive
double blend(double v0, double v1, double t) {
  if (t <= 0.0) return v0;
  if (t >= 1.0) return v1;
  if (v0 > 0.0 && v1 > 0.0 && std::isfinite(v0) && std::isfinite(v1)) {
    return std::exp((1.0 - t) * std::log(v0) + t * std::log(v1));
  }
  return (1.0 - t) * v0 + t * v1;
}

bool near_integer(double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x)); }

}  // namespace

double RecursionState::at(double Nq, double aq) const {
  if (aq <= 0.0) return params.ceiling;
  if (Nq <= boundary_N0) return std::min(params.ceiling, boundary_f(Nq, aq));
  // rows above N0; the boundary acts as a row at N0
  auto row_value = [&](std::size_t r, double x) {
    const double step = grid.a_step;
    const double pos = x / step;
    const auto& row = M[r];
    if (near_integer(pos)) {
      const auto j = static_cast<std::size_t>(std::llround(pos));
      return j < row.size() ? row[j] : row.back();
    }
    const auto j0 = static_cast<std::size_t>(std::floor(pos));
    if (j0 + 1 >= row.size()) return row.back();
    return blend(row[j0], row[j0 + 1], pos - static_cast<double>(j0));
  };
  std::size_t hi = 0;
  while (hi < N.size() && (N[hi] <= boundary_N0 || N[hi] < Nq * (1.0 - 1e-12))) ++hi;
  if (hi == N.size()) throw InvalidArgument("N beyond the tabulated grid");
  if (std::abs(N[hi] - Nq) <= 1e-12 * Nq) return row_value(hi, aq);
  double N_lo = boundary_N0;
  double v_lo = std::min(params.ceiling, boundary_f(boundary_N0, aq));
  if (hi > 0 && N[hi - 1] > boundary_N0) {
    N_lo = N[hi - 1];
    v_lo = row_value(hi - 1, aq);
  }
  const double t = (1.0 / N_lo - 1.0 / Nq) / (1.0 / N_lo - 1.0 / N[hi]);
  return blend(v_lo, row_value(hi, aq), t);
}

RecursionState recursion_simulate(const RecursionParams& p, const Boundary& boundary, const RecursionGrid& g) {
  if (!(p.A > 1.0)) throw InvalidArgument("A must exceed 1");
  if (!(p.delta > 0.0)) throw InvalidArgument("delta must be positive");
  if (!(p.c > 0.0)) throw InvalidArgument("c must be positive");
  if (!(p.C1 > 0.0)) throw InvalidArgument("C1 must be positive");
  if (!(p.ceiling > 0.0)) throw InvalidArgument("ceiling must be positive");
  if (!boundary.f || !(boundary.N0 > 0.0)) throw InvalidArgument("boundary curve missing");
  if (!(g.N_min > 0.0 && g.N_step > 0.0 && g.N_max >= g.N_min)) throw InvalidArgument("bad N range");
  if (!(g.a_step > 0.0 && g.a_max > 0.0)) throw InvalidArgument("bad a range");
  const double rows = (g.N_max - g.N_min) / g.N_step;
  const double cols = g.a_max / g.a_step;
  if (rows > 1e4 || cols > 1e6 || (rows + 1) * (cols + 1) > 5e7) throw InvalidArgument("recursion grid too large");

  RecursionState st;
  st.params = p;
  st.grid = g;
  st.boundary = boundary.description;
  st.boundary_f = boundary.f;
  st.boundary_N0 = boundary.N0;
  // grid rows plus the chains N / (1+c)^k above N0, so lookups in N land on rows
  std::vector<std::pair<double, bool>> row_set;
  for (std::size_t k = 0;; ++k) {
    const double N = g.N_min + g.N_step * static_cast<double>(k);
    if (N > g.N_max * (1.0 + 1e-12)) break;
    row_set.emplace_back(N, true);
    for (double m = N / (1.0 + p.c); m > boundary.N0; m /= 1.0 + p.c) row_set.emplace_back(m, false);
  }
  std::sort(row_set.begin(), row_set.end());
  for (const auto& [N, grid_row] : row_set) {
    if (!st.N.empty() && std::abs(N - st.N.back()) <= 1e-12 * N) {
      if (grid_row) st.on_grid.back() = true;
      continue;
    }
    st.N.push_back(N);
    st.on_grid.push_back(grid_row);
  }
  for (std::size_t j = 0;; ++j) {
    const double a = g.a_step * static_cast<double>(j);
    if (a > g.a_max * (1.0 + 1e-12)) break;
    st.a.push_back(a);
  }
  const double logA = std::log(p.A);
  const double k1 = std::pow(p.A, 2.0 - p.delta);
  const double k2 = std::pow(p.A, -p.delta);
  for (double N : st.N) {
    if (N <= boundary.N0) continue;
    const double s1 = p.C1 * N * logA;
    const double s2 = p.variant == RecursionVariant::proof ? s1 : p.C1 * std::log(N);
    if (s1 < g.a_step * (1.0 - 1e-9) || s2 < g.a_step * (1.0 - 1e-9)) {
      std::ostringstream msg;
      msg << "a-step " << g.a_step << " is coarser than the recursion shift at N = " << N << " (shifts " << s1
          << ", " << s2 << ")";
      throw InvalidArgument(msg.str());
    }
  }

  st.M.assign(st.N.size(), std::vector<double>(st.a.size(), 0.0));
  for (std::size_t r = 0; r < st.N.size(); ++r) {
    const double N = st.N[r];
    auto& row = st.M[r];
    if (N <= boundary.N0) {
      for (std::size_t j = 0; j < st.a.size(); ++j) row[j] = std::min(p.ceiling, boundary.f(N, st.a[j]));
      for (std::size_t j = 1; j < row.size(); ++j) row[j] = std::min(row[j], row[j - 1]);
      continue;
    }
    const double s1 = p.C1 * N * logA;
    const double s2 = p.variant == RecursionVariant::proof ? s1 : p.C1 * std::log(N);
    const double Nc = N / (1.0 + p.c);
    const bool off1 = !near_integer(s1 / g.a_step);
    const bool off2 = !near_integer(s2 / g.a_step);
    // row r is filled left to right, so same-row lookups only see finished columns
    for (std::size_t j = 0; j < st.a.size(); ++j) {
      const double a = st.a[j];
      double v = p.ceiling;
      if (a > 0.0) {
        const double t1 = st.at(Nc, a - s1);
        const double t2 = st.at(N, a - s2);
        v = std::min(p.ceiling, k1 * t1 + k2 * t2);
        if (j > 0) v = std::min(v, row[j - 1]);
        if (a - s1 > 0.0 && off1) ++st.interpolated_lookups;
        if (a - s2 > 0.0 && off2) ++st.interpolated_lookups;
      }
      row[j] = v;
    }
  }

  // envelope fit: the edge of the upper hull of (a / N, log M) over the grid
  // nodes spanning the mean abscissa of the unsaturated nodes
  std::vector<std::pair<double, double>> pts;
  for (std::size_t r = 0; r < st.N.size(); ++r) {
    if (!st.on_grid[r]) continue;
    for (std::size_t j = 0; j < st.a.size(); ++j) {
      if (st.M[r][j] > 0.0) pts.emplace_back(st.a[j] / st.N[r], std::log(st.M[r][j]));
    }
  }
  if (!pts.empty()) {
    std::sort(pts.begin(), pts.end());
    const double top = std::log(p.ceiling);
    double xbar = 0.0;
    std::size_t below = 0;
    for (const auto& q : pts) {
      if (q.second < top) {
        xbar += q.first;
        ++below;
      }
    }
    xbar = below > 0 ? xbar / static_cast<double>(below) : 0.0;
    std::vector<std::pair<double, double>> hull;
    for (const auto& q : pts) {
      if (!hull.empty() && hull.back().first == q.first) {
        if (hull.back().second >= q.second) continue;
        hull.pop_back();
      }
      while (hull.size() >= 2) {
        const auto& [x1, y1] = hull[hull.size() - 2];
        const auto& [x2, y2] = hull.back();
        if ((y2 - y1) * (q.first - x1) <= (q.second - y1) * (x2 - x1)) {
          hull.pop_back();
        } else {
          break;
        }
      }
      hull.push_back(q);
    }
    double slope = 0.0;
    double icept = hull.front().second;
    for (std::size_t i = 1; i < hull.size(); ++i) {
      if (hull[i].first >= xbar || i + 1 == hull.size()) {
        slope = (hull[i].second - hull[i - 1].second) / (hull[i].first - hull[i - 1].first);
        icept = hull[i].second - slope * hull[i].first;
        break;
      }
    }
    if (slope > 0.0) {
      slope = 0.0;
      icept = hull.back().second;
    }
    st.beta = -slope;
    for (const auto& [x, y] : pts) st.C = std::max(st.C, std::exp(y + st.beta * x));
    double gap2 = 0.0;
    for (const auto& [x, y] : pts) gap2 += (icept + slope * x - y) * (icept + slope * x - y);
    st.fit_residual = std::sqrt(gap2 / static_cast<double>(pts.size()));
  }
  // A^(2-delta) A^(-c C' beta) <= A^(-C1 beta) - A^(-delta)
  if (st.beta > 0.0) {
    const double room = std::pow(p.A, -p.C1 * st.beta) - k2;
    st.chain_holds = room > 0.0;
    if (st.chain_holds) {
      st.chain_C_prime = std::max(0.0, ((2.0 - p.delta) - std::log(room) / logA) / (p.c * st.beta));
    }
  }
  return st;
}

namespace {

// sup |grad u| over the cells of E: cells ranked by their centre value and
// skipped once a first-order bound cannot beat the running maximum.
double sup_over_set(const HarmonicFunction& u, const GridSet& e, const harmonic::SupOptions& sup) {
  const int n = e.dim();
  const double h = e.cell_side();
  const auto centers = e.centers();
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) order.emplace_back(u.gradient(centers[i]).norm(), i);
  std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  double best = 0.0;
  for (const auto& [g, i] : order) {
    const Point& c = centers[i];
    Point lo = c - Point::filled(n, 0.5 * h);
    Point hi = c + Point::filled(n, 0.5 * h);
    if (e.hyperplane()) lo[n - 1] = hi[n - 1] = c[n - 1];
    double half_diag = 0.0;
    for (int k = 0; k < n; ++k) half_diag += 0.25 * (hi[k] - lo[k]) * (hi[k] - lo[k]);
    if (g + u.hessian_bound(lo, hi) * std::sqrt(half_diag) <= best) continue;
    const harmonic::AxisCube cell(c, h);
    const auto est = e.hyperplane() ? harmonic::sup_grad_slice(u, cell, n - 1, sup) : harmonic::sup_grad(u, cell, sup);
    best = std::max(best, est.value);
  }
  return best;
}

bool covers_half_ball(const GridSet& e) {
  if (e.hyperplane()) return false;
  const int n = e.dim();
  const std::int64_t K = e.resolution();
  std::int64_t total = 1;
  for (int i = 0; i < n; ++i) total *= K;
  for (std::int64_t lin = 0; lin < total; ++lin) {
    const Point lo = e.cell_lo(lin);
    double d2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double a = lo[i];
      const double b = a + e.cell_side();
      const double t = a > 0.0 ? a : (b < 0.0 ? -b : 0.0);
      d2 += t * t;
    }
    if (d2 <= 0.25 && !e.contains_linear(lin)) return false;
  }
  return true;
}

}  // namespace

FitReport fit_propagation_exponent(const std::vector<HarmonicFunction>& family, const GridSet& e,
                                   const FitOptions& opt) {
  if (family.size() < 4) throw InvalidArgument("family too small for a fit (need >= 4 members)");
  if (e.empty()) throw InvalidArgument("E is empty");
  const int n = e.dim();
  for (const auto& u : family) {
    if (u.dim() != n) throw InvalidArgument("family and E differ in dimension");
  }
  for (const auto c : e.cells()) {
    // nearest point of the cell (of its slice, for hyperplane sets)
    const Point lo = e.cell_lo(c);
    double d2 = 0.0;
    for (int i = 0; i < n; ++i) {
      if (e.hyperplane() && i == n - 1) continue;
      const double a = lo[i], b = a + e.cell_side();
      const double t = a > 0.0 ? a : (b < 0.0 ? -b : 0.0);
      d2 += t * t;
    }
    if (d2 > 0.25) throw InvalidArgument("E has a cell outside B(0, 1/2)");
  }
  FitReport rep;
  rep.covers_half_ball = covers_half_ball(e);
  struct Pair {
    double eps;
    double sigma;
  };
  const auto pairs = parallel_map(family.size(), opt.workers, [&](std::size_t i) {
    const auto& u = family[i];
    const auto top = harmonic::sup_grad(u, harmonic::Ball(Point(n), 1.0), opt.sup);
    if (std::abs(top.value - 1.0) > opt.normalization_tolerance + top.error_bound) {
      std::ostringstream msg;
      msg << "family member " << i << " is not normalised on B_1 (sup = " << top.value << ")";
      throw InvalidArgument(msg.str());
    }
    const double sigma = harmonic::sup_grad(u, harmonic::Ball(Point(n), 0.5), opt.sup).value;
    const double eps = rep.covers_half_ball ? sigma : sup_over_set(u, e, opt.sup);
    return Pair{eps, sigma};
  });
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& pr : pairs) {
    if (!(pr.eps > 0.0 && pr.sigma > 0.0)) throw VanishingGradient("gradient vanishes on E or on B_1/2");
    rep.eps.push_back(pr.eps);
    rep.sigma.push_back(pr.sigma);
    const double x = std::log(pr.eps);
    const double y = std::log(pr.sigma);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(pairs.size());
  const double den = m * sxx - sx * sx;
  if (!(den > 1e-12 * m * sxx)) throw InvalidArgument("degenerate family: eps is the same for every member");
  rep.alpha = (m * sxy - sx * sy) / den;
  rep.intercept = (sy - rep.alpha * sx) / m;
  double rss = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double r = std::log(rep.sigma[i]) - (rep.intercept + rep.alpha * std::log(rep.eps[i]));
    rss += r * r;
  }
  rep.residual = std::sqrt(rss / m);
  return rep;
}

WeakBound weak_bound_calculator(double kappa, double epsilon, double C_census, double beta) {
  if (!(kappa > 0.0 && C_census > 0.0 && beta > 0.0)) throw InvalidArgument("kappa, C and beta must be positive");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in (0, 1]");
  const double lc = std::log(C_census);
  const double lk = std::log(kappa);
  const double target = beta * std::log(1.0 / epsilon);
  auto f = [&](double N) { return N * N * N * lc - N * lk - target; };
  WeakBound out;
  if (target <= 0.0) return out;
  if (!(lc > 0.0 || (lc == 0.0 && lk < 0.0))) {
    throw Inapplicable("no positive root: N^3 log C - N log kappa stays below beta log(1/eps)");
  }
  double hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) >= 0.0 ? hi : lo) = mid;
  }
  out.N = hi;
  out.smallness = std::exp(-hi);
  return out;
}

}  // namespace uclab::propagation
