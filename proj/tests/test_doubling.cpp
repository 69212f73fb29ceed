#include <cmath>
#include <numbers>

#include "doctest.h"
#include "uclab/doubling.hpp"
#include "uclab/error.hpp"
#include "uclab/zoo.hpp"

using namespace uclab;
using namespace uclab::doubling;
using harmonic::HarmonicFunction;

namespace {

HarmonicFunction x1(int n) {
  std::vector<int> e(static_cast<std::size_t>(n), 0);
  e[0] = 1;
  return HarmonicFunction::polynomial(n, {{e, 1.0}});
}
HarmonicFunction saddle() { return HarmonicFunction::polynomial(2, {{{2, 0}, 1.0}, {{0, 2}, -1.0}}); }
HarmonicFunction cubic() { return HarmonicFunction::polynomial(2, {{{3, 0}, 1.0}, {{1, 2}, -3.0}}); }

// sup of |grad u| over the closed disk B(c, r) by dense sampling of the
// boundary circle (|grad u|^2 is subharmonic)
double brute_sup_2d(const HarmonicFunction& u, const Point& c, double r, int samples) {
  double best = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = 2.0 * std::numbers::pi * k / samples;
    best = std::max(best, u.gradient(Point{c[0] + r * std::cos(t), c[1] + r * std::sin(t)}).norm());
  }
  return best;
}

std::vector<HarmonicFunction> small_zoo(int n, int count, std::uint64_t seed) {
  std::vector<HarmonicFunction> out;
  for (const auto& e : zoo::randomized_zoo(n, count, seed, 6)) out.push_back(e.u);
  return out;
}

}  // namespace

TEST_CASE("doubling_index examples") {
  for (int n : {2, 3}) {
    const auto r = doubling_index(x1(n), Point::filled(n, 0.2), 0.3);
    CHECK(r.index_value == 0.0);
    CHECK(r.error_bound == 0.0);
    CHECK(r.variant == Variant::sup_ratio);
  }
  for (int n : {2, 3}) {
    for (int d : {2, 3, 5}) {
      const auto u = HarmonicFunction::from_polynomial(zoo::homogeneous_basis(n, d).front());
      harmonic::SupOptions opt;
      opt.tolerance = 1e-5;
      for (double r : {0.1, 0.7}) {
        const auto rep = doubling_index(u, Point::filled(n, 0.0), r, opt);
        CHECK(std::abs(rep.index_value - (d - 1) * std::log(2.0)) <= 1e-9);
        CHECK(rep.error_bound <= 4.1e-5);
      }
    }
  }
  // frozen from 10^6-sample brute force per ball
  const double frozen = 0.28768207244950383;
  const auto rep = doubling_index(saddle(), Point{0.5, 0.0}, 0.25);
  CHECK(std::abs(rep.index_value - frozen) <= rep.error_bound + 1e-9);
  const double oracle = std::log(brute_sup_2d(saddle(), {0.5, 0.0}, 0.5, 1000000) /
                                 brute_sup_2d(saddle(), {0.5, 0.0}, 0.25, 1000000));
  CHECK(std::abs(oracle - frozen) <= 1e-9);
  CHECK(rep.error_bound <= 3e-6);
}

TEST_CASE("doubling_index errors") {
  const auto c = HarmonicFunction::polynomial(2, {{{0, 0}, 1.0}});
  CHECK_THROWS_AS(doubling_index(c, Point{0, 0}, 0.5), VanishingGradient);
  const auto tiny = x1(2).with_scale(1e-40);
  CHECK_THROWS_AS(doubling_index(tiny, Point{0, 0}, 0.5), VanishingGradient);
  CHECK_THROWS_AS(doubling_index(x1(2), Point{0, 0}, -1.0), InvalidArgument);
  const auto q = HarmonicFunction::point_charges(2, {{Point{1.0, 0.0}, 1.0}});
  CHECK_THROWS_AS(doubling_index(q, Point{0, 0}, 0.6), DomainError);
}

TEST_CASE("l2_doubling_index examples") {
  CHECK(l2_doubling_index(x1(2), Point{0.1, 0.1}, 0.4).index_value == 0.0);
  for (int n : {2, 3}) {
    for (int d : {2, 4}) {
      const auto u = HarmonicFunction::from_polynomial(zoo::homogeneous_basis(n, d).back());
      const auto rep = l2_doubling_index(u, Point::filled(n, 0.0), 0.3);
      CHECK(rep.index_value == doctest::Approx(2 * (d - 1) * std::log(2.0)).epsilon(1e-11));
    }
  }
  // frozen from a 320 x 640 Gauss-Legendre / trapezoid polar rule
  const double frozen = 0.005375821806621075;
  const auto u = HarmonicFunction::polynomial(2, {{{1, 0}, 1.0}, {{2, 0}, 0.1}, {{0, 2}, -0.1}});
  const auto rep = l2_doubling_index(u, Point{0, 0}, 0.3);
  CHECK(rep.variant == Variant::l2_ratio);
  CHECK(std::abs(rep.index_value - frozen) <= 1e-12);
}

TEST_CASE("maximal_doubling examples") {
  const auto q = lattice::Cube::unit(2);
  MaximalOptions opt;
  opt.grid_density = 3;
  opt.rungs = 2;
  const auto lin = maximal_doubling(x1(2), q, opt);
  CHECK(lin.index_value == 0.0);
  CHECK(lin.is_lower_bound);
  CHECK(lin.ratio == 20.0);

  for (int d : {2, 4}) {
    const auto u = HarmonicFunction::from_polynomial(zoo::homogeneous_basis(2, d).back());
    const auto rep = maximal_doubling(u, subdivide(q, 1)[4], opt);  // centred at the origin
    CHECK(rep.index_value >= (d - 1) * std::log(20.0) - 1e-3);
  }

  // Q = [0.2, 0.3]^2 as a generation-2 cube of the root [0, 0.9]^2
  const auto root = lattice::Cube::root(Point{0.45, 0.45}, 0.9);
  const auto level1 = subdivide(root, 4);
  const lattice::Cube cell = level1[2 * 9 + 2];
  REQUIRE(cell.lo()[0] == doctest::Approx(0.2));
  REQUIRE(cell.side() == doctest::Approx(0.1));
  MaximalOptions full;
  const auto rep = maximal_doubling(cubic(), cell, full);
  CHECK(rep.samples == 81 * 8);
  // frozen: same grid by boundary brute force, and the 90 x 90 dense grid
  const double frozen_grid = 3.537347765470915;
  const double frozen_dense = 3.5676930273824685;
  CHECK(rep.index_value <= frozen_grid + 1e-12);
  CHECK(rep.index_value >= frozen_grid - 4 * full.sup.tolerance);
  CHECK(rep.index_value <= frozen_dense);
  // the true supremum sits at the corner nearest the origin
  const double c = std::hypot(0.2, 0.2);
  CHECK(frozen_dense <= 2 * std::log((c + 2.0) / (c + 0.1)));
}

TEST_CASE("three_spheres_defect examples") {
  for (int n : {2, 3}) {
    const auto u = HarmonicFunction::spherical(n, {{3, n == 2 ? 3 : 1, 1.0}});
    const auto t = three_spheres_defect(u, Point::filled(n, 0.0), 0.2, 0.5, 0.9);
    CHECK(std::abs(t.defect) <= 1e-12);
    const auto two = n == 2 ? HarmonicFunction::spherical(2, {{1, 1, 1.0}, {4, -4, 1.0}})
                            : HarmonicFunction::spherical(3, {{1, 0, 1.0}, {4, 1, 1.0}});
    const auto s = three_spheres_defect(two, Point::filled(n, 0.0), 0.2, 0.5, 0.9);
    CHECK(s.defect < -1e-3);
    const auto same = three_spheres_defect(two, Point::filled(n, 0.0), 0.4, 0.4, 0.9);
    CHECK(same.alpha == 1.0);
    CHECK(same.defect == 0.0);
  }
  // oracle: for sum a_d r^d e_d with orthonormal e_d the norm is closed form
  const auto two = HarmonicFunction::spherical(2, {{1, 1, 1.0}, {4, -4, 1.0}});
  auto norm = [](double r) { return std::sqrt(r * (r * r + std::pow(r, 8))); };
  const double a = std::log(0.9 / 0.5) / std::log(0.9 / 0.2);
  const double exact = std::log(norm(0.5)) - a * std::log(norm(0.2)) - (1 - a) * std::log(norm(0.9));
  CHECK(three_spheres_defect(two, Point{0, 0}, 0.2, 0.5, 0.9).defect == doctest::Approx(exact).epsilon(1e-10));
  CHECK_THROWS_AS(three_spheres_defect(two, Point{0, 0}, 0.5, 0.2, 0.9), InvalidArgument);
}

TEST_CASE("big_scale_doubling_check examples") {
  for (int n : {2, 3}) {
    const int d = 4;
    const auto u = HarmonicFunction::from_polynomial(zoo::homogeneous_basis(n, d).front());
    harmonic::SupOptions opt;
    opt.tolerance = 1e-5;
    for (double t : {0.1, 0.25, 0.4}) {
      const auto rep = big_scale_doubling_check(u, Point::filled(n, 0.0), 0.8, t, 1.0, 0.0, opt);
      CHECK(rep.applicable);
      CHECK(rep.exponent == doctest::Approx(d - 1).epsilon(1e-9));
      CHECK(rep.holds);
    }
  }
  const auto lin = big_scale_doubling_check(x1(2), Point{0, 0}, 1.0, 0.25, 0.5);
  CHECK_FALSE(lin.applicable);
  CHECK_FALSE(lin.holds);

  zoo::Rng rng(2024);
  const auto u = zoo::random_harmonic_polynomial(2, 10, 10, rng);
  const Point x{0.1, 0.1};
  const auto rep = big_scale_doubling_check(u, x, 0.5, 0.125, 0.1);
  REQUIRE(rep.applicable);
  const double oracle = std::log(brute_sup_2d(u, x, 0.0625, 200000) / brute_sup_2d(u, x, 0.5, 200000)) /
                        std::log(0.125);
  const double frozen = 4.9597785474139799;  // boundary brute force, 2e5 and 2e6 samples agree
  CHECK(std::abs(oracle - frozen) <= 1e-7);
  CHECK(std::abs(rep.exponent - frozen) <= rep.exponent_error + 1e-7);
  CHECK_THROWS_AS(big_scale_doubling_check(u, x, 0.5, 0.5, 0.1), InvalidArgument);
}

TEST_CASE("nonnegativity and scaling invariance on the zoo") {
  harmonic::SupOptions opt;
  opt.tolerance = 1e-5;
  for (int n : {2, 3}) {
    for (const auto& u : small_zoo(n, 6, 31)) {
      const Point x = Point::filled(n, 0.1);
      const auto rep = doubling_index(u, x, 0.2, opt);
      CHECK(rep.index_value >= -rep.error_bound);
      CHECK(l2_doubling_index(u, x, 0.2).index_value >= -1e-12);

      const double lambda = 0.5;
      const Point b = Point::filled(n, 0.05);
      std::vector<double> id(static_cast<std::size_t>(n * n), 0.0);
      for (int i = 0; i < n; ++i) id[static_cast<std::size_t>(i * n + i)] = 1.0;
      const auto v = u.compose_affine(lambda, id, b);
      const Point y = Point::filled(n, 0.1);
      const auto lhs = doubling_index(v, y, 0.3, opt);
      const auto rhs = doubling_index(u, y * lambda + b, lambda * 0.3, opt);
      CHECK(std::abs(lhs.index_value - rhs.index_value) <= lhs.error_bound + rhs.error_bound + 1e-12);
    }
  }
}

TEST_CASE("N2 is monotone in r and N is almost monotone") {
  double c_emp = -1e300;
  for (int n : {2, 3}) {
    for (const auto& u : small_zoo(n, 5, 77)) {
      const Point x = Point::filled(n, 0.05);
      double prev = -1.0;
      double prev_err = 0.0;
      for (int k = 0; k < 16; ++k) {
        const auto rep = l2_doubling_index(u, x, 0.02 * std::pow(1.25, k));
        CHECK(rep.index_value >= prev - 2 * std::max(prev_err, rep.error_bound) - 1e-12);
        prev = rep.index_value;
        prev_err = rep.error_bound;
      }
      harmonic::SupOptions opt;
      opt.tolerance = 1e-4;
      c_emp = std::max(c_emp, almost_monotonicity_excess(u, x, 0.4, 0.25, opt));
    }
  }
  CHECK(c_emp <= 10.0);
}

TEST_CASE("three spheres inequality on the zoo") {
  for (int n : {2, 3}) {
    for (const auto& u : small_zoo(n, 6, 99)) {
      const auto t = three_spheres_defect(u, Point::filled(n, 0.1), 0.1, 0.3, 0.7);
      CHECK(t.defect <= t.error_bound + 1e-12);
    }
  }
}

TEST_CASE("cube classification") {
  ClassifyOptions opt;
  opt.maximal.grid_density = 3;
  opt.maximal.rungs = 2;
  const auto q = lattice::Cube::unit(2);
  const auto u = HarmonicFunction::from_polynomial(zoo::homogeneous_basis(2, 4).back());
  const auto centre = subdivide(q, 1)[4];
  // N(Q) >= 3 log 20 ~ 8.99 at the centre
  CHECK(classify_cube(u, centre, 4.0, opt).cls == CubeClass::bad);
  CHECK(classify_cube(x1(2), centre, 1.0, opt).cls == CubeClass::good);
  const auto mid = classify_cube(u, centre, 3 * std::log(20.0), opt);
  CHECK(mid.cls == CubeClass::undecided);
  CHECK_THROWS_AS(classify_cube(u, centre, 0.0, opt), InvalidArgument);
}
