#include <doctest.h>

#include <cmath>
#include <set>

#include "uclab/error.hpp"
#include "uclab/gmt.hpp"

using namespace uclab;
using namespace uclab::gmt;
using lattice::GridSet;

namespace {

const double kCantorDim = std::log(2.0) / std::log(3.0);

GridSet full_face(int n, std::int64_t K) {
  return GridSet::from_predicate(n, K, true, [](const Point&) { return true; });
}

GridSet full_cube(int n, std::int64_t K) {
  return GridSet::from_predicate(n, K, false, [](const Point&) { return true; });
}

// Ternary digits of the cell index: a middle-thirds cell at depth d has no
// digit 1 among its top d places.
bool cantor_cell(std::int64_t j, std::int64_t K, int depth) {
  for (int d = 0; d < depth; ++d) {
    K /= 3;
    if ((j / K) % 3 == 1) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("unit cell energy against independent quadrature") {
  // segment closed form, square closed form, cube by adaptive scipy quadrature
  CHECK(unit_cell_energy(1, 0.5) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
  CHECK(unit_cell_energy(2, 1.0) == doctest::Approx(2.9732095982473785).epsilon(1e-10));
  CHECK(unit_cell_energy(3, 1.0) == doctest::Approx(1.8823126443893532).epsilon(1e-8));
  CHECK(unit_cell_energy(3, 2.0) == doctest::Approx(5.633715158142868).epsilon(1e-7));
  CHECK_THROWS_AS(unit_cell_energy(2, 2.0), InvalidArgument);
  CHECK_THROWS_AS(unit_cell_energy(4, 1.0), InvalidArgument);
}

TEST_CASE("riesz energy examples") {
  DiscreteMeasure two;
  two.atoms = {{Point{0.0, 0.0}, 1.0}, {Point{1.0, 0.0}, 1.0}};
  two.normalize();
  CHECK(two.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  const auto e2 = riesz_energy(two, 1.0);
  CHECK(e2.value == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(e2.method == "atomic");

  DiscreteMeasure one;
  one.atoms = {{Point{0.2, 0.3}, 1.0}};
  CHECK(riesz_energy(one, 0.7).infinite);

  // coincident atoms merge
  DiscreteMeasure dup;
  dup.atoms = {{Point{0.0, 0.0}, 0.25}, {Point{0.0, 0.0}, 0.25}, {Point{0.0, 2.0}, 0.5}};
  const auto ed = riesz_energy(dup, 1.0);
  CHECK(ed.atoms == 2);
  CHECK(ed.value == doctest::Approx(0.25));

  DiscreteMeasure near;
  near.atoms = {{Point{0.0, 0.0}, 0.5}, {Point{1e-12, 0.0}, 0.5}};
  CHECK_THROWS_AS(riesz_energy(near, 1.0), InvalidArgument);
  CHECK_THROWS_AS(riesz_energy(two, 0.0), InvalidArgument);
}

TEST_CASE("adjacent cells interact through the exact pair integral") {
  // unit squares, mean kernel by scipy dblquad over the difference density
  auto pair = [](Point b, double s) {
    DiscreteMeasure mu;
    mu.cell_side = 1.0;
    mu.cell_dim = 2;
    mu.atoms = {{Point{0.0, 0.0}, 0.5}, {b, 0.5}};
    return 2.0 * (riesz_energy(mu, s).value - 0.5 * unit_cell_energy(2, s));
  };
  CHECK(pair(Point{1.0, 0.0}, 1.0) == doctest::Approx(1.1121286898490064).epsilon(1e-9));
  CHECK(pair(Point{-1.0, 1.0}, 1.0) == doctest::Approx(0.7489522185493661).epsilon(1e-9));
  CHECK(pair(Point{1.0, -2.0}, 1.5) == doctest::Approx(0.31154119119800006).epsilon(1e-9));
}

TEST_CASE("segment energy converges to the closed form") {
  const double exact = 2.0 / (0.5 * 1.5);
  double prev_err = 1.0;
  for (std::int64_t K : {9, 27, 81, 243}) {
    const auto mu = DiscreteMeasure::uniform_on(full_face(2, K));
    const auto e = riesz_energy(mu, 0.5);
    CHECK(e.method == "uniform_cell");
    const double err = std::abs(e.value - exact);
    CHECK(err <= prev_err);
    prev_err = err;
  }
  CHECK(prev_err < 1e-4);
  const auto cap = riesz_capacity_lower(full_face(2, 243), 0.5);
  CHECK(cap.lower == doctest::Approx(0.375).epsilon(1e-4));
  // drop-diagonal underestimates the self-interaction
  const auto mu = DiscreteMeasure::uniform_on(full_face(2, 81));
  CHECK(riesz_energy(mu, 0.5, SelfEnergy::drop_diagonal).value < riesz_energy(mu, 0.5).value);
}

TEST_CASE("unit face capacity against quadrature oracle") {
  // 1 / J_2(1), J_2(1) = int over two unit squares of |x - y|^-1
  const double oracle = 1.0 / 2.9732095982475597;
  const auto cap = riesz_capacity_lower(full_face(3, 27), 1.0, {.workers = 2});
  CHECK(cap.atoms == 729);
  CHECK(cap.lower == doctest::Approx(oracle).epsilon(1e-4));
  CHECK_THROWS_AS(riesz_capacity_lower(full_face(3, 9), 2.0), InvalidArgument);
  CHECK_THROWS_AS(riesz_capacity_lower(full_cube(2, 9), 2.0), InvalidArgument);
}

TEST_CASE("single cell capacity scales like the side to the s") {
  const double s = 0.8;
  double ratio = 0.0;
  for (std::int64_t K : {3, 9, 27, 81}) {
    GridSet e(2, K);
    e.insert({K / 2, K / 2});
    const double cap = riesz_capacity_lower(e, s).lower;
    const double scaled = cap * std::pow(static_cast<double>(K), s);
    if (ratio > 0.0) CHECK(scaled == doctest::Approx(ratio).epsilon(1e-12));
    ratio = scaled;
  }
  CHECK(ratio == doctest::Approx(1.0 / unit_cell_energy(2, s)).epsilon(1e-12));
}

TEST_CASE("greedy redistribution descends and capacity is monotone on nested sets") {
  const auto f = full_cube(2, 27);
  const auto e = GridSet::from_predicate(2, 27, false, [](const Point& p) { return p[0] + p[1] < 0.3; });
  REQUIRE(e.subset_of(f));
  CapacityOptions greedy{.family = MeasureFamily::greedy_redistribution, .sweeps = 6};
  const auto ce = riesz_capacity_lower(e, 1.2, greedy);
  const auto cf = riesz_capacity_lower(f, 1.2, greedy);
  for (const auto* c : {&ce, &cf}) {
    REQUIRE(c->sweep_energies.size() >= 2);
    for (std::size_t i = 1; i < c->sweep_energies.size(); ++i) {
      CHECK(c->sweep_energies[i] <= c->sweep_energies[i - 1]);
    }
    CHECK(c->lower >= 1.0 / c->sweep_energies.front());
  }
  CHECK(ce.lower <= cf.lower);
  CHECK(riesz_capacity_lower(e, 1.2).lower <= riesz_capacity_lower(f, 1.2).lower);
}

TEST_CASE("large sets are thinned to a subset") {
  const auto big = full_cube(2, 243);
  const auto cap = riesz_capacity_lower(big, 1.0, {.max_atoms = 800});
  CHECK(cap.subsampled);
  CHECK(cap.atoms <= 800);
  CHECK(cap.lower > 0.0);
  CHECK(cap.lower <= 1.0 / unit_cell_energy(2, 1.0) * 1.01);
}

TEST_CASE("hausdorff content examples") {
  SUBCASE("segment is exactly one") {
    const auto est = hausdorff_content(full_face(2, 81), 1.0);
    CHECK(est.upper == 1.0);
    CHECK(est.lower > 0.0);
    CHECK(est.lower <= est.upper);
    CHECK_FALSE(est.coarse);
    REQUIRE(est.cover.size() == 1);
    CHECK(est.cover.front().generation() == 0);
  }
  SUBCASE("single cell") {
    for (double s : {0.5, 1.0, 1.7}) {
      GridSet e(2, 27);
      e.insert({4, 20});
      const auto est = hausdorff_content(e, s);
      const double d = std::sqrt(2.0) / 27.0;
      CHECK(est.upper == doctest::Approx(std::pow(d, s)).epsilon(1e-12));
      CHECK(est.lower > 0.0);
      CHECK(est.upper <= std::pow(2.0, s) * est.lower);
      REQUIRE(est.cover.size() == 1);
      CHECK(est.cover.front().generation() == 3);
      CHECK(est.cover.front().center()[0] == doctest::Approx(e.cell_center(e.cells().front())[0]));
    }
  }
  SUBCASE("middle-thirds Cantor set") {
    const auto e = cantor_product({kCantorDim}, 5, true);
    CHECK(e.resolution() == 243);
    CHECK(e.size() == 32);
    const auto est = hausdorff_content(e, kCantorDim);
    CHECK(est.upper >= 0.5);
    CHECK(est.upper <= 1.5);
    CHECK(est.lower >= 0.5);
    CHECK(est.lower <= est.upper);
  }
  SUBCASE("coarse search still bounds from above") {
    const auto e = cantor_product({kCantorDim}, 5, true);
    const auto fine = hausdorff_content(e, kCantorDim);
    const auto coarse = hausdorff_content(e, kCantorDim, 2);
    CHECK(coarse.coarse);
    CHECK(coarse.upper >= fine.upper);
  }
}

TEST_CASE("content upper bound agrees with a brute-force DP") {
  // recursive top-down oracle over nodes (level, index), n = 2 generic sets
  const std::int64_t K = 27;
  const auto e = GridSet::from_predicate(2, K, false, [](const Point& p) {
    return std::abs(p[0] * p[0] - p[1]) < 0.08 || (p[0] > 0.3 && p[1] < -0.2);
  });
  for (double s : {0.6, 1.0, 1.5}) {
    std::function<double(int, std::int64_t, std::int64_t)> best = [&](int L, std::int64_t i, std::int64_t j) {
      const std::int64_t span = K / static_cast<std::int64_t>(std::pow(3, L));
      bool any = false;
      for (std::int64_t a = i * span; a < (i + 1) * span && !any; ++a) {
        for (std::int64_t b = j * span; b < (j + 1) * span && !any; ++b) any = e.contains({a, b});
      }
      if (!any) return 0.0;
      const double whole = std::pow(std::sqrt(2.0) * std::pow(3.0, -L), s);
      if (span == 1) return whole;
      double split = 0.0;
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) split += best(L + 1, 3 * i + a, 3 * j + b);
      }
      return std::min(whole, split);
    };
    const auto est = hausdorff_content(e, s);
    CHECK(est.upper == doctest::Approx(best(0, 0, 0)).epsilon(1e-12));
    double cover_cost = 0.0;
    for (const auto& q : est.cover) cover_cost += std::pow(std::sqrt(2.0) * q.side(), s);
    CHECK(cover_cost == doctest::Approx(est.upper).epsilon(1e-12));
    CHECK(est.lower <= est.upper);
  }
}

TEST_CASE("content properties") {
  SUBCASE("triadic scaling") {
    const double s = kCantorDim;
    const auto e = cantor_product({kCantorDim, kCantorDim}, 3, false);
    const std::int64_t K = e.resolution();
    // shrink by 3 into the corner block
    GridSet small(2, 3 * K);
    for (auto c : e.cells()) {
      const auto idx = e.unlinear(c);
      small.insert({idx[0], idx[1]});
    }
    const double big = hausdorff_content(e, s).upper;
    const double shrunk = hausdorff_content(small, s).upper;
    CHECK(shrunk == doctest::Approx(std::pow(1.0 / 3.0, s) * big).epsilon(1e-12));
  }
  SUBCASE("subadditivity") {
    const auto a = GridSet::from_predicate(2, 81, false, [](const Point& p) { return std::abs(p[0]) < 0.05; });
    const auto b = GridSet::from_predicate(2, 81, false, [](const Point& p) { return std::abs(p[1] - 0.2) < 0.05; });
    const auto u = GridSet::from_predicate(2, 81, false, [&](const Point& p) {
      return std::abs(p[0]) < 0.05 || std::abs(p[1] - 0.2) < 0.05;
    });
    for (double s : {0.7, 1.0, 1.6}) {
      CHECK(hausdorff_content(u, s).upper <=
            hausdorff_content(a, s).upper + hausdorff_content(b, s).upper + 1e-12);
    }
  }
  SUBCASE("non-product sets without prefix table report no lower bound") {
    // 3^15 cells per axis is too many for the table
    GridSet e(2, 14348907);
    e.insert({0, 0});
    e.insert({5, 7});
    const auto est = hausdorff_content(e, 0.5, 3);
    CHECK_FALSE(est.lower_available);
    CHECK(est.lower == 0.0);
  }
}

TEST_CASE("cantor sets") {
  const auto iv = cantor_intervals(kCantorDim, 2);
  REQUIRE(iv.size() == 4);
  CHECK(iv[0].first == -0.5);
  CHECK(iv[0].second == doctest::Approx(-0.5 + 1.0 / 9.0));
  CHECK(iv[3].second == 0.5);

  SUBCASE("middle thirds matches the ternary digit rule") {
    const auto e = cantor_product({kCantorDim}, 4, false);
    CHECK(e.resolution() == 81);
    std::size_t expected = 0;
    for (std::int64_t j = 0; j < 81; ++j) expected += cantor_cell(j, 81, 4) ? 1 : 0;
    CHECK(e.size() == expected);
    for (auto c : e.cells()) CHECK(cantor_cell(e.unlinear(c)[0], 81, 4));
  }
  SUBCASE("placements") {
    const auto face = cantor_product_set(2.0, 3, 3, Placement::hyperplane);
    CHECK(face == full_face(3, 27));
    const auto line = cantor_product_set(kCantorDim, 2, 4, Placement::hyperplane);
    CHECK(line.hyperplane());
    CHECK(line.size() == 16);
    const auto generic = cantor_product_set(1.5, 3, 4, Placement::generic);
    CHECK_FALSE(generic.hyperplane());
    CHECK_THROWS_AS(cantor_product_set(2.5, 3, 3, Placement::hyperplane), InvalidArgument);
    CHECK_THROWS_AS(cantor_product_set(3.0, 3, 3, Placement::generic), InvalidArgument);
    CHECK_THROWS_AS(cantor_product_set(0.5, 2, 0, Placement::generic), InvalidArgument);
  }
  SUBCASE("generic ratios keep every interval at least one cell") {
    const double dim = 0.5;
    const auto e = cantor_product({dim}, 4, false);
    const double K = static_cast<double>(e.resolution());
    for (const auto& [a, b] : cantor_intervals(dim, 4)) {
      CHECK((b - a) * K >= 1.0 - 1e-9);
      const auto j = static_cast<std::int64_t>(std::floor((0.5 * (a + b) + 0.5) * K));
      CHECK(e.contains_linear(j));
    }
  }
  SUBCASE("dimension 1.5 in n = 3 has positive content lower bound") {
    const auto e = cantor_product_set(1.5, 3, 4, Placement::generic);
    const auto est = hausdorff_content(e, 1.5);
    CHECK(est.lower_available);
    CHECK(est.lower > 0.05);
    CHECK(est.lower <= est.upper);
  }
}

TEST_CASE("cubes meeting a Cantor product match exhaustive enumeration") {
  const auto e = cantor_product({kCantorDim, 1.0}, 4, false);
  for (std::int64_t D : {3, 9, 27, 81}) {
    std::set<std::int64_t> brute;
    // closed cells [j/K, (j+1)/K] against closed cubes [i/D, (i+1)/D]
    const std::int64_t K = e.resolution();
    for (auto c : e.cells()) {
      const auto idx = e.unlinear(c);
      std::vector<std::vector<std::int64_t>> hits(2);
      for (int ax = 0; ax < 2; ++ax) {
        for (std::int64_t i = 0; i < D; ++i) {
          const auto j = idx[static_cast<std::size_t>(ax)];
          if (i * K <= (j + 1) * D && (i + 1) * K >= j * D) hits[static_cast<std::size_t>(ax)].push_back(i);
        }
      }
      for (auto a : hits[0]) {
        for (auto b : hits[1]) brute.insert(a * D + b);
      }
    }
    const auto got = lattice::cubes_meeting_set_indices(D, e);
    CHECK(std::vector<std::int64_t>(brute.begin(), brute.end()) == got);
  }
}

TEST_CASE("counting bound") {
  SUBCASE("unit face") {
    const auto face = full_face(3, 243);
    for (std::int64_t K : {27, 81, 243}) {
      const auto r = lattice::counting_lower_bound_check(face, 2.0, K);
      CHECK(r.count == K * K);
      CHECK(r.content_upper == doctest::Approx(2.0));
      CHECK(r.ratio == doctest::Approx(0.5));
    }
  }
  SUBCASE("Cantor times face stays in a factor-10 band") {
    const auto e = cantor_product({kCantorDim, 1.0, 0.0}, 5, true);
    const double s = 1.0 + kCantorDim;
    double lo = 1e300;
    double hi = 0.0;
    for (std::int64_t K : {27, 81, 243}) {
      const auto r = lattice::counting_lower_bound_check(e, s, K);
      CHECK_FALSE(r.vacuous);
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
    CHECK(hi <= 10.0 * lo);
  }
  SUBCASE("point is vacuous") {
    GridSet p(2, 81);
    p.insert({40, 40});
    CHECK(lattice::counting_lower_bound_check(p, 0.5, 27).vacuous);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(lattice::counting_lower_bound_check(GridSet(2, 27), 1.0, 27), InvalidArgument);
    CHECK_THROWS_AS(lattice::counting_lower_bound_check(full_face(2, 27), 1.0, 4), InvalidArgument);
  }
}

TEST_CASE("growth constant controls the energy") {
  for (double delta : {0.25, 0.5, 1.0}) {
    const auto e = cantor_product_set(1.0 + 0.6, 3, 3, Placement::generic);
    const auto rep = claim1_check(e, delta);
    CHECK(rep.growth_exponent == doctest::Approx(1.0 + delta / 2));
    CHECK(rep.energy_exponent == doctest::Approx(1.0 + delta / 4));
    CHECK(rep.growth_constant > 0.0);
    CHECK(rep.energy > 0.0);
    CHECK(rep.holds);
  }
  const auto face = full_face(2, 81);
  const auto r = claim1_check(face, 0.5);
  CHECK(r.holds);
  CHECK(r.energy <= r.bound);
}
