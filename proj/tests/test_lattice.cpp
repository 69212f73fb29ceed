#include <doctest.h>

#include <set>

#include "uclab/lattice.hpp"
#include "uclab/zoo.hpp"

using namespace uclab;
using namespace uclab::lattice;

namespace {

using Idx = std::array<std::int64_t, kMaxDim>;

// Brute force: cube [i/D, (i+1)/D] and cell [j/K, (j+1)/K] per axis, closed,
// compared by cross-multiplication; hyperplane cells collapse to the point 1/2.
bool meets(const Cube& q, const GridSet& e, std::int64_t cell) {
  const auto idx = e.unlinear(cell);
  const std::int64_t D = q.denominator();
  const std::int64_t K = e.resolution();
  for (int a = 0; a < q.dim(); ++a) {
    const std::int64_t i = q.index(a);
    const std::int64_t j = idx[static_cast<std::size_t>(a)];
    if (e.hyperplane() && a == q.dim() - 1) {
      // 2i <= D <= 2(i+1)
      if (!(2 * i <= D && D <= 2 * (i + 1))) return false;
      continue;
    }
    if (!(i * K <= (j + 1) * D && (i + 1) * K >= j * D)) return false;
  }
  return true;
}

std::vector<Cube> oracle_meeting(const std::vector<Cube>& level, const GridSet& e) {
  std::vector<Cube> out;
  for (const auto& q : level) {
    for (auto c : e.cells()) {
      if (meets(q, e, c)) {
        out.push_back(q);
        break;
      }
    }
  }
  return out;
}

GridSet random_set(int n, std::int64_t K, double density, zoo::Rng& rng, bool hyperplane = false) {
  return GridSet::from_predicate(n, K, hyperplane, [&](const Point&) { return rng.uniform() < density; });
}

}  // namespace

TEST_CASE("subdivide examples") {
  for (int n : {1, 2, 3}) {
    const auto kids = subdivide(Cube::unit(n), 1);
    REQUIRE(kids.size() == static_cast<std::size_t>(std::pow(3, n)));
    CHECK(kids.front().side() == doctest::Approx(1.0 / 3).epsilon(1e-15));
    for (int i = 0; i < n; ++i) CHECK(kids.front().center()[i] == doctest::Approx(-1.0 / 3).epsilon(1e-15));
    const auto grand = subdivide(kids[1], 1);
    CHECK(grand.front().side() == doctest::Approx(1.0 / 9).epsilon(1e-15));
    CHECK(grand.front().generation() == 2);
  }
  const auto root = Cube::root(Point{0.5, 0.25}, 2.0);
  const auto kids = subdivide(root, 1);
  CHECK(kids.front().center()[0] == doctest::Approx(0.5 - 2.0 / 3).epsilon(1e-15));
  CHECK(kids.front().center()[1] == doctest::Approx(0.25 - 2.0 / 3).epsilon(1e-15));

  const auto nine = subdivide(Cube::unit(2), 4);
  CHECK(nine.size() == 81);
  CHECK_THROWS_AS(subdivide(Cube::unit(2), 2), InvalidArgument);
  CHECK_THROWS_AS(subdivide(Cube::unit(2), 0), InvalidArgument);
  CHECK_NOTHROW(subdivide(Cube::unit(2), 13));
}

TEST_CASE("children tile the parent exactly and are lexicographic") {
  for (int n : {1, 2, 3}) {
    for (int A : {1, 4}) {
      const int b = 2 * A + 1;
      const auto parent = subdivide(Cube::unit(n), 1)[1];
      const auto kids = subdivide(parent, A);
      std::set<std::vector<std::int64_t>> seen;
      std::vector<std::int64_t> prev;
      for (const auto& k : kids) {
        CHECK(k.denominator() == parent.denominator() * b);
        std::vector<std::int64_t> idx;
        for (int i = 0; i < n; ++i) {
          CHECK(k.index(i) / b == parent.index(i));
          idx.push_back(k.index(i));
        }
        if (!prev.empty()) CHECK(prev < idx);
        prev = idx;
        seen.insert(idx);
      }
      // b^n distinct sub-indices inside the parent's range: exact tiling
      CHECK(seen.size() == static_cast<std::size_t>(std::pow(b, n)));
    }
  }
}

TEST_CASE("path replays to the same cube") {
  zoo::Rng rng(3);
  for (int n : {2, 3}) {
    const auto root = Cube::root(Point::filled(n, 0.1), 3.0);
    Cube c = root;
    for (int g = 0; g < 6; ++g) {
      const int A = g % 2 == 0 ? 1 : 4;
      const auto kids = subdivide(c, A);
      c = kids[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(kids.size()) - 1))];
    }
    const auto again = follow_path(root, c.path());
    CHECK(again == c);
    for (int i = 0; i < n; ++i) CHECK(again.center()[i] == c.center()[i]);
  }
}

TEST_CASE("hyperplane_children examples") {
  CHECK(hyperplane_children(Cube::unit(2), 1).size() == 3);
  CHECK(hyperplane_children(Cube::unit(3), 4).size() == 81);
  for (const auto& c : hyperplane_children(Cube::unit(3), 4)) CHECK(c.center()[2] == 0.0);
  const auto off = subdivide(Cube::unit(2), 1).front();
  CHECK_THROWS_AS(hyperplane_children(off, 1), InvalidArgument);
  // a plane on a child boundary meets two layers
  CHECK(hyperplane_children(Cube::unit(2), 1, 1, 1.0 / 6).size() == 6);
}

TEST_CASE("cube tree levels") {
  CubeTree tree(Cube::unit(2), 1);
  tree.materialize(3);
  CHECK(tree.generations() == 3);
  CHECK(tree.level(3).size() == 729);
  for (const auto& c : tree.level(3)) CHECK(c.side() == doctest::Approx(1.0 / 27).epsilon(1e-15));
  CHECK_THROWS_AS(tree.level(4), InvalidArgument);
}

TEST_CASE("cubes_meeting_set examples") {
  CubeTree tree(Cube::unit(2), 1);
  tree.materialize(2);
  const auto& level = tree.level(2);  // side 1/9

  GridSet interior(2, 27);
  interior.insert(Idx{4, 4});  // centre cell of cube (1, 1)
  CHECK(cubes_meeting_set(level, interior).size() == 1);

  GridSet corner(2, 27);
  corner.insert(Idx{2, 2});  // touches the corner shared by four cubes
  CHECK(cubes_meeting_set(level, corner).size() == 4);

  const auto bottom = GridSet::from_predicate(2, 27, false, [](const Point& p) { return p[1] < -0.5 + 1.0 / 27; });
  CHECK(cubes_meeting_set(level, bottom).size() == 9);

  GridSet even(2, 8);
  even.insert(Idx{0, 0});
  CHECK_THROWS_AS(cubes_meeting_set(level, even), InvalidArgument);
  const auto shifted = subdivide(Cube::root(Point{0.1, 0.0}, 1.0), 1);
  CHECK_THROWS_AS(cubes_meeting_set(shifted, interior), InvalidArgument);
}

TEST_CASE("cubes_meeting_set agrees with brute force and is monotone") {
  zoo::Rng rng(17);
  for (int n : {2, 3}) {
    CubeTree tree(Cube::unit(n), 1);
    tree.materialize(n == 2 ? 3 : 2);
    for (std::int64_t K : {9, 27, 81}) {
      if (n == 3 && K == 81) continue;
      for (bool hp : {false, true}) {
        const auto e = random_set(n, K, 0.02, rng, hp);
        auto f = e;
        const auto extra = random_set(n, K, 0.05, rng, hp);
        for (auto c : extra.cells()) f.insert_linear(c);
        REQUIRE(e.subset_of(f));
        for (int g = 0; g <= tree.generations(); ++g) {
          const auto se = cubes_meeting_set(tree.level(g), e);
          const auto sf = cubes_meeting_set(tree.level(g), f);
          CHECK(se == oracle_meeting(tree.level(g), e));
          for (const auto& q : se) CHECK(std::find(sf.begin(), sf.end(), q) != sf.end());
        }
      }
    }
  }
}

TEST_CASE("shrink_to_center maps cells to their images") {
  zoo::Rng rng(8);
  for (bool hyper : {false, true}) {
    const auto e = random_set(2, 9, 0.4, rng, hyper);
    const auto s = shrink_to_center(e, 2);
    CHECK(s.resolution() == 81);
    CHECK(s.hyperplane() == hyper);
    REQUIRE(s.size() == e.size());
    const auto a = e.centers();
    const auto b = s.centers();
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (int k = 0; k < 2; ++k) CHECK(b[i][k] == doctest::Approx(a[i][k] / 9.0).epsilon(1e-12));
    }
  }
  CHECK(shrink_to_center(GridSet(2, 3), 0) == GridSet(2, 3));
  CHECK_THROWS_AS(shrink_to_center(GridSet(2, 3), -1), InvalidArgument);
}

TEST_CASE("GridSet run-length round trip") {
  zoo::Rng rng(5);
  for (int n : {1, 2, 3}) {
    const auto e = random_set(n, 27, 0.3, rng);
    const auto back = GridSet::from_runs(n, 27, false, e.runs());
    CHECK(back == e);
  }
  const auto hp = random_set(3, 27, 0.5, rng, true);
  CHECK(GridSet::from_runs(3, 27, true, hp.runs()) == hp);
  GridSet full(2, 3);
  for (std::int64_t c = 0; c < 9; ++c) full.insert_linear(c);
  REQUIRE(full.runs().size() == 1);
  CHECK(full.runs()[0].length == 9);
  CHECK_THROWS_AS(GridSet::from_runs(2, 3, false, {{5, 1}, {2, 1}}), InvalidArgument);
  CHECK_THROWS_AS(GridSet::from_runs(2, 3, false, {{8, 2}}), InvalidArgument);
  GridSet h(2, 9, true);
  CHECK_THROWS_AS(h.insert(Idx{0, 0}), InvalidArgument);
  CHECK_NOTHROW(h.insert(Idx{0, 4}));
}
