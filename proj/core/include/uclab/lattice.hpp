#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "uclab/harmonic.hpp"
#include "uclab/point.hpp"

namespace uclab::lattice {

/// True when b is 3^k for some k >= 1.
bool is_power_of_three(std::int64_t b);

struct PathStep {
  int branching;        // 2A+1 used for this step
  std::int64_t child;   // lexicographic child index, first axis most significant
  bool operator==(const PathStep&) const = default;
};

/// Axis-parallel cube inside a root cube, addressed exactly: the cube is
/// root.lo + side * (index + [0,1]^n) with side = root_side / denominator.
class Cube {
 public:
  /// Unit cube [-1/2, 1/2]^n.
  static Cube unit(int dim);
  static Cube root(const Point& center, double side);

  int dim() const { return dim_; }
  std::int64_t denominator() const { return denominator_; }
  std::int64_t index(int axis) const { return index_[static_cast<std::size_t>(axis)]; }
  int generation() const { return static_cast<int>(path_.size()); }
  const std::vector<PathStep>& path() const { return path_; }
  const Point& root_center() const { return root_center_; }
  double root_side() const { return root_side_; }
  /// Root is the unit cube centred at the origin.
  bool in_unit_frame() const;

  double side() const;
  Point center() const;
  Point lo() const;
  Point hi() const;
  harmonic::AxisCube region() const { return {center(), side()}; }
  /// Cube with the same centre and `factor` times the side (for kQ).
  harmonic::AxisCube dilated(double factor) const { return {center(), factor * side()}; }

  /// Child `j` (per-axis offsets in [0, b)) under branching b.
  Cube child(int branching, const std::array<std::int64_t, kMaxDim>& offsets) const;

  bool operator==(const Cube& o) const;

 private:
  int dim_ = 0;
  Point root_center_;
  double root_side_ = 1.0;
  std::int64_t denominator_ = 1;
  std::array<std::int64_t, kMaxDim> index_{};
  std::vector<PathStep> path_;
};

/// Replays a path from the root; reproduces the cube exactly.
Cube follow_path(const Cube& root, const std::vector<PathStep>& path);

/// The (2A+1)^n children of Q, lexicographic in the index vector.
std::vector<Cube> subdivide(const Cube& q, int A);

/// Children of Q (branching 2A+1) whose closure meets {x_axis = level}.
std::vector<Cube> hyperplane_children(const Cube& q, int A, int axis = -1, double level = 0.0);

/// Root cube with lazily materialised uniform generations.
class CubeTree {
 public:
  CubeTree(Cube root, int A);
  const Cube& root() const { return levels_.front().front(); }
  int branching() const { return branching_; }
  int A() const { return (branching_ - 1) / 2; }
  int generations() const { return static_cast<int>(levels_.size()) - 1; }
  void materialize(int generation);
  const std::vector<Cube>& level(int generation) const;

 private:
  int branching_;
  std::vector<std::vector<Cube>> levels_;
};

/// Union of closed cells of the uniform grid of side 1/K over the unit cube
/// [-1/2, 1/2]^n. With the hyperplane flag the set is the slice of the
/// middle layer along the last axis, i.e. a subset of {x_n = 0}.
class GridSet {
 public:
  GridSet() = default;
  GridSet(int dim, std::int64_t resolution, bool hyperplane = false);

  /// From strictly increasing linear cell indices.
  static GridSet from_sorted_cells(int dim, std::int64_t resolution, bool hyperplane,
                                   std::vector<std::int64_t> cells);
  static GridSet from_predicate(int dim, std::int64_t resolution, bool hyperplane,
                                const std::function<bool(const Point& center)>& keep);

  int dim() const { return dim_; }
  std::int64_t resolution() const { return resolution_; }
  bool hyperplane() const { return hyperplane_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  const std::vector<std::int64_t>& cells() const { return cells_; }

  std::int64_t linear(const std::array<std::int64_t, kMaxDim>& idx) const;
  std::array<std::int64_t, kMaxDim> unlinear(std::int64_t cell) const;
  void insert(const std::array<std::int64_t, kMaxDim>& idx);
  void insert_linear(std::int64_t cell);
  bool contains(const std::array<std::int64_t, kMaxDim>& idx) const;
  bool contains_linear(std::int64_t cell) const;
  Point cell_center(std::int64_t cell) const;
  Point cell_lo(std::int64_t cell) const;
  double cell_side() const { return 1.0 / static_cast<double>(resolution_); }
  /// Points representing the set: cell centres (on {x_n = 0} for hyperplane sets).
  std::vector<Point> centers() const;

  bool subset_of(const GridSet& other) const;

  struct Run {
    std::int64_t start;
    std::int64_t length;
    bool operator==(const Run&) const = default;
  };
  std::vector<Run> runs() const;
  static GridSet from_runs(int dim, std::int64_t resolution, bool hyperplane,
                           const std::vector<Run>& runs);

  bool operator==(const GridSet&) const = default;

 private:
  void check_index(const std::array<std::int64_t, kMaxDim>& idx) const;

  int dim_ = 0;
  std::int64_t resolution_ = 1;
  bool hyperplane_ = false;
  std::vector<std::int64_t> cells_;  // sorted, unique
};

/// Linear indices (base D, first axis most significant) of the cubes of side
/// 1/D in the unit-cube frame whose closure meets E. Sorted.
std::vector<std::int64_t> cubes_meeting_set_indices(std::int64_t D, const GridSet& e);

/// Cubes of `level` whose closure meets E, in input order. Exact index arithmetic.
std::vector<Cube> cubes_meeting_set(const std::vector<Cube>& level, const GridSet& e);

struct CountingReport {
  bool vacuous = false;  // content upper bound is 0
  std::int64_t count = 0;
  std::int64_t K = 0;
  double s = 0.0;
  double content_upper = 0.0;
  double ratio = 0.0;    // count / (content_upper * K^s)
};

/// The image of E under x -> x / 3^levels, on a grid 3^levels times finer.
GridSet shrink_to_center(const GridSet& e, int levels);

/// |S| at side 1/K against the Hausdorff content upper bound of E.
CountingReport counting_lower_bound_check(const GridSet& e, double s, std::int64_t K);

}  // namespace uclab::lattice
