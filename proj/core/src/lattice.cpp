#include "uclab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>
#include <unordered_set>

#include "uclab/error.hpp"

namespace uclab::lattice {

namespace {

constexpr std::int64_t kMaxDenominator = 450283905890997363;  // 3^37

std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

int branching_of(int A) {
  if (A < 1) throw InvalidArgument("A must be >= 1");
  const std::int64_t b = 2 * static_cast<std::int64_t>(A) + 1;
  if (!is_power_of_three(b)) {
    throw InvalidArgument("branching 2A+1 = " + std::to_string(b) + " is not a power of 3");
  }
  return static_cast<int>(b);
}

}  // namespace

bool is_power_of_three(std::int64_t b) {
  if (b < 3) return false;
  while (b % 3 == 0) b /= 3;
  return b == 1;
}

Cube Cube::unit(int dim) { return root(Point::filled(dim, 0.0), 1.0); }

Cube Cube::root(const Point& center, double side) {
  if (!(side > 0.0) || !std::isfinite(side)) throw InvalidArgument("cube side must be positive");
  Cube c;
  c.dim_ = center.dim();
  c.root_center_ = center;
  c.root_side_ = side;
  return c;
}

bool Cube::in_unit_frame() const {
  if (root_side_ != 1.0) return false;
  for (int i = 0; i < dim_; ++i) {
    if (root_center_[i] != 0.0) return false;
  }
  return true;
}

double Cube::side() const { return root_side_ / static_cast<double>(denominator_); }

Point Cube::center() const {
  Point c(dim_);
  const double d2 = 2.0 * static_cast<double>(denominator_);
  for (int i = 0; i < dim_; ++i) {
    const std::int64_t num = 2 * index(i) + 1 - denominator_;
    c[i] = root_center_[i] + root_side_ * (static_cast<double>(num) / d2);
  }
  return c;
}

Point Cube::lo() const {
  Point c(dim_);
  const double d2 = 2.0 * static_cast<double>(denominator_);
  for (int i = 0; i < dim_; ++i) {
    const std::int64_t num = 2 * index(i) - denominator_;
    c[i] = root_center_[i] + root_side_ * (static_cast<double>(num) / d2);
  }
  return c;
}

Point Cube::hi() const {
  Point c(dim_);
  const double d2 = 2.0 * static_cast<double>(denominator_);
  for (int i = 0; i < dim_; ++i) {
    const std::int64_t num = 2 * index(i) + 2 - denominator_;
    c[i] = root_center_[i] + root_side_ * (static_cast<double>(num) / d2);
  }
  return c;
}

Cube Cube::child(int branching, const std::array<std::int64_t, kMaxDim>& offsets) const {
  if (!is_power_of_three(branching)) throw InvalidArgument("branching must be a power of 3");
  if (denominator_ > kMaxDenominator / branching) {
    throw InvalidArgument("subdivision depth exceeds exact index range");
  }
  Cube c = *this;
  c.denominator_ = denominator_ * branching;
  std::int64_t lin = 0;
  for (int i = 0; i < dim_; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (offsets[k] < 0 || offsets[k] >= branching) throw InvalidArgument("child offset out of range");
    c.index_[k] = index_[k] * branching + offsets[k];
    lin = lin * branching + offsets[k];
  }
  c.path_.push_back({branching, lin});
  return c;
}

bool Cube::operator==(const Cube& o) const {
  if (dim_ != o.dim_ || denominator_ != o.denominator_ || root_side_ != o.root_side_) return false;
  for (int i = 0; i < dim_; ++i) {
    if (index(i) != o.index(i) || root_center_[i] != o.root_center_[i]) return false;
  }
  return path_ == o.path_;
}

Cube follow_path(const Cube& root, const std::vector<PathStep>& path) {
  Cube c = root;
  for (const auto& step : path) {
    std::array<std::int64_t, kMaxDim> off{};
    std::int64_t rest = step.child;
    for (int i = c.dim() - 1; i >= 0; --i) {
      off[static_cast<std::size_t>(i)] = rest % step.branching;
      rest /= step.branching;
    }
    if (rest != 0 || step.child < 0) throw InvalidArgument("path step child index out of range");
    c = c.child(step.branching, off);
  }
  return c;
}

std::vector<Cube> subdivide(const Cube& q, int A) {
  const int b = branching_of(A);
  const int n = q.dim();
  const std::int64_t total = ipow(b, n);
  std::vector<Cube> out;
  out.reserve(static_cast<std::size_t>(total));
  std::array<std::int64_t, kMaxDim> off{};
  for (std::int64_t lin = 0; lin < total; ++lin) {
    std::int64_t rest = lin;
    for (int i = n - 1; i >= 0; --i) {
      off[static_cast<std::size_t>(i)] = rest % b;
      rest /= b;
    }
    out.push_back(q.child(b, off));
  }
  return out;
}

std::vector<Cube> hyperplane_children(const Cube& q, int A, int axis, double level) {
  const int b = branching_of(A);
  const int n = q.dim();
  if (axis < 0) axis = n - 1;
  if (axis >= n) throw InvalidArgument("hyperplane axis out of range");
  const double lo = q.lo()[axis];
  const double hi = q.hi()[axis];
  if (level < lo || level > hi) throw InvalidArgument("hyperplane does not meet the cube");
  // position of the plane in child units along the axis
  const double t = (level - lo) / (hi - lo) * b;
  std::vector<Cube> out;
  for (const auto& c : subdivide(q, A)) {
    const auto k = static_cast<double>(c.index(axis) % b);
    if (k <= t && t <= k + 1) out.push_back(c);
  }
  return out;
}

CubeTree::CubeTree(Cube root, int A) : branching_(branching_of(A)) {
  if (root.generation() != 0) throw InvalidArgument("tree root must have generation 0");
  levels_.push_back({std::move(root)});
}

void CubeTree::materialize(int generation) {
  while (generations() < generation) {
    std::vector<Cube> next;
    for (const auto& c : levels_.back()) {
      auto kids = subdivide(c, A());
      next.insert(next.end(), kids.begin(), kids.end());
    }
    levels_.push_back(std::move(next));
  }
}

const std::vector<Cube>& CubeTree::level(int generation) const {
  if (generation < 0 || generation > generations()) {
    throw InvalidArgument("generation " + std::to_string(generation) + " not materialised");
  }
  return levels_[static_cast<std::size_t>(generation)];
}

GridSet::GridSet(int dim, std::int64_t resolution, bool hyperplane)
    : dim_(dim), resolution_(resolution), hyperplane_(hyperplane) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("grid dimension out of range");
  if (resolution < 1) throw InvalidArgument("grid resolution must be positive");
  if (hyperplane && resolution % 2 == 0) {
    throw InvalidArgument("hyperplane grid sets need an odd resolution");
  }
  double cells = 1.0;
  for (int i = 0; i < dim; ++i) cells *= static_cast<double>(resolution);
  if (cells > 9.0e15) throw InvalidArgument("grid too large for linear cell indices");
}

GridSet GridSet::from_sorted_cells(int dim, std::int64_t resolution, bool hyperplane,
                                   std::vector<std::int64_t> cells) {
  GridSet g(dim, resolution, hyperplane);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0 && cells[i] <= cells[i - 1]) throw InvalidArgument("cells must be strictly increasing");
    g.check_index(g.unlinear(cells[i]));
  }
  g.cells_ = std::move(cells);
  return g;
}

GridSet GridSet::from_predicate(int dim, std::int64_t resolution, bool hyperplane,
                                const std::function<bool(const Point&)>& keep) {
  GridSet g(dim, resolution, hyperplane);
  std::int64_t total = 1;
  for (int i = 0; i < dim; ++i) total *= resolution;
  const std::int64_t middle = (resolution - 1) / 2;
  for (std::int64_t c = 0; c < total; ++c) {
    if (hyperplane && c % resolution != middle) continue;
    if (keep(g.cell_center(c))) g.cells_.push_back(c);
  }
  return g;
}

std::int64_t GridSet::linear(const std::array<std::int64_t, kMaxDim>& idx) const {
  check_index(idx);
  std::int64_t lin = 0;
  for (int i = 0; i < dim_; ++i) lin = lin * resolution_ + idx[static_cast<std::size_t>(i)];
  return lin;
}

std::array<std::int64_t, kMaxDim> GridSet::unlinear(std::int64_t cell) const {
  std::array<std::int64_t, kMaxDim> idx{};
  for (int i = dim_ - 1; i >= 0; --i) {
    idx[static_cast<std::size_t>(i)] = cell % resolution_;
    cell /= resolution_;
  }
  if (cell != 0) throw InvalidArgument("cell index out of range");
  return idx;
}

void GridSet::check_index(const std::array<std::int64_t, kMaxDim>& idx) const {
  for (int i = 0; i < dim_; ++i) {
    const auto v = idx[static_cast<std::size_t>(i)];
    if (v < 0 || v >= resolution_) throw InvalidArgument("cell index outside [0, K)");
  }
  if (hyperplane_ && idx[static_cast<std::size_t>(dim_ - 1)] != (resolution_ - 1) / 2) {
    throw InvalidArgument("hyperplane grid set cell misses {x_n = 0}");
  }
}

void GridSet::insert(const std::array<std::int64_t, kMaxDim>& idx) { insert_linear(linear(idx)); }

void GridSet::insert_linear(std::int64_t cell) {
  check_index(unlinear(cell));
  const auto it = std::lower_bound(cells_.begin(), cells_.end(), cell);
  if (it == cells_.end() || *it != cell) cells_.insert(it, cell);
}

bool GridSet::contains(const std::array<std::int64_t, kMaxDim>& idx) const {
  for (int i = 0; i < dim_; ++i) {
    const auto v = idx[static_cast<std::size_t>(i)];
    if (v < 0 || v >= resolution_) return false;
  }
  std::int64_t lin = 0;
  for (int i = 0; i < dim_; ++i) lin = lin * resolution_ + idx[static_cast<std::size_t>(i)];
  return contains_linear(lin);
}

bool GridSet::contains_linear(std::int64_t cell) const {
  return std::binary_search(cells_.begin(), cells_.end(), cell);
}

Point GridSet::cell_lo(std::int64_t cell) const {
  const auto idx = unlinear(cell);
  Point p(dim_);
  for (int i = 0; i < dim_; ++i) {
    p[i] = static_cast<double>(2 * idx[static_cast<std::size_t>(i)] - resolution_) /
           (2.0 * static_cast<double>(resolution_));
  }
  return p;
}

Point GridSet::cell_center(std::int64_t cell) const {
  const auto idx = unlinear(cell);
  Point p(dim_);
  for (int i = 0; i < dim_; ++i) {
    p[i] = static_cast<double>(2 * idx[static_cast<std::size_t>(i)] + 1 - resolution_) /
           (2.0 * static_cast<double>(resolution_));
  }
  return p;
}

std::vector<Point> GridSet::centers() const {
  std::vector<Point> out;
  out.reserve(cells_.size());
  for (auto c : cells_) out.push_back(cell_center(c));
  return out;
}

bool GridSet::subset_of(const GridSet& other) const {
  if (dim_ != other.dim_ || resolution_ != other.resolution_) {
    throw InvalidArgument("subset test needs equal dimension and resolution");
  }
  if (hyperplane_ && !other.hyperplane_) {
    // a slice is contained in the full cell
    return std::all_of(cells_.begin(), cells_.end(),
                       [&](std::int64_t c) { return other.contains_linear(c); });
  }
  if (!hyperplane_ && other.hyperplane_ && !cells_.empty()) return false;
  return std::includes(other.cells_.begin(), other.cells_.end(), cells_.begin(), cells_.end());
}

std::vector<GridSet::Run> GridSet::runs() const {
  std::vector<Run> out;
  for (auto c : cells_) {
    if (!out.empty() && out.back().start + out.back().length == c) {
      ++out.back().length;
    } else {
      out.push_back({c, 1});
    }
  }
  return out;
}

GridSet GridSet::from_runs(int dim, std::int64_t resolution, bool hyperplane,
                           const std::vector<Run>& runs) {
  GridSet g(dim, resolution, hyperplane);
  std::int64_t last = -1;
  for (const auto& r : runs) {
    if (r.length < 1 || r.start <= last) throw InvalidArgument("runs must be increasing and non-empty");
    for (std::int64_t c = r.start; c < r.start + r.length; ++c) {
      g.check_index(g.unlinear(c));
      g.cells_.push_back(c);
    }
    last = r.start + r.length - 1;
  }
  return g;
}

std::vector<std::int64_t> cubes_meeting_set_indices(std::int64_t D, const GridSet& e) {
  if (!is_power_of_three(e.resolution())) {
    throw InvalidArgument("set resolution must be a power of 3");
  }
  if (D != 1 && !is_power_of_three(D)) {
    throw InvalidArgument("cube side and set resolution are incommensurate");
  }
  const int n = e.dim();
  const std::int64_t K = e.resolution();
  // Units of 1/(2M), M = max(D, K): cube i spans [2iM/D, 2(i+1)M/D], cell j
  // spans [2jM/K, 2(j+1)M/K], the slice {x_n = 0} sits at M.
  const std::int64_t M = std::max(D, K);
  const std::int64_t a = 2 * M / D;
  const std::int64_t c = 2 * M / K;
  std::unordered_set<std::int64_t> set;
  for (auto cell : e.cells()) {
    const auto idx = e.unlinear(cell);
    std::array<std::int64_t, kMaxDim> lo{};
    std::array<std::int64_t, kMaxDim> hi{};
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      std::int64_t s0 = idx[k] * c;
      std::int64_t s1 = (idx[k] + 1) * c;
      if (e.hyperplane() && i == n - 1) s0 = s1 = M;
      // cubes with i*a <= s1 and (i+1)*a >= s0
      lo[k] = std::max<std::int64_t>(0, (s0 + a - 1) / a - 1);
      hi[k] = std::min<std::int64_t>(D - 1, s1 / a);
    }
    std::array<std::int64_t, kMaxDim> cur = lo;
    while (true) {
      std::int64_t lin = 0;
      for (int i = 0; i < n; ++i) lin = lin * D + cur[static_cast<std::size_t>(i)];
      set.insert(lin);
      int ax = n - 1;
      while (ax >= 0) {
        const auto k = static_cast<std::size_t>(ax);
        if (++cur[k] <= hi[k]) break;
        cur[k] = lo[k];
        --ax;
      }
      if (ax < 0) break;
    }
  }
  std::vector<std::int64_t> out(set.begin(), set.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Cube> cubes_meeting_set(const std::vector<Cube>& level, const GridSet& e) {
  const int n = e.dim();
  std::vector<std::pair<std::int64_t, std::vector<std::int64_t>>> touched;
  std::vector<Cube> out;
  for (const auto& q : level) {
    if (q.dim() != n) throw InvalidArgument("cube and set dimensions differ");
    if (!q.in_unit_frame()) throw InvalidArgument("cubes must live in the unit-cube frame");
    const std::int64_t D = q.denominator();
    auto it = std::find_if(touched.begin(), touched.end(), [&](const auto& t) { return t.first == D; });
    if (it == touched.end()) {
      touched.emplace_back(D, cubes_meeting_set_indices(D, e));
      it = std::prev(touched.end());
    }
    std::int64_t lin = 0;
    for (int i = 0; i < n; ++i) lin = lin * D + q.index(i);
    if (std::binary_search(it->second.begin(), it->second.end(), lin)) out.push_back(q);
  }
  return out;
}

GridSet shrink_to_center(const GridSet& e, int levels) {
  if (levels < 0) throw InvalidArgument("shrink levels must be nonnegative");
  std::int64_t f = 1;
  for (int k = 0; k < levels; ++k) f *= 3;
  const std::int64_t K = e.resolution();
  // cell i of the K-grid maps to cell i + (f - 1) K / 2 of the f K grid
  const std::int64_t offset = (f - 1) / 2 * K;
  GridSet out(e.dim(), f * K, e.hyperplane());
  std::vector<std::int64_t> cells;
  cells.reserve(e.size());
  for (auto c : e.cells()) {
    auto idx = e.unlinear(c);
    for (int i = 0; i < e.dim(); ++i) idx[static_cast<std::size_t>(i)] += offset;
    cells.push_back(out.linear(idx));
  }
  return GridSet::from_sorted_cells(e.dim(), f * K, e.hyperplane(), std::move(cells));
}

}  // namespace uclab::lattice
