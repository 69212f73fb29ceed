#include "uclab/gmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "uclab/error.hpp"
#include "uclab/parallel.hpp"
#include "uclab/quadrature.hpp"

namespace uclab::gmt {

using lattice::GridSet;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_exponent(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("exponent s must be positive");
}

// dimension of the cells carrying E: slices of hyperplane sets lose one axis
int carrier_dim(const GridSet& e) { return e.hyperplane() ? e.dim() - 1 : e.dim(); }

int log3_exact(std::int64_t K) {
  if (K == 1) return 0;
  if (!lattice::is_power_of_three(K)) throw InvalidArgument("resolution must be a power of 3");
  int r = 0;
  while (K > 1) {
    K /= 3;
    ++r;
  }
  return r;
}

// |x|^-s from |x|^2 with common exponents special-cased
struct Kernel {
  double s;
  double operator()(double d2) const {
    if (s == 1.0) return 1.0 / std::sqrt(d2);
    if (s == 0.5) return 1.0 / std::sqrt(std::sqrt(d2));
    if (s == 2.0) return 1.0 / d2;
    return std::exp(-0.5 * s * std::log(d2));
  }
};

std::vector<Atom> merged_atoms(const DiscreteMeasure& mu) {
  std::vector<Atom> atoms;
  atoms.reserve(mu.atoms.size());
  for (const auto& a : mu.atoms) {
    if (!(a.w > 0.0)) throw InvalidArgument("atom weights must be positive");
    atoms.push_back(a);
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
    for (int i = 0; i < a.x.dim(); ++i) {
      if (a.x[i] != b.x[i]) return a.x[i] < b.x[i];
    }
    return false;
  });
  std::vector<Atom> out;
  for (const auto& a : atoms) {
    if (!out.empty() && out.back().x == a.x) {
      out.back().w += a.w;
    } else {
      out.push_back(a);
    }
  }
  return out;
}

// Mean of |x - y|^-s over x, y uniform in unit m-cells offset by the integer
// vector k (nonnegative entries). Pieces of the difference density touching the
// singularity go through a Duffy split with the z-integral done exactly.
double cell_pair_energy(int m, double s, const std::array<int, 3>& k) {
  const auto& gl48 = quadrature::gauss_legendre(48);
  const auto& gl16 = quadrature::gauss_legendre(16);
  double total = 0.0;
  for (int sigma = 0; sigma < (1 << m); ++sigma) {
    auto sgn = [&](int i) { return ((sigma >> i) & 1) ? -1.0 : 1.0; };
    bool singular = true;
    for (int i = 0; i < m; ++i) {
      const int ki = k[static_cast<std::size_t>(i)];
      singular = singular && (ki == 0 || (ki == 1 && sgn(i) < 0.0));
    }
    if (singular) {
      // weight per axis in the shifted variable t = |k_i + sigma_i tau_i|: 1 - t or t
      auto weight_is_t = [&](int i) { return k[static_cast<std::size_t>(i)] == 1; };
      for (int j = 0; j < m; ++j) {
        auto radial = [&](const std::array<double, 3>& om) {
          std::vector<double> c{1.0};
          for (int i = 0; i < m; ++i) {
            const double a = weight_is_t(i) ? 0.0 : 1.0;
            const double b = weight_is_t(i) ? om[static_cast<std::size_t>(i)] : -om[static_cast<std::size_t>(i)];
            std::vector<double> next(c.size() + 1, 0.0);
            for (std::size_t l = 0; l < c.size(); ++l) {
              next[l] += a * c[l];
              next[l + 1] += b * c[l];
            }
            c = std::move(next);
          }
          double acc = 0.0;
          for (std::size_t l = 0; l < c.size(); ++l) acc += c[l] / (static_cast<double>(l) + m - s);
          return acc;
        };
        if (m == 1) {
          total += radial({1.0, 0.0, 0.0});
          continue;
        }
        // the other m - 1 axes scaled by w in [0, 1]
        const int others = m - 1;
        const std::size_t q = gl48.nodes.size();
        const std::size_t count = others == 1 ? q : q * q;
        for (std::size_t idx = 0; idx < count; ++idx) {
          std::array<double, 3> om{1.0, 1.0, 1.0};
          double wt = 1.0;
          double w2 = 0.0;
          std::size_t rest = idx;
          for (int i = 0, slot = 0; i < m; ++i) {
            if (i == j) continue;
            const std::size_t a = others == 1 ? rest : (slot == 0 ? rest / q : rest % q);
            const double w = 0.5 * (gl48.nodes[a] + 1.0);
            om[static_cast<std::size_t>(i)] = w;
            wt *= 0.5 * gl48.weights[a];
            w2 += w * w;
            ++slot;
          }
          total += wt * std::pow(1.0 + w2, -0.5 * s) * radial(om);
        }
      }
      continue;
    }
    // smooth piece: the kernel stays at distance >= 1 from the singularity
    const std::size_t q = gl16.nodes.size();
    std::size_t count = 1;
    for (int i = 0; i < m; ++i) count *= q;
    for (std::size_t idx = 0; idx < count; ++idx) {
      std::size_t rest = idx;
      double wt = 1.0;
      double r2 = 0.0;
      for (int i = 0; i < m; ++i) {
        const std::size_t a = rest % q;
        rest /= q;
        const double tau = 0.5 * (gl16.nodes[a] + 1.0);
        wt *= 0.5 * gl16.weights[a] * (1.0 - tau);
        const double d = k[static_cast<std::size_t>(i)] + sgn(i) * tau;
        r2 += d * d;
      }
      total += wt * std::pow(r2, -0.5 * s);
    }
  }
  return total;
}

// Exact interaction of grid-aligned cells within this many cells per axis;
// farther pairs use the centre kernel with its second-order cell correction.
constexpr int kNear = 2;

struct NearField {
  double h = 0.0;
  int m = 0;
  std::vector<double> table;  // by sorted |k|, base kNear + 1 digits

  NearField(double side, int dim, double s) : h(side), m(dim) {
    int size = 1;
    for (int i = 0; i < m; ++i) size *= kNear + 1;
    table.assign(static_cast<std::size_t>(size), 0.0);
    const double scale = std::pow(h, -s);
    for (int code = 0; code < size; ++code) {
      std::array<int, 3> k{0, 0, 0};
      int rest = code;
      for (int i = m - 1; i >= 0; --i) {
        k[static_cast<std::size_t>(i)] = rest % (kNear + 1);
        rest /= kNear + 1;
      }
      if (std::is_sorted(k.begin(), k.begin() + m)) table[static_cast<std::size_t>(code)] = cell_pair_energy(m, s, k) * scale;
    }
  }

  // exact pair value when d is a lattice offset within reach, else NaN
  double lookup(const Point& d) const {
    std::array<int, 3> k{0, 0, 0};
    for (int i = 0; i < d.dim(); ++i) {
      const double t = d[i] / h;
      if (i >= m) {
        if (std::abs(t) > 1e-6) return std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const double r = std::round(t);
      if (std::abs(t - r) > 1e-6 || std::abs(r) > kNear) return std::numeric_limits<double>::quiet_NaN();
      k[static_cast<std::size_t>(i)] = static_cast<int>(std::abs(r));
    }
    std::sort(k.begin(), k.begin() + m);
    int code = 0;
    for (int i = 0; i < m; ++i) code = code * (kNear + 1) + k[static_cast<std::size_t>(i)];
    return table[static_cast<std::size_t>(code)];
  }
};

// potentials phi_i = sum_{j != i} w_j <kernel between atoms i and j>
std::vector<double> off_diagonal_potentials(const std::vector<Atom>& atoms, double s, double merge_tol,
                                            int workers, const NearField* near = nullptr) {
  const Kernel k{s};
  const double tol2 = merge_tol * merge_tol;
  return parallel_map(atoms.size(), workers, [&](std::size_t i) {
    double acc = 0.0;
    const Point& xi = atoms[i].x;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      if (j == i) continue;
      const Point d = atoms[j].x - xi;
      const double d2 = d.norm2();
      if (d2 < tol2) throw InvalidArgument("distinct atoms closer than the merge tolerance");
      double v = k(d2);
      if (near != nullptr) {
        const double exact = near->lookup(d);
        if (!std::isnan(exact)) {
          v = exact;
        } else {
          // mean over both cells: f + h^2 / 12 * (Laplacian of f along the cell axes)
          double along = 0.0;
          for (int a = 0; a < near->m; ++a) along += d[a] * d[a];
          v *= 1.0 + near->h * near->h / 12.0 * s * ((s + 2.0) * along / d2 - near->m) / d2;
        }
      }
      acc += atoms[j].w * v;
    }
    return acc;
  });
}

}  // namespace

double DiscreteMeasure::total_mass() const {
  double m = 0.0;
  for (const auto& a : atoms) m += a.w;
  return m;
}

void DiscreteMeasure::normalize() {
  const double m = total_mass();
  if (!(m > 0.0)) throw InvalidArgument("cannot normalise a measure of zero mass");
  for (auto& a : atoms) a.w /= m;
}

DiscreteMeasure DiscreteMeasure::uniform_on(const GridSet& e) {
  if (e.empty()) throw InvalidArgument("set is empty");
  DiscreteMeasure mu;
  mu.cell_side = e.cell_side();
  mu.cell_dim = carrier_dim(e);
  const double w = 1.0 / static_cast<double>(e.size());
  for (const auto& p : e.centers()) mu.atoms.push_back({p, w});
  return mu;
}

double unit_cell_energy(int m, double s) {
  if (m < 1 || m > 3) throw InvalidArgument("cell dimension must be 1, 2 or 3");
  check_exponent(s);
  if (s >= m) throw InvalidArgument("self-energy diverges for s >= cell dimension");
  return cell_pair_energy(m, s, {0, 0, 0});
}

EnergyReport riesz_energy(const DiscreteMeasure& mu, double s, SelfEnergy mode, int workers) {
  check_exponent(s);
  if (mu.atoms.empty()) throw InvalidArgument("measure has no atoms");
  const auto atoms = merged_atoms(mu);
  EnergyReport rep;
  rep.atoms = atoms.size();
  const bool cells = mu.cell_side > 0.0;
  rep.method = !cells ? "atomic" : (mode == SelfEnergy::uniform_cell ? "uniform_cell" : "drop_diagonal");
  if (atoms.size() == 1 && (!cells || mode == SelfEnergy::drop_diagonal)) {
    rep.value = kInf;
    rep.infinite = true;
    return rep;
  }
  const double merge_tol = 1e-9 * (cells ? mu.cell_side : 1.0);
  double self = 0.0;
  std::optional<NearField> near;
  if (cells && mode == SelfEnergy::uniform_cell) {
    self = unit_cell_energy(mu.cell_dim, s) * std::pow(mu.cell_side, -s);
    near.emplace(mu.cell_side, mu.cell_dim, s);
  }
  const auto phi = off_diagonal_potentials(atoms, s, merge_tol, workers, near ? &*near : nullptr);
  double e = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) e += atoms[i].w * phi[i];
  if (near) {
    for (const auto& a : atoms) e += a.w * a.w * self;
  }
  rep.value = e;
  return rep;
}

namespace {

// Sub-selection of E with at most max_atoms cells: the first cell of E in
// each block of a coarser triadic grid. Any measure on it lives on E.
GridSet thin_out(const GridSet& e, std::size_t max_atoms, bool& thinned) {
  thinned = false;
  if (e.size() <= max_atoms) return e;
  if (!lattice::is_power_of_three(e.resolution())) {
    throw InvalidArgument("set too large for capacity and not triadic: cannot thin out");
  }
  thinned = true;
  const int n = e.dim();
  for (std::int64_t block = 3; block <= e.resolution(); block *= 3) {
    std::vector<std::int64_t> keep;
    std::vector<std::int64_t> seen;
    const std::int64_t KB = e.resolution() / block;
    for (auto c : e.cells()) {
      const auto idx = e.unlinear(c);
      std::int64_t key = 0;
      for (int i = 0; i < n; ++i) key = key * std::max<std::int64_t>(KB, 1) + idx[static_cast<std::size_t>(i)] / block;
      seen.push_back(key);
      keep.push_back(c);
    }
    // cells are sorted, but block keys are not; keep the first cell per key
    std::vector<std::size_t> order(keep.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return seen[a] < seen[b]; });
    std::vector<std::int64_t> picked;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i == 0 || seen[order[i]] != seen[order[i - 1]]) picked.push_back(keep[order[i]]);
    }
    if (picked.size() <= max_atoms) {
      std::sort(picked.begin(), picked.end());
      return GridSet::from_sorted_cells(n, e.resolution(), e.hyperplane(), std::move(picked));
    }
  }
  throw InvalidArgument("cannot thin the set below max_atoms");
}

}  // namespace

CapacityReport riesz_capacity_lower(const GridSet& e, double s, const CapacityOptions& opt) {
  check_exponent(s);
  if (e.empty()) throw InvalidArgument("set is empty");
  const int m = carrier_dim(e);
  if (s >= m) {
    throw InvalidArgument("s must be below the carrier dimension (" + std::to_string(m) +
                          "): uniform measures have infinite energy");
  }
  const std::size_t cap = opt.family == MeasureFamily::greedy_redistribution
                              ? std::min<std::size_t>(opt.max_atoms, 3000)
                              : opt.max_atoms;
  CapacityReport rep;
  const GridSet carrier = thin_out(e, cap, rep.subsampled);
  DiscreteMeasure mu = DiscreteMeasure::uniform_on(carrier);
  rep.atoms = mu.atoms.size();
  if (opt.family == MeasureFamily::uniform) {
    rep.energy = riesz_energy(mu, s, SelfEnergy::uniform_cell, opt.workers).value;
    rep.lower = 1.0 / rep.energy;
    return rep;
  }
  const double self = unit_cell_energy(m, s) * std::pow(mu.cell_side, -s);
  const double merge_tol = 1e-9 * mu.cell_side;
  const NearField near(mu.cell_side, m, s);
  auto energy_of = [&](const std::vector<Atom>& atoms, std::vector<double>& phi) {
    phi = off_diagonal_potentials(atoms, s, merge_tol, opt.workers, &near);
    double en = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      phi[i] += atoms[i].w * self;
      en += atoms[i].w * phi[i];
    }
    return en;
  };
  std::vector<Atom> atoms = mu.atoms;
  std::vector<double> phi;
  double en = energy_of(atoms, phi);
  rep.sweep_energies.push_back(en);
  double gamma = 1.0;
  for (int sweep = 0; sweep < opt.sweeps; ++sweep) {
    bool accepted = false;
    for (int attempt = 0; attempt < 8 && !accepted; ++attempt) {
      std::vector<Atom> trial = atoms;
      double mass = 0.0;
      for (std::size_t i = 0; i < trial.size(); ++i) {
        trial[i].w *= std::pow(phi[i] / en, -gamma);
        mass += trial[i].w;
      }
      for (auto& a : trial) a.w /= mass;
      std::vector<double> trial_phi;
      const double trial_en = energy_of(trial, trial_phi);
      if (trial_en < en) {
        atoms = std::move(trial);
        phi = std::move(trial_phi);
        en = trial_en;
        accepted = true;
      } else {
        gamma *= 0.5;
      }
    }
    rep.sweep_energies.push_back(en);
    if (!accepted) break;
  }
  rep.energy = en;
  rep.lower = 1.0 / en;
  return rep;
}

namespace {

// Slice coordinates of E's cells: all axes, or all but the last for
// hyperplane sets.
std::vector<std::array<std::int64_t, kMaxDim>> carrier_coords(const GridSet& e) {
  std::vector<std::array<std::int64_t, kMaxDim>> out;
  out.reserve(e.size());
  for (auto c : e.cells()) out.push_back(e.unlinear(c));
  return out;
}

struct Node {
  std::int64_t key;
  double cost;
  bool split;
};

// Aligned-box mass maxima M(k) of the uniform measure on E (carrier dims).
class BoxMaxima {
 public:
  BoxMaxima(const GridSet& e, int m) : m_(m), K_(e.resolution()), total_(static_cast<double>(e.size())) {
    const auto coords = carrier_coords(e);
    double cells = 1.0;
    for (int i = 0; i < m; ++i) cells *= static_cast<double>(K_);
    // product sets factor per axis
    per_axis_.assign(static_cast<std::size_t>(m), {});
    for (int i = 0; i < m; ++i) {
      auto& ax = per_axis_[static_cast<std::size_t>(i)];
      for (const auto& c : coords) ax.push_back(c[static_cast<std::size_t>(i)]);
      std::sort(ax.begin(), ax.end());
      ax.erase(std::unique(ax.begin(), ax.end()), ax.end());
    }
    double prod = 1.0;
    for (const auto& ax : per_axis_) prod *= static_cast<double>(ax.size());
    product_ = prod == total_;
    if (!product_ && cells <= 4.2e6) {
      dense_ = true;
      const auto side = static_cast<std::size_t>(K_ + 1);
      std::size_t size = 1;
      for (int i = 0; i < m; ++i) size *= side;
      prefix_.assign(size, 0);
      for (const auto& c : coords) {
        std::size_t lin = 0;
        for (int i = 0; i < m; ++i) lin = lin * side + static_cast<std::size_t>(c[static_cast<std::size_t>(i)] + 1);
        prefix_[lin] = 1;
      }
      std::size_t stride = 1;
      for (int ax = m - 1; ax >= 0; --ax) {
        for (std::size_t lin = 0; lin < size; ++lin) {
          if ((lin / stride) % side != 0) prefix_[lin] += prefix_[lin - stride];
        }
        stride *= side;
      }
    }
  }

  bool available() const { return product_ || dense_; }

  // max over aligned boxes of k^m cells of mu(box)
  double operator()(std::int64_t k) const {
    k = std::min(k, K_);
    if (product_) {
      double r = 1.0;
      for (const auto& ax : per_axis_) {
        std::int64_t best = 0;
        std::size_t lo = 0;
        for (std::size_t hi = 0; hi < ax.size(); ++hi) {
          while (ax[hi] - ax[lo] >= k) ++lo;
          best = std::max<std::int64_t>(best, static_cast<std::int64_t>(hi - lo + 1));
        }
        r *= static_cast<double>(best) / static_cast<double>(ax.size());
      }
      return r;
    }
    const auto side = static_cast<std::size_t>(K_ + 1);
    const std::int64_t positions = K_ - k + 1;
    std::int64_t best = 0;
    std::array<std::int64_t, kMaxDim> p{};
    while (true) {
      std::int64_t sum = 0;
      for (int corner = 0; corner < (1 << m_); ++corner) {
        std::size_t lin = 0;
        int parity = 0;
        for (int i = 0; i < m_; ++i) {
          const bool up = (corner >> i) & 1;
          parity += up ? 0 : 1;
          lin = lin * side + static_cast<std::size_t>(p[static_cast<std::size_t>(i)] + (up ? k : 0));
        }
        sum += (parity % 2 == 0 ? 1 : -1) * prefix_[lin];
      }
      best = std::max(best, sum);
      int ax = m_ - 1;
      while (ax >= 0 && ++p[static_cast<std::size_t>(ax)] == positions) p[static_cast<std::size_t>(ax--)] = 0;
      if (ax < 0) break;
    }
    return static_cast<double>(best) / total_;
  }

 private:
  int m_;
  std::int64_t K_;
  double total_;
  bool product_ = false;
  bool dense_ = false;
  std::vector<std::vector<std::int64_t>> per_axis_;
  std::vector<std::int64_t> prefix_;
};

}  // namespace

ContentEstimate hausdorff_content(const GridSet& e, double s, int search_depth) {
  check_exponent(s);
  if (e.empty()) throw InvalidArgument("set is empty");
  if (search_depth < 0) throw InvalidArgument("search depth must be nonnegative");
  const int n = e.dim();
  const int m = carrier_dim(e);
  const std::int64_t K = e.resolution();
  const int R = log3_exact(K);
  const int depth = std::min(R, search_depth);
  ContentEstimate out;
  out.s = s;
  out.coarse = depth < R;

  // bottom-up DP: levels[L] holds the nonempty nodes of side 3^-L (carrier coords)
  auto cost_whole = [&](int L) { return std::pow(std::sqrt(static_cast<double>(m)) * std::pow(3.0, -L), s); };
  std::vector<std::vector<Node>> levels(static_cast<std::size_t>(depth + 1));
  {
    std::int64_t shrink = 1;
    for (int i = depth; i < R; ++i) shrink *= 3;
    std::int64_t KL = K / shrink;
    std::vector<std::int64_t> keys;
    for (const auto& c : carrier_coords(e)) {
      std::int64_t key = 0;
      for (int i = 0; i < m; ++i) key = key * KL + c[static_cast<std::size_t>(i)] / shrink;
      keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    const double w = cost_whole(depth);
    for (auto k : keys) levels[static_cast<std::size_t>(depth)].push_back({k, w, false});
  }
  for (int L = depth - 1; L >= 0; --L) {
    std::int64_t KL = 1;
    for (int i = 0; i < L; ++i) KL *= 3;
    const std::int64_t KC = KL * 3;
    std::vector<std::pair<std::int64_t, double>> sums;
    for (const auto& child : levels[static_cast<std::size_t>(L + 1)]) {
      std::int64_t rest = child.key;
      std::array<std::int64_t, kMaxDim> idx{};
      for (int i = m - 1; i >= 0; --i) {
        idx[static_cast<std::size_t>(i)] = rest % KC;
        rest /= KC;
      }
      std::int64_t key = 0;
      for (int i = 0; i < m; ++i) key = key * KL + idx[static_cast<std::size_t>(i)] / 3;
      sums.emplace_back(key, child.cost);
    }
    std::stable_sort(sums.begin(), sums.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const double w = cost_whole(L);
    auto& level = levels[static_cast<std::size_t>(L)];
    for (std::size_t i = 0; i < sums.size();) {
      std::size_t j = i;
      double acc = 0.0;
      while (j < sums.size() && sums[j].first == sums[i].first) acc += sums[j++].second;
      // ties go to the single set
      const bool split = acc < w * (1.0 - 1e-12);
      level.push_back({sums[i].first, split ? acc : w, split});
      i = j;
    }
  }
  out.upper = levels[0].front().cost;

  // realising cover, top-down
  std::vector<std::pair<int, std::int64_t>> stack{{0, levels[0].front().key}};
  while (!stack.empty()) {
    const auto [L, key] = stack.back();
    stack.pop_back();
    const auto& level = levels[static_cast<std::size_t>(L)];
    const auto it = std::lower_bound(level.begin(), level.end(), key,
                                     [](const Node& a, std::int64_t k) { return a.key < k; });
    std::int64_t KL = 1;
    for (int i = 0; i < L; ++i) KL *= 3;
    std::array<std::int64_t, kMaxDim> idx{};
    std::int64_t rest = key;
    for (int i = m - 1; i >= 0; --i) {
      idx[static_cast<std::size_t>(i)] = rest % KL;
      rest /= KL;
    }
    if (!it->split) {
      lattice::Cube c = lattice::Cube::unit(n);
      std::array<std::int64_t, kMaxDim> full = idx;
      if (m < n) full[static_cast<std::size_t>(n - 1)] = (KL - 1) / 2;
      // descend digit by digit so the cube carries its path
      for (int d = L - 1; d >= 0; --d) {
        std::int64_t p = 1;
        for (int i = 0; i < d; ++i) p *= 3;
        std::array<std::int64_t, kMaxDim> off{};
        for (int i = 0; i < n; ++i) off[static_cast<std::size_t>(i)] = (full[static_cast<std::size_t>(i)] / p) % 3;
        c = c.child(3, off);
      }
      out.cover.push_back(c);
      continue;
    }
    // children in reverse so the cover comes out in lexicographic order
    const std::int64_t KC = KL * 3;
    const auto& next = levels[static_cast<std::size_t>(L + 1)];
    std::vector<std::int64_t> kids;
    std::array<std::int64_t, kMaxDim> off{};
    while (true) {
      std::int64_t ck = 0;
      for (int i = 0; i < m; ++i) ck = ck * KC + idx[static_cast<std::size_t>(i)] * 3 + off[static_cast<std::size_t>(i)];
      if (std::binary_search(next.begin(), next.end(), Node{ck, 0.0, false},
                             [](const Node& a, const Node& b) { return a.key < b.key; })) {
        kids.push_back(ck);
      }
      int ax = m - 1;
      while (ax >= 0 && ++off[static_cast<std::size_t>(ax)] == 3) off[static_cast<std::size_t>(ax--)] = 0;
      if (ax < 0) break;
    }
    for (auto it2 = kids.rbegin(); it2 != kids.rend(); ++it2) stack.emplace_back(L + 1, *it2);
  }

  // lower bound: mass distribution over aligned boxes
  if (s > m) {
    out.lower = 0.0;
    out.mass_constant = kInf;
    return out;
  }
  const BoxMaxima maxima(e, m);
  if (!maxima.available()) {
    out.lower_available = false;
    out.lower = 0.0;
    return out;
  }
  const double sigma = 1.0 / static_cast<double>(K);
  // boxes of side t <= sigma: density bound
  double C = std::pow(sigma, -s) / static_cast<double>(e.size());
  std::vector<std::int64_t> ks;
  for (std::int64_t k = 1; k <= std::min<std::int64_t>(K, 16); ++k) ks.push_back(k);
  while (ks.back() < K) {
    ks.push_back(std::min<std::int64_t>(K, std::max(ks.back() + 1, static_cast<std::int64_t>(std::ceil(ks.back() * 1.0625)))));
  }
  // side t in [k_j sigma, k_{j+1} sigma]: mu(Q_t) <= M(k_{j+1}), t^s >= (k_j sigma)^s
  for (std::size_t j = 0; j + 1 < ks.size(); ++j) {
    C = std::max(C, maxima(ks[j + 1]) / std::pow(static_cast<double>(ks[j]) * sigma, s));
  }
  C = std::max(C, 1.0);  // t >= 1
  out.mass_constant = C;
  out.lower = std::min(out.upper, 1.0 / C);
  return out;
}

std::vector<std::pair<double, double>> cantor_intervals(double dim, int depth) {
  if (!(dim > 0.0 && dim <= 1.0)) throw InvalidArgument("Cantor dimension must lie in (0, 1]");
  if (depth < 0) throw InvalidArgument("depth must be nonnegative");
  std::vector<std::pair<double, double>> cur{{-0.5, 0.5}};
  if (dim == 1.0) return cur;
  const double r = std::pow(2.0, -1.0 / dim);
  for (int g = 0; g < depth; ++g) {
    std::vector<std::pair<double, double>> next;
    for (const auto& [a, b] : cur) {
      const double len = (b - a) * r;
      next.emplace_back(a, a + len);
      next.emplace_back(b - len, b);
    }
    cur = std::move(next);
  }
  return cur;
}

namespace {

bool is_middle_thirds(double dim) { return std::abs(dim - std::log(2.0) / std::log(3.0)) < 1e-12; }

// cell indices on one axis of the K-grid for a set of dimension dim
std::vector<std::int64_t> axis_cells(double dim, int depth, std::int64_t K) {
  std::vector<std::int64_t> out;
  if (dim == 1.0) {
    for (std::int64_t j = 0; j < K; ++j) out.push_back(j);
    return out;
  }
  if (dim == 0.0) return {(K - 1) / 2};
  if (is_middle_thirds(dim)) {
    // exact ternary construction: digits 0 or 2 in the top `depth` places
    std::int64_t span = K;
    std::vector<std::int64_t> starts{0};
    for (int g = 0; g < depth; ++g) {
      span /= 3;
      std::vector<std::int64_t> next;
      for (auto a : starts) {
        next.push_back(a);
        next.push_back(a + 2 * span);
      }
      starts = std::move(next);
    }
    for (auto a : starts) {
      for (std::int64_t j = a; j < a + span; ++j) out.push_back(j);
    }
    return out;
  }
  const double Kd = static_cast<double>(K);
  for (const auto& [a, b] : cantor_intervals(dim, depth)) {
    // cells overlapping [a, b] in a set of positive length
    const auto j0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((a + 0.5) * Kd)));
    const auto j1 = std::min<std::int64_t>(K - 1, static_cast<std::int64_t>(std::ceil((b + 0.5) * Kd)) - 1);
    for (std::int64_t j = j0; j <= j1; ++j) {
      if (out.empty() || out.back() < j) out.push_back(j);
    }
  }
  return out;
}

}  // namespace

GridSet cantor_product(const std::vector<double>& axis_dims, int depth, bool hyperplane) {
  const int n = static_cast<int>(axis_dims.size()) + (hyperplane ? 1 : 0);
  if (axis_dims.empty() || n > kMaxDim) throw InvalidArgument("bad number of axes");
  if (depth < 1) throw InvalidArgument("depth must be >= 1");
  int R = depth;
  for (double d : axis_dims) {
    if (!(d >= 0.0 && d <= 1.0)) throw InvalidArgument("axis dimensions must lie in [0, 1]");
    if (d > 0.0 && d < 1.0 && !is_middle_thirds(d)) {
      // 3^-R no longer than a generation-`depth` interval
      const double need = depth * std::log(std::pow(2.0, 1.0 / d)) / std::log(3.0);
      R = std::max(R, static_cast<int>(std::ceil(need - 1e-9)));
    }
  }
  if (R > 30) throw InvalidArgument("requested Cantor set needs a grid finer than 3^-30");
  std::int64_t K = 1;
  for (int i = 0; i < R; ++i) K *= 3;
  std::vector<std::vector<std::int64_t>> axes;
  double total = 1.0;
  for (double d : axis_dims) {
    axes.push_back(axis_cells(d, depth, K));
    total *= static_cast<double>(axes.back().size());
  }
  if (hyperplane) axes.push_back({(K - 1) / 2});
  if (total > 2e7) throw InvalidArgument("Cantor product has too many cells for this depth");
  std::vector<std::int64_t> cells;
  cells.reserve(static_cast<std::size_t>(total));
  std::vector<std::size_t> pos(axes.size(), 0);
  while (true) {
    std::int64_t lin = 0;
    for (std::size_t i = 0; i < axes.size(); ++i) lin = lin * K + axes[i][pos[i]];
    cells.push_back(lin);
    int ax = static_cast<int>(axes.size()) - 1;
    while (ax >= 0 && ++pos[static_cast<std::size_t>(ax)] == axes[static_cast<std::size_t>(ax)].size()) {
      pos[static_cast<std::size_t>(ax--)] = 0;
    }
    if (ax < 0) break;
  }
  return GridSet::from_sorted_cells(n, K, hyperplane, std::move(cells));
}

GridSet cantor_product_set(double target_dimension, int n, int depth, Placement placement) {
  if (n < 1 || n > kMaxDim) throw InvalidArgument("dimension out of range");
  if (!(target_dimension > 0.0 && target_dimension < n)) {
    throw InvalidArgument("target dimension must lie in (0, n)");
  }
  const bool hp = placement == Placement::hyperplane;
  const int free = hp ? n - 1 : n;
  if (free < 1 || target_dimension > free) {
    throw InvalidArgument("target dimension unreachable with this placement");
  }
  const double per = target_dimension / free;
  return cantor_product(std::vector<double>(static_cast<std::size_t>(free), per), depth, hp);
}

Claim1Report claim1_check(const GridSet& e, double delta, int workers) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("delta must lie in (0, 1]");
  const int n = e.dim();
  const int m = carrier_dim(e);
  Claim1Report rep;
  rep.growth_exponent = n - 2 + 0.5 * delta;
  rep.energy_exponent = n - 2 + 0.25 * delta;
  const double a = rep.growth_exponent;
  const double s = rep.energy_exponent;
  if (!(s > 0.0)) throw InvalidArgument("energy exponent n - 2 + delta/4 must be positive");
  bool thinned = false;
  const GridSet carrier = thin_out(e, 3000, thinned);
  const auto mu = DiscreteMeasure::uniform_on(carrier);
  const double sigma = mu.cell_side;
  const double reach = sigma * std::sqrt(static_cast<double>(m));
  // extent of the support
  double diam2 = 0.0;
  Point lo = mu.atoms.front().x;
  Point hi = lo;
  for (const auto& at : mu.atoms) {
    for (int i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], at.x[i]);
      hi[i] = std::max(hi[i], at.x[i]);
    }
  }
  for (int i = 0; i < n; ++i) {
    const double ext = hi[i] - lo[i] + (i < m ? sigma : 0.0);
    diam2 += ext * ext;
  }
  const double D = std::sqrt(diam2);
  // radii ladder sigma * 2^(k/2) up to D
  std::vector<double> radii;
  for (double r = sigma; r < D * 1.5; r *= std::sqrt(2.0)) radii.push_back(r);
  const double w = 1.0 / static_cast<double>(mu.atoms.size());
  // small balls: density bound (2 rho / sigma)^m w, largest at rho = sigma
  double C = w * std::pow(2.0, m) * std::pow(sigma, -a);
  const auto per_atom = parallel_map(mu.atoms.size(), workers, [&](std::size_t i) {
    std::vector<double> d;
    d.reserve(mu.atoms.size());
    for (const auto& b : mu.atoms) d.push_back(distance(mu.atoms[i].x, b.x));
    std::sort(d.begin(), d.end());
    double best = 0.0;
    for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
      // rho in [r_k, r_{k+1}]: mass within r_{k+1} + reach of the centre cell
      const auto cnt = std::upper_bound(d.begin(), d.end(), radii[k + 1] + reach) - d.begin();
      best = std::max(best, static_cast<double>(cnt) * w / std::pow(radii[k], a));
    }
    return best;
  });
  for (double b : per_atom) C = std::max(C, b);
  rep.growth_constant = C;
  rep.radial_constant = s * std::pow(D, a - s) / (a - s);
  rep.tail = std::pow(D, -s);
  rep.energy = riesz_energy(mu, s, SelfEnergy::uniform_cell, workers).value;
  rep.bound = C * rep.radial_constant + rep.tail;
  rep.holds = rep.energy <= rep.bound;
  return rep;
}

}  // namespace uclab::gmt

namespace uclab::lattice {

CountingReport counting_lower_bound_check(const GridSet& e, double s, std::int64_t K) {
  if (e.empty()) throw InvalidArgument("set is empty");
  if (!is_power_of_three(K)) throw InvalidArgument("K must be a power of 3");
  if (!(s > 0.0)) throw InvalidArgument("exponent s must be positive");
  CountingReport rep;
  rep.K = K;
  rep.s = s;
  rep.count = static_cast<std::int64_t>(cubes_meeting_set_indices(K, e).size());
  // a single cell stands for a point: its content is an artefact of the raster
  if (e.size() == 1) {
    rep.vacuous = true;
    return rep;
  }
  rep.content_upper = gmt::hausdorff_content(e, s).upper;
  if (rep.content_upper == 0.0) {
    rep.vacuous = true;
    return rep;
  }
  rep.ratio = static_cast<double>(rep.count) / (rep.content_upper * std::pow(static_cast<double>(K), s));
  return rep;
}

}  // namespace uclab::lattice
