#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uclab/lattice.hpp"
#include "uclab/point.hpp"

namespace uclab::gmt {

struct Atom {
  Point x;
  double w = 0.0;
};

/// Weighted atoms. When cell_side > 0 every atom stands for the uniform
/// measure on an axis cube of that side and dimension cell_dim centred at x.
struct DiscreteMeasure {
  std::vector<Atom> atoms;
  double cell_side = 0.0;
  int cell_dim = 0;

  double total_mass() const;
  void normalize();
  /// Probability measure uniform on the cells of E.
  static DiscreteMeasure uniform_on(const lattice::GridSet& e);
};

/// Within-cell energy of the uniform probability measure on the unit m-cube:
/// the integral of |x - y|^-s over [0,1]^m x [0,1]^m, for s < m, m <= 3.
double unit_cell_energy(int m, double s);

enum class SelfEnergy { uniform_cell, drop_diagonal };

struct EnergyReport {
  double value = 0.0;
  bool infinite = false;         // point mass with nothing to smooth it
  std::string method;            // "uniform_cell", "drop_diagonal", "atomic"
  std::size_t atoms = 0;         // after merging coincident atoms
};

/// Double sum over distinct atoms of w_i w_j |x_i - x_j|^-s plus, for
/// cell-discretised measures, the uniform-cell self-energy of each atom.
EnergyReport riesz_energy(const DiscreteMeasure& mu, double s,
                          SelfEnergy mode = SelfEnergy::uniform_cell, int workers = 1);

enum class MeasureFamily { uniform, greedy_redistribution };

struct CapacityReport {
  double lower = 0.0;            // 1 / I_s(mu)
  double energy = 0.0;
  std::vector<double> sweep_energies;  // greedy: energy after each sweep
  std::size_t atoms = 0;
  bool subsampled = false;       // measure carried by a subset of the cells
};

struct CapacityOptions {
  MeasureFamily family = MeasureFamily::uniform;
  int sweeps = 20;
  std::size_t max_atoms = 12000;
  int workers = 1;
};

/// Lower bound on Cap_s(E) from an admissible probability measure on E.
CapacityReport riesz_capacity_lower(const lattice::GridSet& e, double s,
                                    const CapacityOptions& opt = {});

struct ContentEstimate {
  double s = 0.0;
  double upper = 0.0;
  double lower = 0.0;
  std::vector<lattice::Cube> cover;  // realises `upper` (unit-cube frame)
  bool coarse = false;               // search depth stopped above E's resolution
  bool lower_available = true;
  double mass_constant = 0.0;        // sup mu(Q) / side(Q)^s over the probed cubes
};

/// Two-sided estimate of the s-dimensional Hausdorff content of E.
ContentEstimate hausdorff_content(const lattice::GridSet& e, double s, int search_depth = 64);

enum class Placement { hyperplane, generic };

/// Middle-lambda Cantor set of dimension dim in [0, 1] on [-1/2, 1/2], as the
/// closed intervals of generation `depth`. lambda = 1 - 2^(1 - 1/dim).
std::vector<std::pair<double, double>> cantor_intervals(double dim, int depth);

/// Product of one-dimensional sets with the given per-axis dimensions
/// (1 = full interval, 0 = the centre cell). Rasterised on a triadic grid
/// fine enough to keep each generation-`depth` interval at least one cell.
lattice::GridSet cantor_product(const std::vector<double>& axis_dims, int depth, bool hyperplane);

/// Equal split of target_dimension over the n (generic) or n - 1
/// (hyperplane) free axes.
lattice::GridSet cantor_product_set(double target_dimension, int n, int depth, Placement placement);

struct Claim1Report {
  double growth_exponent = 0.0;  // n - 2 + delta / 2
  double energy_exponent = 0.0;  // n - 2 + delta / 4
  double growth_constant = 0.0;  // measured sup mu(B(x, r)) / r^growth
  double radial_constant = 0.0;  // C(n, delta)
  double tail = 0.0;
  double energy = 0.0;
  double bound = 0.0;            // growth_constant * radial_constant + tail
  bool holds = false;
};

/// Growth-to-energy mechanism check for the normalised measure on E.
Claim1Report claim1_check(const lattice::GridSet& e, double delta, int workers = 1);

}  // namespace uclab::gmt
