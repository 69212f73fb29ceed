#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uclab/harmonic.hpp"

namespace uclab::zoo {

using harmonic::HarmonicFunction;

struct Entry {
  std::string name;
  HarmonicFunction u;
};

/// Unique harmonic polynomial whose restriction to {x_n = 0} is f0 and whose
/// normal derivative there is f1 (f0, f1 must not involve x_n).
Polynomial harmonic_extension(const Polynomial& f0, const Polynomial& f1);

/// Basis of homogeneous harmonic polynomials of the given degree with
/// integer coefficients (content 1), one per monomial seed x'^a or x'^a x_n.
std::vector<Polynomial> homogeneous_basis(int dim, int degree);

/// Every basis element of degree 1..max_degree (named "h<n>d<degree>_<k>").
std::vector<Entry> homogeneous_family(int dim, int max_degree = 12);

/// Deterministic 64-bit generator; the exact stream is fixed by the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi);
  /// Uniform real in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_[4];
};

/// Integer combination (coefficients in [-coef_range, coef_range]) of the
/// homogeneous bases of degrees min_degree..max_degree. Never constant.
HarmonicFunction random_harmonic_polynomial(int dim, int min_degree, int max_degree, Rng& rng,
                                            int coef_range = 4);

/// Sum of `count` exterior potentials with charges in [-1, 1] placed at
/// distance >= min_distance from the unit cube [-1/2, 1/2]^n.
HarmonicFunction random_point_charges(int dim, int count, Rng& rng, double min_distance = 3.0);

/// Mixed collection used by property tests and experiments.
std::vector<Entry> randomized_zoo(int dim, int count, std::uint64_t seed, int max_degree = 8);

/// Rescales u so that the certified sup of |grad u| over `ball` equals 1.
HarmonicFunction normalize_on(const HarmonicFunction& u, const harmonic::Ball& ball,
                              double tolerance = 1e-9);

}  // namespace uclab::zoo
