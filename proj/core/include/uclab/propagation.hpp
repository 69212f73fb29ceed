#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "uclab/doubling.hpp"
#include "uclab/gmt.hpp"
#include "uclab/lattice.hpp"

namespace uclab::propagation {

using harmonic::HarmonicFunction;

struct CensusContext {
  int A = 1;
  double delta = 0.0;
  double eta = 0.0;  // hyperplane ceilings only
  double c = 0.0;
};

/// Counts at one generation against one ceiling. Undecided cubes count
/// against the ceiling together with the bad ones.
struct CensusResult {
  int level = 0;
  double threshold_N = 0.0;
  std::int64_t bad_count = 0;
  std::int64_t undecided_count = 0;
  std::int64_t total_count = 0;
  double bound = 0.0;
  CensusContext context;
  lattice::GridSet flagged;  // bad or undecided cubes, in Q's frame

  bool within_bound() const { return static_cast<double>(bad_count + undecided_count) <= bound; }
};

struct CensusOptions {
  double c = 1.0;                       // precondition N(Q) <= (1 + c) N
  std::vector<double> deltas{0.5};
  std::vector<double> etas{0.5};        // hyperplane census only
  doubling::ClassifyOptions classify;   // inner workers are forced to 1
  int workers = 1;                      // cubes classified concurrently
};

struct CensusReport {
  bool applicable = false;
  std::string reason;
  double precondition_index = 0.0;  // lower bound on N(Q), or N(2Q) for hyperplane censuses
  double precondition_limit = 0.0;
  std::vector<CensusResult> results;  // by level, then by delta (and eta)
};

/// Three-way classification of every cube of generations 1..generations of Q
/// (branching 2A + 1), compared with (1/2 (2A+1)^(n-2+delta))^level.
CensusReport bad_cube_census(const HarmonicFunction& u, const lattice::Cube& q, int A, double N,
                             int generations, const CensusOptions& opt = {});

/// Children of Q meeting {x_n = 0}, compared with eta (2A+1)^(n-2+delta) for
/// every (eta, delta) pair. Requires a lower bound on N(2Q) of at most 2N.
CensusReport hyperplane_census(const HarmonicFunction& u, const lattice::Cube& q, int A, double N,
                               const CensusOptions& opt = {});

struct CapacityCensus {
  bool applicable = false;
  std::string reason;
  bool vacuous = false;           // no flagged hyperplane cube
  std::int64_t flagged = 0;
  double s = 0.0;                 // n - 2 + delta
  double capacity = 0.0;          // lower bound, Q rescaled to the unit cube
  double doubling_2Q = 0.0;       // lower bound on N(2Q)
  double ratio = 0.0;             // doubling_2Q / N
  lattice::GridSet set;           // flagged slices, hyperplane set in Q's frame
};

CapacityCensus capacity_census(const HarmonicFunction& u, const lattice::Cube& q, int A, double N,
                               double delta, const CensusOptions& opt = {},
                               const gmt::CapacityOptions& cap = {});

struct WidthOptions {
  doubling::MaximalOptions maximal;  // N(Q) of the parent and the index at sample points
  int rungs = 6;                     // radii diam(q) / (2A+1) * 2^-k, k = 1..rungs
  int directions = 12;               // n = 2: equally spaced normals on a half circle
};

struct WidthReport {
  double width = 0.0;          // thinnest slab over the tried normals holding the F samples
  double diameter = 0.0;       // of q
  double relative = 0.0;       // width / diameter
  double threshold = 0.0;      // N(Q) / (1 + c)
  double parent_index = 0.0;   // lower bound on N(Q)
  std::int64_t in_set = 0;     // samples certified in F
  std::int64_t samples = 0;
  Point normal;                // minimising direction
};

/// Samples F = {x in q : sup_r N(x, r) > N(Q) / (1 + c)} at the cell centres
/// of q refined generations_down times. Only certified members enter F.
WidthReport width_of_bad_set(const HarmonicFunction& u, const lattice::Cube& q, double c,
                             int generations_down, const WidthOptions& opt = {});

struct SublevelOptions {
  bool check_normalization = true;
  double normalization_tolerance = 1e-3;
  int compare_depth = 12;
  int search_depth = 64;
  int workers = 1;
};

struct SublevelReport {
  lattice::GridSet set;              // cells of Q's K-grid (Q's frame) with min |grad u| < e^-a, or undecided
  std::int64_t undecided = 0;
  bool unresolved = false;           // no cell certified either way
  gmt::ContentEstimate content;      // in Q's frame
  double scale = 1.0;                // side(Q)^s: multiply content to get true size
};

SublevelReport sublevel_content(const HarmonicFunction& u, const lattice::Cube& q, double a, double s,
                                std::int64_t K, const SublevelOptions& opt = {});

struct CriticalOptions {
  harmonic::QuadratureOptions quadrature{1e-10};
  int compare_depth = 12;
  int workers = 1;
};

struct CriticalSetCover {
  double r = 0.0;
  std::vector<Point> centers;
  std::int64_t ball_count = 0;
  lattice::GridSet detected;      // cells whose centre satisfies the inequality (or is undecided)
  std::int64_t undecided = 0;
};

/// Tests the defining inequality of C_r(u) at the cell centres of Q's K-grid
/// and covers the detected centres greedily by r-balls.
CriticalSetCover effective_critical_set(const HarmonicFunction& u, const lattice::Cube& q, double r,
                                        std::int64_t K, const CriticalOptions& opt = {});

/// Greedy r-cover in input order: a point opens a ball unless it lies
/// within r of an existing centre.
std::vector<Point> greedy_cover(const std::vector<Point>& points, double r);

enum class RecursionVariant { proof, statement };
std::string to_string(RecursionVariant v);

struct RecursionParams {
  double A = 9.0;
  double delta = 0.5;
  double c = 1.0;
  double C1 = 1.0;
  double ceiling = 1.0;  // bound on M where the arguments leave the grid (a <= 0)
  RecursionVariant variant = RecursionVariant::proof;
};

/// M(N, a) for N <= N0.
struct Boundary {
  std::function<double(double N, double a)> f;
  double N0 = 0.0;
  std::string description;

  static Boundary exponential(double C, double beta, double N0);
  static Boundary constant(double kappa, double N0);
  /// Piecewise linear through (a_i, value_i), a increasing; constant beyond the ends.
  static Boundary tabulated(std::vector<std::pair<double, double>> points, double N0);
};

struct RecursionGrid {
  double N_min = 10.0;
  double N_max = 160.0;
  double N_step = 10.0;
  double a_max = 1000.0;
  double a_step = 0.5;
};

struct RecursionState {
  RecursionParams params;
  RecursionGrid grid;
  std::string boundary;
  std::vector<double> N;            // rows: the grid and the N / (1+c)^k it reaches
  std::vector<bool> on_grid;        // row requested by the grid
  std::vector<double> a;            // columns
  std::vector<std::vector<double>> M;
  std::int64_t interpolated_lookups = 0;  // off-node arguments (monotone interpolation)
  double beta = 0.0;                // envelope M <= C e^(-beta a / N) over the grid rows
  double C = 0.0;
  double fit_residual = 0.0;        // rms gap in log M below the envelope
  bool chain_holds = false;         // A^(2-delta) A^(-c C' beta) + A^-delta <= A^(-C1 beta) for some C'
  double chain_C_prime = 0.0;       // smallest such C'

  /// Same interpolation as the recursion uses.
  double at(double N, double a) const;
  double boundary_N0 = 0.0;
  std::function<double(double, double)> boundary_f;
};

RecursionState recursion_simulate(const RecursionParams& params, const Boundary& boundary,
                                  const RecursionGrid& grid);

struct FitOptions {
  harmonic::SupOptions sup{1e-6};
  double normalization_tolerance = 1e-6;
  int workers = 1;
};

struct FitReport {
  double alpha = 0.0;
  double intercept = 0.0;        // log C
  double residual = 0.0;         // rms of log sigma residuals
  std::vector<double> eps;       // sup over E (upper bound)
  std::vector<double> sigma;     // sup over B(0, 1/2)
  bool covers_half_ball = false; // E contains every cell meeting B(0, 1/2)
};

/// Least-squares slope of log sigma against log eps over a family normalised
/// to sup_{B_1} |grad u| = 1. Every cell of E must meet the closed ball B(0, 1/2).
FitReport fit_propagation_exponent(const std::vector<HarmonicFunction>& family, const lattice::GridSet& e,
                                   const FitOptions& opt = {});

struct WeakBound {
  double N = 0.0;           // least N with N^3 log C - N log kappa >= beta log(1/eps)
  double smallness = 1.0;   // exp(-N): bound on sup_{B_1/2} |grad u|
};

WeakBound weak_bound_calculator(double kappa, double epsilon, double C_census, double beta);

}  // namespace uclab::propagation
