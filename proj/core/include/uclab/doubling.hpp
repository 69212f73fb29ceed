#pragma once

#include <string>
#include <vector>

#include "uclab/harmonic.hpp"
#include "uclab/lattice.hpp"

namespace uclab::doubling {

using harmonic::HarmonicFunction;

enum class Variant { sup_ratio, l2_ratio, maximal_cube };
std::string to_string(Variant v);

/// Certified sups below this are treated as a vanishing gradient.
inline constexpr double kVanishing = 1e-30;

struct DoublingReport {
  Point center;
  double radius = 0.0;
  double index_value = 0.0;
  double error_bound = 0.0;
  Variant variant = Variant::sup_ratio;
  // provenance
  double ratio = 2.0;              // outer radius / inner radius
  double tolerance = 0.0;
  int grid_density = 0;            // maximal_cube only
  std::vector<double> ladder;      // maximal_cube only
  int samples = 0;                 // (x, r) pairs evaluated
  bool is_lower_bound = false;     // maximal_cube: index_value bounds N(Q) from below

  double lower() const { return index_value - error_bound; }
  double upper() const { return index_value + error_bound; }
};

/// log(sup_{B(x, ratio r)} |grad u| / sup_{B(x, r)} |grad u|) with propagated error.
DoublingReport doubling_index(const HarmonicFunction& u, const Point& x, double r,
                              const harmonic::SupOptions& opt = {}, double ratio = 2.0);

/// Same with mean squares over the balls.
DoublingReport l2_doubling_index(const HarmonicFunction& u, const Point& x, double r,
                                 const harmonic::QuadratureOptions& opt = {});

struct MaximalOptions {
  int grid_density = 9;
  std::vector<double> ladder;  // empty: side * 2^-k, k = 0..rungs-1
  int rungs = 8;
  double ratio = 0.0;          // 0: 10 n
  harmonic::SupOptions sup{1e-4};
  int workers = 1;
};

std::vector<double> default_ladder(double side, int rungs);

/// Lower bound on the maximal doubling index of Q from a grid of centres and a
/// radius ladder. index_value is the largest certified lower bound found.
DoublingReport maximal_doubling(const HarmonicFunction& u, const lattice::Cube& q,
                                const MaximalOptions& opt = {});

struct ThreeSpheres {
  double defect = 0.0;
  double error_bound = 0.0;
  double alpha = 0.0;
  double norms[3] = {0.0, 0.0, 0.0};
};

/// log|u|_{r2} - alpha log|u|_{r1} - (1 - alpha) log|u|_{r3}, L2 norms on spheres.
ThreeSpheres three_spheres_defect(const HarmonicFunction& u, const Point& x, double r1, double r2,
                                  double r3, const harmonic::QuadratureOptions& opt = {});

struct BigScaleReport {
  bool applicable = false;
  DoublingReport doubling;   // at (x, t r)
  double exponent = 0.0;     // log(sup_{B(tr)} / sup_{B(r)}) / log t
  double exponent_error = 0.0;
  double threshold = 0.0;
  double slack = 0.0;
  bool holds = false;        // exponent >= threshold / 6 - slack
};

BigScaleReport big_scale_doubling_check(const HarmonicFunction& u, const Point& x, double r,
                                        double t, double threshold, double slack = 0.0,
                                        const harmonic::SupOptions& opt = {});

/// N(x, theta r) - 2 N(x, r): the additive constant needed at this sample.
double almost_monotonicity_excess(const HarmonicFunction& u, const Point& x, double r,
                                  double theta = 0.25, const harmonic::SupOptions& opt = {});

enum class CubeClass { good, bad, undecided };
std::string to_string(CubeClass c);

struct ClassifyOptions {
  double margin_fraction = 0.05;     // margin = margin_fraction * N
  double comparability_scale = 1.0;  // N(Q) <= scale * N_L(centre, side) + offset
  double comparability_offset = 0.0;
  MaximalOptions maximal;
};

struct Classification {
  CubeClass cls = CubeClass::undecided;
  double lower = 0.0;  // maximal doubling lower bound (first witness if bad)
  double upper = 0.0;  // comparability upper bound
  int samples = 0;
};

/// Three-way test of N(Q) against N: bad if lower > N + margin, good if the
/// comparability upper bound < N - margin, undecided otherwise.
Classification classify_cube(const HarmonicFunction& u, const lattice::Cube& q, double N,
                             const ClassifyOptions& opt = {});

}  // namespace uclab::doubling
