#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "uclab/point.hpp"
#include "uclab/polynomial.hpp"

namespace uclab::harmonic {

/// Exactly evaluable harmonic function: a polynomial, a finite sum of real
/// solid spherical harmonics, or an exterior point-charge potential.
///
/// Every kind carries an overall `scale` applied to values and derivatives,
/// so normalisation never perturbs the (usually integer) stored coefficients.
class HarmonicFunction {
 public:
  enum class Kind { polynomial, spherical_harmonic_sum, point_charge_sum };

  struct MonomialTerm {
    std::vector<int> exponents;
    double coef = 0.0;
  };
  /// n = 2: order = +degree is r^d cos(d theta), -degree is r^d sin(d theta).
  /// n = 3: real orthonormal Y_lm, m in [-l, l], times r^l.
  struct SphericalTerm {
    int degree = 0;
    int order = 0;
    double amplitude = 0.0;
  };
  /// Potential q * Phi(x - location), Phi = -log|x| (n = 2) or |x|^(2-n).
  struct Charge {
    Point location;
    double charge = 0.0;
  };

  static HarmonicFunction polynomial(int dim, std::vector<MonomialTerm> terms, double scale = 1.0);
  static HarmonicFunction from_polynomial(const Polynomial& p, double scale = 1.0);
  static HarmonicFunction spherical(int dim, std::vector<SphericalTerm> terms, double scale = 1.0);
  static HarmonicFunction point_charges(int dim, std::vector<Charge> charges, double scale = 1.0);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double scale() const { return scale_; }
  HarmonicFunction with_scale(double scale) const;

  const std::vector<MonomialTerm>& monomial_terms() const { return monomials_; }
  const std::vector<SphericalTerm>& spherical_terms() const { return sphericals_; }
  const std::vector<Charge>& charges() const { return charges_; }

  /// Polynomial form (unscaled) for the polynomial and spherical kinds.
  const Polynomial& as_polynomial() const;
  bool is_polynomial_backed() const { return kind_ != Kind::point_charge_sum; }
  /// Exact symbolic Laplacian of the stored coefficients is the zero polynomial.
  bool laplacian_is_exactly_zero() const;

  double value(const Point& x) const;
  Point gradient(const Point& x) const;
  /// Hessian at x, row-major n*n.
  std::vector<double> hessian(const Point& x) const;

  /// Upper bound on the operator norm of the Hessian over the box [lo, hi].
  double hessian_bound(const Point& lo, const Point& hi) const;
  /// Upper bound on the Frobenius norm of the third derivative over [lo, hi].
  double third_derivative_bound(const Point& lo, const Point& hi) const;
  /// Frobenius norm of the third derivative at x (polynomial kinds only).
  double third_derivative_norm(const Point& x) const;
  /// Upper bound on the Frobenius norm of the fourth derivative over [lo, hi];
  /// +inf for point charges.
  double fourth_derivative_bound(const Point& lo, const Point& hi) const;

  /// Distance from the box to the nearest charge (+inf for polynomial kinds).
  double charge_distance(const Point& lo, const Point& hi) const;

  /// u o s with s(y) = lambda * R y + b, R orthogonal (row-major n*n).
  /// Point-charge sums keep the gradient exactly; in n = 2 the value shifts
  /// by a constant.
  HarmonicFunction compose_affine(double lambda, const std::vector<double>& rotation,
                                  const Point& shift) const;

 private:
  HarmonicFunction() = default;
  void compile();
  void check_point(const Point& x) const;

  Kind kind_ = Kind::polynomial;
  int dim_ = 0;
  double scale_ = 1.0;
  std::vector<MonomialTerm> monomials_;
  std::vector<SphericalTerm> sphericals_;
  std::vector<Charge> charges_;

  Polynomial poly_;
  std::vector<FlatPolynomial> grad_;   // n
  std::vector<FlatPolynomial> hess_;   // n*n, symmetric entries duplicated
  std::vector<FlatPolynomial> third_;  // i <= j <= k
  std::vector<int> third_mult_;
  std::vector<FlatPolynomial> fourth_;  // i <= j <= k <= l
  std::vector<int> fourth_mult_;
  FlatPolynomial flat_;
};

/// Real solid harmonic r^l Y_lm as a polynomial (orthonormal on the unit sphere).
Polynomial solid_harmonic(int dim, int degree, int order);

struct Ball {
  Point center;
  double radius = 0.0;
  Ball() = default;
  Ball(Point c, double r);
};

/// Closed axis-aligned cube given by center and side length.
struct AxisCube {
  Point center;
  double side = 0.0;
  AxisCube() = default;
  AxisCube(Point c, double s);
  Point lo() const;
  Point hi() const;
};

using Region = std::variant<Ball, AxisCube>;

enum class EstimateMode { exact, sampled, certified };
std::string to_string(EstimateMode m);

/// value +/- error_bound. In certified mode the true value lies in the interval.
struct NormEstimate {
  double value = 0.0;
  double error_bound = 0.0;
  EstimateMode mode = EstimateMode::exact;
  std::int64_t evaluations = 0;

  double lower() const { return value - error_bound; }
  double upper() const { return value + error_bound; }
};

struct SupOptions {
  double tolerance = 1e-6;  // relative half-width of the certificate
  EstimateMode mode = EstimateMode::certified;
  int max_depth = 60;
  std::int64_t max_evaluations = 5'000'000;
  int sample_density = 64;  // per parameter axis, sampled mode only
};

/// sup of |grad u| over a ball or cube. Certified mode bounds the boundary
/// (|grad u|^2 is subharmonic) by adaptive branch and bound with Taylor
/// remainders built from exact second and third derivative bounds.
NormEstimate sup_grad(const HarmonicFunction& u, const Region& region, const SupOptions& opt = {});
/// sup of |grad u| over the (n-1)-box {x_axis = q.center[axis]} inside q.
NormEstimate sup_grad_slice(const HarmonicFunction& u, const AxisCube& q, int axis,
                            const SupOptions& opt = {});

struct MinOptions {
  double abs_tolerance = 1e-9;
  int max_depth = 40;
  std::int64_t max_evaluations = 2'000'000;
};

/// Certified inf of |grad u| over a ball or cube (two-sided, absolute tolerance).
NormEstimate min_grad(const HarmonicFunction& u, const Region& region, const MinOptions& opt = {});

enum class Comparison { below, above, undecided };
/// Decide whether inf_region |grad u| < threshold, refining only as far as needed.
Comparison compare_min_grad(const HarmonicFunction& u, const Region& region, double threshold,
                            int max_depth = 12);

struct QuadratureOptions {
  double tolerance = 1e-12;  // relative change between refinements
  int radial_nodes = 32;
  int angular_nodes = 64;
  int max_refinements = 6;
};

/// Mean of |grad u|^2 over the ball: (1 / |B|) * integral |grad u|^2.
NormEstimate mean_square_grad(const HarmonicFunction& u, const Ball& ball,
                              const QuadratureOptions& opt = {});

/// ||u||_{L^2(dB)} with respect to (unnormalised) surface measure.
NormEstimate sphere_l2_norm(const HarmonicFunction& u, const Ball& ball,
                            const QuadratureOptions& opt = {});

/// Mean of |u(y) - u(x)|^2 over the sphere dB(x, r) (normalised measure).
NormEstimate sphere_mean_oscillation(const HarmonicFunction& u, const Point& x, double r,
                                     const QuadratureOptions& opt = {});

}  // namespace uclab::harmonic
