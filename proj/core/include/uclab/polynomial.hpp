#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "uclab/point.hpp"

namespace uclab {

using Exponents = std::array<std::uint8_t, kMaxDim>;

/// Sparse multivariate polynomial with real coefficients in a canonical
/// (sorted, zero-free) form. Arithmetic is exact whenever every coefficient
/// and intermediate product is an integer below 2^53.
class Polynomial {
 public:
  struct Term {
    Exponents exponents{};
    double coef = 0.0;
  };

  Polynomial() = default;
  explicit Polynomial(int dim);

  static Polynomial constant(int dim, double c);
  static Polynomial monomial(int dim, const Exponents& e, double coef = 1.0);
  /// x_axis
  static Polynomial coordinate(int dim, int axis);

  int dim() const { return dim_; }
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  bool is_homogeneous() const;
  std::vector<Term> terms() const;
  double coefficient(const Exponents& e) const;

  void add_term(const Exponents& e, double coef);

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend bool operator==(const Polynomial& a, const Polynomial& b);

  Polynomial derivative(int axis) const;
  Polynomial laplacian() const;
  Polynomial pow(int k) const;

  double evaluate(const Point& x) const;

 private:
  int dim_ = 0;
  std::map<Exponents, double> terms_;
};

/// Flattened polynomial for hot loops: precomputed power tables, no maps.
class FlatPolynomial {
 public:
  FlatPolynomial() = default;
  explicit FlatPolynomial(const Polynomial& p);

  int dim() const { return dim_; }
  bool empty() const { return coefs_.empty(); }
  double evaluate(const Point& x) const;
  /// sup over the box [lo, hi] of the sum of |term|, an upper bound on |p|.
  double abs_bound(const Point& lo, const Point& hi) const;

 private:
  int dim_ = 0;
  int max_degree_ = 0;
  std::vector<double> coefs_;
  std::vector<Exponents> exps_;
};

}  // namespace uclab
