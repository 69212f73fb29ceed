#include "uclab/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "uclab/error.hpp"

namespace uclab::harmonic {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

double factorial_ratio(int num, int den) {
  // num! / den!
  double r = 1.0;
  if (num >= den) {
    for (int i = den + 1; i <= num; ++i) r *= i;
  } else {
    for (int i = num + 1; i <= den; ++i) r /= i;
  }
  return r;
}

Exponents exps2(int a, int b) {
  Exponents e{};
  e[0] = static_cast<std::uint8_t>(a);
  e[1] = static_cast<std::uint8_t>(b);
  return e;
}

/// Re (x + i y)^m  (real = true) or Im (x + i y)^m, as polynomials in `dim` variables.
Polynomial complex_power(int dim, int m, bool real) {
  Polynomial p(dim);
  for (int k = 0; k <= m; ++k) {
    const bool even = (k % 2 == 0);
    if (even != real) continue;
    const int sign_index = real ? k / 2 : (k - 1) / 2;
    const double sign = (sign_index % 2 == 0) ? 1.0 : -1.0;
    p.add_term(exps2(m - k, k), sign * binomial(m, k));
  }
  return p;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

double box_distance(const Point& p, const Point& lo, const Point& hi) {
  double s = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    const double d = p[i] < lo[i] ? lo[i] - p[i] : (p[i] > hi[i] ? p[i] - hi[i] : 0.0);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

Polynomial solid_harmonic(int dim, int degree, int order) {
  if (degree < 0) throw InvalidArgument("spherical harmonic degree must be >= 0");
  if (dim == 2) {
    if (degree == 0) {
      if (order != 0) throw InvalidArgument("degree-0 harmonic in n=2 needs order 0");
      return Polynomial::constant(2, 1.0 / std::sqrt(2.0 * std::numbers::pi));
    }
    if (order != degree && order != -degree) {
      throw InvalidArgument("n=2 spherical harmonic order must be +/- degree");
    }
    return complex_power(2, degree, order > 0) * (1.0 / std::sqrt(std::numbers::pi));
  }
  if (dim == 3) {
    const int l = degree;
    const int m = std::abs(order);
    if (m > l) throw InvalidArgument("spherical harmonic order exceeds degree");
    // r^l P_l^m(z/r) = rho^m * sum_k c_k z^(l-2k-m) r^(2k)
    Polynomial r2(3);
    for (int i = 0; i < 3; ++i) {
      Exponents e{};
      e[i] = 2;
      r2.add_term(e, 1.0);
    }
    Polynomial radial(3);
    for (int k = 0; 2 * k <= l - m; ++k) {
      const int power = l - 2 * k;
      double c = std::ldexp(1.0, -l) * ((k % 2 == 0) ? 1.0 : -1.0) * binomial(l, k) *
                 binomial(2 * l - 2 * k, l) * factorial_ratio(power, power - m);
      Exponents e{};
      e[2] = static_cast<std::uint8_t>(power - m);
      radial += Polynomial::monomial(3, e, c) * r2.pow(k);
    }
    double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) / factorial_ratio(l + m, l - m));
    if (m != 0) norm *= std::sqrt(2.0);
    Polynomial angular = (m == 0) ? Polynomial::constant(3, 1.0) : complex_power(3, m, order > 0);
    return angular * radial * norm;
  }
  throw InvalidArgument("spherical harmonics implemented for n = 2, 3 only");
}

HarmonicFunction HarmonicFunction::polynomial(int dim, std::vector<MonomialTerm> terms,
                                              double scale) {
  Polynomial p(dim);
  for (const auto& t : terms) {
    if (static_cast<int>(t.exponents.size()) != dim) {
      throw InvalidArgument("monomial exponent count does not match dimension");
    }
    Exponents e{};
    for (int i = 0; i < dim; ++i) {
      if (t.exponents[i] < 0 || t.exponents[i] > 255) {
        throw InvalidArgument("monomial exponent out of range");
      }
      e[i] = static_cast<std::uint8_t>(t.exponents[i]);
    }
    p.add_term(e, t.coef);
  }
  HarmonicFunction u;
  u.kind_ = Kind::polynomial;
  u.dim_ = dim;
  u.scale_ = scale;
  u.monomials_ = std::move(terms);
  u.poly_ = p;
  u.compile();
  return u;
}

HarmonicFunction HarmonicFunction::from_polynomial(const Polynomial& p, double scale) {
  std::vector<MonomialTerm> terms;
  for (const auto& t : p.terms()) {
    MonomialTerm m;
    m.exponents.assign(t.exponents.begin(), t.exponents.begin() + p.dim());
    m.coef = t.coef;
    terms.push_back(std::move(m));
  }
  return polynomial(p.dim(), std::move(terms), scale);
}

HarmonicFunction HarmonicFunction::spherical(int dim, std::vector<SphericalTerm> terms,
                                             double scale) {
  Polynomial p(dim);
  for (const auto& t : terms) p += solid_harmonic(dim, t.degree, t.order) * t.amplitude;
  HarmonicFunction u;
  u.kind_ = Kind::spherical_harmonic_sum;
  u.dim_ = dim;
  u.scale_ = scale;
  u.sphericals_ = std::move(terms);
  u.poly_ = p;
  u.compile();
  return u;
}

HarmonicFunction HarmonicFunction::point_charges(int dim, std::vector<Charge> charges,
                                                 double scale) {
  if (dim < 2 || dim > kMaxDim) throw InvalidArgument("dimension must be in [2, 8]");
  for (const auto& c : charges) {
    if (c.location.dim() != dim) throw InvalidArgument("charge location dimension mismatch");
    if (!std::isfinite(c.charge)) throw InvalidArgument("charge must be finite");
  }
  HarmonicFunction u;
  u.kind_ = Kind::point_charge_sum;
  u.dim_ = dim;
  u.scale_ = scale;
  u.charges_ = std::move(charges);
  return u;
}

HarmonicFunction HarmonicFunction::with_scale(double scale) const {
  HarmonicFunction u = *this;
  u.scale_ = scale;
  return u;
}

void HarmonicFunction::compile() {
  if (dim_ < 2 || dim_ > kMaxDim) throw InvalidArgument("dimension must be in [2, 8]");
  if (!std::isfinite(scale_)) throw InvalidArgument("scale must be finite");
  const Polynomial lap = poly_.laplacian();
  if (!lap.is_zero()) {
    double mag = 0.0;
    for (const auto& t : poly_.terms()) mag += std::abs(t.coef);
    double worst = 0.0;
    for (const auto& t : lap.terms()) worst = std::max(worst, std::abs(t.coef));
    const double deg = std::max(1, poly_.degree());
    if (worst > 1e-10 * mag * deg * deg) {
      throw InvalidArgument("polynomial is not harmonic (Laplacian does not vanish)");
    }
  }
  flat_ = FlatPolynomial(poly_);
  grad_.clear();
  hess_.clear();
  third_.clear();
  third_mult_.clear();
  std::vector<Polynomial> d1;
  for (int i = 0; i < dim_; ++i) d1.push_back(poly_.derivative(i));
  for (int i = 0; i < dim_; ++i) grad_.emplace_back(d1[static_cast<std::size_t>(i)]);
  std::vector<Polynomial> d2(static_cast<std::size_t>(dim_ * dim_));
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      d2[static_cast<std::size_t>(i * dim_ + j)] = d1[static_cast<std::size_t>(i)].derivative(j);
      hess_.emplace_back(d2[static_cast<std::size_t>(i * dim_ + j)]);
    }
  }
  auto permutations = [](std::vector<int> idx) {
    // number of distinct orderings of a sorted multi-index
    double r = 1.0;
    for (std::size_t i = 2; i <= idx.size(); ++i) r *= static_cast<double>(i);
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j < idx.size() && idx[j] == idx[i]) ++j;
      for (std::size_t k = 2; k <= j - i; ++k) r /= static_cast<double>(k);
      i = j;
    }
    return static_cast<int>(r);
  };
  fourth_.clear();
  fourth_mult_.clear();
  for (int i = 0; i < dim_; ++i) {
    for (int j = i; j < dim_; ++j) {
      for (int k = j; k < dim_; ++k) {
        const Polynomial d3 = d2[static_cast<std::size_t>(i * dim_ + j)].derivative(k);
        third_.emplace_back(d3);
        third_mult_.push_back(permutations({i, j, k}));
        for (int l = k; l < dim_; ++l) {
          fourth_.emplace_back(d3.derivative(l));
          fourth_mult_.push_back(permutations({i, j, k, l}));
        }
      }
    }
  }
}

double HarmonicFunction::third_derivative_norm(const Point& x) const {
  if (!is_polynomial_backed()) throw InvalidArgument("third_derivative_norm needs a polynomial kind");
  double sum = 0.0;
  for (std::size_t t = 0; t < third_.size(); ++t) {
    const double v = third_[t].evaluate(x);
    sum += third_mult_[t] * v * v;
  }
  return std::abs(scale_) * std::sqrt(sum);
}

double HarmonicFunction::fourth_derivative_bound(const Point& lo, const Point& hi) const {
  if (!is_polynomial_backed()) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t t = 0; t < fourth_.size(); ++t) {
    const double v = fourth_[t].abs_bound(lo, hi);
    sum += fourth_mult_[t] * v * v;
  }
  return std::abs(scale_) * std::sqrt(sum);
}

const Polynomial& HarmonicFunction::as_polynomial() const {
  if (!is_polynomial_backed()) throw InvalidArgument("point-charge sum has no polynomial form");
  return poly_;
}

bool HarmonicFunction::laplacian_is_exactly_zero() const {
  if (!is_polynomial_backed()) return true;
  return poly_.laplacian().is_zero();
}

void HarmonicFunction::check_point(const Point& x) const {
  if (x.dim() != dim_) {
    throw InvalidArgument("point dimension " + std::to_string(x.dim()) +
                          " does not match function dimension " + std::to_string(dim_));
  }
  for (const auto& c : charges_) {
    if (c.location == x) throw DomainError("evaluation at a charge location");
  }
}

double HarmonicFunction::value(const Point& x) const {
  check_point(x);
  if (is_polynomial_backed()) return scale_ * flat_.evaluate(x);
  double s = 0.0;
  for (const auto& c : charges_) {
    const double r = distance(x, c.location);
    s += c.charge * (dim_ == 2 ? -std::log(r) : std::pow(r, 2 - dim_));
  }
  return scale_ * s;
}

Point HarmonicFunction::gradient(const Point& x) const {
  check_point(x);
  Point g(dim_);
  if (is_polynomial_backed()) {
    for (int i = 0; i < dim_; ++i) g[i] = scale_ * grad_[static_cast<std::size_t>(i)].evaluate(x);
    return g;
  }
  for (const auto& c : charges_) {
    const Point d = x - c.location;
    const double r2 = d.norm2();
    // grad of -log r is -x/r^2; grad of r^(2-n) is (2-n) x r^-n
    const double f = dim_ == 2 ? -1.0 / r2 : (2.0 - dim_) * std::pow(r2, -0.5 * dim_);
    g += d * (c.charge * f);
  }
  g *= scale_;
  return g;
}

std::vector<double> HarmonicFunction::hessian(const Point& x) const {
  check_point(x);
  const int n = dim_;
  std::vector<double> h(static_cast<std::size_t>(n * n), 0.0);
  if (is_polynomial_backed()) {
    for (int i = 0; i < n * n; ++i) {
      h[static_cast<std::size_t>(i)] = scale_ * hess_[static_cast<std::size_t>(i)].evaluate(x);
    }
    return h;
  }
  for (const auto& c : charges_) {
    const Point d = x - c.location;
    const double r2 = d.norm2();
    double diag = 0.0;
    double outer = 0.0;
    if (n == 2) {
      diag = -1.0 / r2;
      outer = 2.0 / (r2 * r2);
    } else {
      const double rn = std::pow(r2, -0.5 * n);
      diag = (2.0 - n) * rn;
      outer = -(2.0 - n) * n * rn / r2;
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        h[static_cast<std::size_t>(i * n + j)] +=
            c.charge * ((i == j ? diag : 0.0) + outer * d[i] * d[j]);
      }
    }
  }
  for (double& v : h) v *= scale_;
  return h;
}

double HarmonicFunction::charge_distance(const Point& lo, const Point& hi) const {
  double best = kInf;
  for (const auto& c : charges_) best = std::min(best, box_distance(c.location, lo, hi));
  return best;
}

double HarmonicFunction::hessian_bound(const Point& lo, const Point& hi) const {
  const double s = std::abs(scale_);
  if (is_polynomial_backed()) {
    double sum = 0.0;
    for (const auto& p : hess_) {
      const double b = p.abs_bound(lo, hi);
      sum += b * b;
    }
    return s * std::sqrt(sum);
  }
  double sum = 0.0;
  for (const auto& c : charges_) {
    const double d = box_distance(c.location, lo, hi);
    if (d == 0.0) return kInf;
    const double k = dim_ == 2 ? 1.0 / (d * d)
                               : (dim_ - 1.0) * (dim_ - 2.0) * std::pow(d, -dim_);
    sum += std::abs(c.charge) * k;
  }
  return s * sum;
}

double HarmonicFunction::third_derivative_bound(const Point& lo, const Point& hi) const {
  const double s = std::abs(scale_);
  if (is_polynomial_backed()) {
    double sum = 0.0;
    for (std::size_t t = 0; t < third_.size(); ++t) {
      const double b = third_[t].abs_bound(lo, hi);
      sum += third_mult_[t] * b * b;
    }
    return s * std::sqrt(sum);
  }
  const double n = dim_;
  const double k3 = dim_ == 2 ? 6.0 * std::sqrt(2.0) + 8.0
                              : (n - 2.0) * (3.0 * n * std::sqrt(n) + n * (n + 2.0));
  double sum = 0.0;
  for (const auto& c : charges_) {
    const double d = box_distance(c.location, lo, hi);
    if (d == 0.0) return kInf;
    sum += std::abs(c.charge) * k3 * std::pow(d, -(n + 1.0));
  }
  return s * sum;
}

HarmonicFunction HarmonicFunction::compose_affine(double lambda, const std::vector<double>& rotation,
                                                  const Point& shift) const {
  const int n = dim_;
  if (static_cast<int>(rotation.size()) != n * n || shift.dim() != n) {
    throw InvalidArgument("affine map dimension mismatch");
  }
  if (!(lambda > 0.0)) throw InvalidArgument("affine scale must be positive");
  if (is_polynomial_backed()) {
    // x_i = lambda * sum_j R_ij y_j + b_i
    std::vector<Polynomial> lin;
    for (int i = 0; i < n; ++i) {
      Polynomial l = Polynomial::constant(n, shift[i]);
      for (int j = 0; j < n; ++j) {
        l += Polynomial::coordinate(n, j) * (lambda * rotation[static_cast<std::size_t>(i * n + j)]);
      }
      lin.push_back(std::move(l));
    }
    Polynomial out(n);
    for (const auto& t : poly_.terms()) {
      Polynomial m = Polynomial::constant(n, t.coef);
      for (int i = 0; i < n; ++i) m = m * lin[static_cast<std::size_t>(i)].pow(t.exponents[i]);
      out += m;
    }
    return from_polynomial(out, scale_);
  }
  std::vector<Charge> moved;
  for (const auto& c : charges_) {
    // y = R^T (p - b) / lambda
    const Point d = c.location - shift;
    Point y(n);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += rotation[static_cast<std::size_t>(j * n + i)] * d[j];
      y[i] = s / lambda;
    }
    const double q = n == 2 ? c.charge : c.charge * std::pow(lambda, 2.0 - n);
    moved.push_back({y, q});
  }
  return point_charges(n, std::move(moved), scale_);
}

}  // namespace uclab::harmonic
