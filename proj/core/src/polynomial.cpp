#include "uclab/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace uclab {

namespace {

void check_dim(int a, int b) {
  if (a != b) {
    throw InvalidArgument("polynomial dimension mismatch: " + std::to_string(a) + " vs " +
                          std::to_string(b));
  }
}

int total_degree(const Exponents& e, int dim) {
  int d = 0;
  for (int i = 0; i < dim; ++i) d += e[i];
  return d;
}

}  // namespace

Polynomial::Polynomial(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("polynomial dimension out of range");
}

Polynomial Polynomial::constant(int dim, double c) {
  Polynomial p(dim);
  p.add_term(Exponents{}, c);
  return p;
}

Polynomial Polynomial::monomial(int dim, const Exponents& e, double coef) {
  Polynomial p(dim);
  for (int i = dim; i < kMaxDim; ++i) {
    if (e[i] != 0) throw InvalidArgument("monomial exponent beyond polynomial dimension");
  }
  p.add_term(e, coef);
  return p;
}

Polynomial Polynomial::coordinate(int dim, int axis) {
  Exponents e{};
  e[axis] = 1;
  return monomial(dim, e, 1.0);
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e, dim_));
  return d;
}

bool Polynomial::is_homogeneous() const {
  if (terms_.empty()) return true;
  const int d = total_degree(terms_.begin()->first, dim_);
  return std::all_of(terms_.begin(), terms_.end(),
                     [&](const auto& t) { return total_degree(t.first, dim_) == d; });
}

std::vector<Polynomial::Term> Polynomial::terms() const {
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const auto& [e, c] : terms_) out.push_back({e, c});
  return out;
}

double Polynomial::coefficient(const Exponents& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Exponents& e, double coef) {
  if (coef == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(e, coef);
  if (!inserted) {
    it->second += coef;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (dim_ == 0) dim_ = o.dim_;
  check_dim(dim_, o.dim_);
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (dim_ == 0) dim_ = o.dim_;
  check_dim(dim_, o.dim_);
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  check_dim(a.dim_, b.dim_);
  Polynomial out(a.dim_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      Exponents e{};
      for (int i = 0; i < a.dim_; ++i) {
        const int s = ea[i] + eb[i];
        if (s > 255) throw InvalidArgument("polynomial degree overflow");
        e[i] = static_cast<std::uint8_t>(s);
      }
      out.add_term(e, ca * cb);
    }
  }
  return out;
}

bool operator==(const Polynomial& a, const Polynomial& b) {
  return a.dim_ == b.dim_ && a.terms_ == b.terms_;
}

Polynomial Polynomial::derivative(int axis) const {
  if (axis < 0 || axis >= dim_) throw InvalidArgument("derivative axis out of range");
  Polynomial out(dim_);
  for (const auto& [e, c] : terms_) {
    if (e[axis] == 0) continue;
    Exponents d = e;
    --d[axis];
    out.add_term(d, c * e[axis]);
  }
  return out;
}

Polynomial Polynomial::laplacian() const {
  Polynomial out(dim_);
  for (int i = 0; i < dim_; ++i) out += derivative(i).derivative(i);
  return out;
}

Polynomial Polynomial::pow(int k) const {
  if (k < 0) throw InvalidArgument("negative polynomial power");
  Polynomial out = constant(dim_, 1.0);
  for (int i = 0; i < k; ++i) out = out * *this;
  return out;
}

double Polynomial::evaluate(const Point& x) const {
  check_dim(dim_, x.dim());
  return FlatPolynomial(*this).evaluate(x);
}

FlatPolynomial::FlatPolynomial(const Polynomial& p) : dim_(p.dim()) {
  for (const auto& t : p.terms()) {
    coefs_.push_back(t.coef);
    exps_.push_back(t.exponents);
    for (int i = 0; i < dim_; ++i) max_degree_ = std::max<int>(max_degree_, t.exponents[i]);
  }
}

double FlatPolynomial::evaluate(const Point& x) const {
  if (coefs_.empty()) return 0.0;
  // powers[i * (D+1) + k] = x_i^k
  const int stride = max_degree_ + 1;
  std::array<double, kMaxDim * 64> stack_powers;
  std::vector<double> heap_powers;
  double* powers = stack_powers.data();
  if (dim_ * stride > static_cast<int>(stack_powers.size())) {
    heap_powers.resize(static_cast<std::size_t>(dim_ * stride));
    powers = heap_powers.data();
  }
  for (int i = 0; i < dim_; ++i) {
    double* row = powers + i * stride;
    row[0] = 1.0;
    for (int k = 1; k < stride; ++k) row[k] = row[k - 1] * x[i];
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < coefs_.size(); ++t) {
    double m = coefs_[t];
    const Exponents& e = exps_[t];
    for (int i = 0; i < dim_; ++i) m *= powers[i * stride + e[i]];
    sum += m;
  }
  return sum;
}

double FlatPolynomial::abs_bound(const Point& lo, const Point& hi) const {
  Point m(dim_);
  for (int i = 0; i < dim_; ++i) m[i] = std::max(std::abs(lo[i]), std::abs(hi[i]));
  double sum = 0.0;
  for (std::size_t t = 0; t < coefs_.size(); ++t) {
    double b = std::abs(coefs_[t]);
    for (int i = 0; i < dim_; ++i) {
      for (int k = 0; k < exps_[t][i]; ++k) b *= m[i];
    }
    sum += b;
  }
  return sum;
}

}  // namespace uclab
