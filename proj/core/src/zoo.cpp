#include "uclab/zoo.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "uclab/error.hpp"

namespace uclab::zoo {

namespace {

/// Laplacian in the first n-1 variables.
Polynomial tangential_laplacian(const Polynomial& p) {
  Polynomial out(p.dim());
  for (int i = 0; i + 1 < p.dim(); ++i) out += p.derivative(i).derivative(i);
  return out;
}

void for_each_exponent(int vars, int degree, const std::function<void(const Exponents&)>& fn) {
  Exponents e{};
  std::function<void(int, int)> rec = [&](int axis, int left) {
    if (axis == vars - 1) {
      e[axis] = static_cast<std::uint8_t>(left);
      fn(e);
      return;
    }
    for (int k = left; k >= 0; --k) {
      e[axis] = static_cast<std::uint8_t>(k);
      rec(axis + 1, left - k);
    }
  };
  if (vars == 0) {
    if (degree == 0) fn(e);
    return;
  }
  rec(0, degree);
}

Polynomial primitive_part(const Polynomial& p) {
  std::int64_t g = 0;
  for (const auto& t : p.terms()) {
    const double r = std::round(t.coef);
    if (r != t.coef || std::abs(r) > 9e15) return p;
    g = std::gcd(g, static_cast<std::int64_t>(std::abs(r)));
  }
  if (g <= 1) return p;
  Polynomial out(p.dim());
  for (const auto& t : p.terms()) out.add_term(t.exponents, t.coef / static_cast<double>(g));
  return out;
}

}  // namespace

Polynomial harmonic_extension(const Polynomial& f0, const Polynomial& f1) {
  const int n = f0.dim();
  if (f1.dim() != n) throw InvalidArgument("extension data dimension mismatch");
  for (const auto* f : {&f0, &f1}) {
    for (const auto& t : f->terms()) {
      if (t.exponents[n - 1] != 0) throw InvalidArgument("extension data must not involve x_n");
    }
  }
  const int deg = std::max(f0.degree(), f1.degree() + 1);
  // multiply by deg! so every coefficient stays integral for integer data
  double big = 1.0;
  for (int i = 2; i <= deg; ++i) big *= i;
  const Polynomial z = Polynomial::coordinate(n, n - 1);
  Polynomial out(n);
  Polynomial a = f0;
  Polynomial b = f1;
  double fact_even = 1.0;  // (2k)!
  for (int k = 0; !a.is_zero() || !b.is_zero(); ++k) {
    if (k > 0) fact_even *= (2.0 * k - 1.0) * (2.0 * k);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    out += a * z.pow(2 * k) * (sign * big / fact_even);
    out += b * z.pow(2 * k + 1) * (sign * big / (fact_even * (2.0 * k + 1.0)));
    a = tangential_laplacian(a);
    b = tangential_laplacian(b);
  }
  return primitive_part(out);
}

std::vector<Polynomial> homogeneous_basis(int dim, int degree) {
  if (dim < 2 || dim > kMaxDim) throw InvalidArgument("dimension must be in [2, 8]");
  if (degree < 0) throw InvalidArgument("degree must be >= 0");
  std::vector<Polynomial> out;
  const Polynomial zero(dim);
  for_each_exponent(dim - 1, degree, [&](const Exponents& e) {
    out.push_back(harmonic_extension(Polynomial::monomial(dim, e), zero));
  });
  if (degree >= 1) {
    for_each_exponent(dim - 1, degree - 1, [&](const Exponents& e) {
      out.push_back(harmonic_extension(zero, Polynomial::monomial(dim, e)));
    });
  }
  return out;
}

std::vector<Entry> homogeneous_family(int dim, int max_degree) {
  std::vector<Entry> out;
  for (int d = 1; d <= max_degree; ++d) {
    const auto basis = homogeneous_basis(dim, d);
    for (std::size_t k = 0; k < basis.size(); ++k) {
      out.push_back({"h" + std::to_string(dim) + "d" + std::to_string(d) + "_" + std::to_string(k),
                     HarmonicFunction::from_polynomial(basis[k])});
    }
  }
  return out;
}

// xoshiro256** seeded through splitmix64
Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : state_) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    s = z ^ (z >> 31);
  }
}

std::uint64_t Rng::next() {
  auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

std::int64_t Rng::integer(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw InvalidArgument("empty integer range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(next() % span);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

HarmonicFunction random_harmonic_polynomial(int dim, int min_degree, int max_degree, Rng& rng,
                                            int coef_range) {
  if (min_degree < 1 || max_degree < min_degree) throw InvalidArgument("bad degree range");
  Polynomial p(dim);
  while (p.is_zero() || p.degree() < 1) {
    for (int d = min_degree; d <= max_degree; ++d) {
      for (const auto& b : homogeneous_basis(dim, d)) {
        p += b * static_cast<double>(rng.integer(-coef_range, coef_range));
      }
    }
  }
  return HarmonicFunction::from_polynomial(p);
}

HarmonicFunction random_point_charges(int dim, int count, Rng& rng, double min_distance) {
  if (count < 1) throw InvalidArgument("need at least one charge");
  std::vector<HarmonicFunction::Charge> charges;
  const Point lo = Point::filled(dim, -0.5);
  const Point hi = Point::filled(dim, 0.5);
  const double reach = 0.5 + min_distance + 2.0;
  while (static_cast<int>(charges.size()) < count) {
    Point p(dim);
    for (int i = 0; i < dim; ++i) p[i] = rng.uniform(-reach, reach);
    const auto probe = HarmonicFunction::point_charges(dim, {{p, 1.0}});
    if (probe.charge_distance(lo, hi) < min_distance) continue;
    double q = 0.0;
    while (std::abs(q) < 0.1) q = rng.uniform(-1.0, 1.0);
    charges.push_back({p, q});
  }
  return HarmonicFunction::point_charges(dim, std::move(charges));
}

std::vector<Entry> randomized_zoo(int dim, int count, std::uint64_t seed, int max_degree) {
  Rng rng(seed);
  std::vector<Entry> out;
  for (int i = 0; i < count; ++i) {
    const std::string tag = "z" + std::to_string(dim) + "_" + std::to_string(i);
    if (i % 5 == 4) {
      out.push_back({tag + "_charges", random_point_charges(dim, 1 + i % 3, rng)});
    } else {
      const int hi = 1 + static_cast<int>(rng.integer(1, max_degree - 1));
      const int lo = static_cast<int>(rng.integer(1, hi));
      out.push_back({tag + "_poly", random_harmonic_polynomial(dim, lo, hi, rng, 3)});
    }
  }
  return out;
}

HarmonicFunction normalize_on(const HarmonicFunction& u, const harmonic::Ball& ball,
                              double tolerance) {
  harmonic::SupOptions opt;
  opt.tolerance = tolerance;
  const auto s = harmonic::sup_grad(u, ball, opt);
  if (!(s.value > 0.0)) throw VanishingGradient("cannot normalise a function with zero gradient");
  return u.with_scale(u.scale() / s.value);
}

}  // namespace uclab::zoo
