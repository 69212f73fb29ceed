#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>

#include "uclab/error.hpp"

namespace uclab {

inline constexpr int kMaxDim = 8;

/// Fixed-capacity point / vector in R^n, n <= kMaxDim. Value type, no heap.
class Point {
 public:
  Point() = default;
  explicit Point(int n) : n_(n) {
    if (n < 1 || n > kMaxDim) {
      throw InvalidArgument("dimension " + std::to_string(n) + " outside [1, " +
                            std::to_string(kMaxDim) + "]");
    }
  }
  Point(std::initializer_list<double> xs) : Point(static_cast<int>(xs.size())) {
    std::copy(xs.begin(), xs.end(), v_.begin());
  }
  explicit Point(std::span<const double> xs) : Point(static_cast<int>(xs.size())) {
    std::copy(xs.begin(), xs.end(), v_.begin());
  }

  static Point filled(int n, double value) {
    Point p(n);
    std::fill_n(p.v_.begin(), n, value);
    return p;
  }
  static Point unit(int n, int axis) {
    Point p(n);
    p[axis] = 1.0;
    return p;
  }

  int dim() const { return n_; }
  double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
  const double* begin() const { return v_.data(); }
  const double* end() const { return v_.data() + n_; }
  std::span<const double> span() const { return {v_.data(), static_cast<std::size_t>(n_)}; }

  Point& operator+=(const Point& o) {
    for (int i = 0; i < n_; ++i) v_[i] += o.v_[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (int i = 0; i < n_; ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Point& operator*=(double s) {
    for (int i = 0; i < n_; ++i) v_[i] *= s;
    return *this;
  }
  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.n_ != b.n_) return false;
    for (int i = 0; i < a.n_; ++i)
      if (a.v_[i] != b.v_[i]) return false;
    return true;
  }

  double dot(const Point& o) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += v_[i] * o.v_[i];
    return s;
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }

 private:
  std::array<double, kMaxDim> v_{};
  int n_ = 0;
};

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }

}  // namespace uclab
