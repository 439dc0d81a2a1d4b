#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace mpsmesh {

// Fixed-size Euclidean vector. Point2 / Point3 are the domain aliases.
template <int D>
struct Vec {
  static_assert(D == 2 || D == 3);
  std::array<double, D> c{};

  constexpr Vec() = default;
  constexpr Vec(double x, double y) requires(D == 2) : c{x, y} {}
  constexpr Vec(double x, double y, double z) requires(D == 3) : c{x, y, z} {}

  constexpr double& operator[](std::size_t i) { return c[i]; }
  constexpr double operator[](std::size_t i) const { return c[i]; }

  constexpr double x() const { return c[0]; }
  constexpr double y() const { return c[1]; }
  constexpr double z() const requires(D == 3) { return c[2]; }

  constexpr Vec& operator+=(const Vec& o) {
    for (int i = 0; i < D; ++i) c[i] += o.c[i];
    return *this;
  }
  constexpr Vec& operator-=(const Vec& o) {
    for (int i = 0; i < D; ++i) c[i] -= o.c[i];
    return *this;
  }
  constexpr Vec& operator*=(double s) {
    for (int i = 0; i < D; ++i) c[i] *= s;
    return *this;
  }

  friend constexpr Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend constexpr Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend constexpr Vec operator*(Vec a, double s) { return a *= s; }
  friend constexpr Vec operator*(double s, Vec a) { return a *= s; }
  friend constexpr Vec operator-(Vec a) { return a *= -1.0; }
  friend constexpr bool operator==(const Vec&, const Vec&) = default;
};

using Point2 = Vec<2>;
using Point3 = Vec<3>;

template <int D>
constexpr double dot(const Vec<D>& a, const Vec<D>& b) {
  double s = 0.0;
  for (int i = 0; i < D; ++i) s += a[i] * b[i];
  return s;
}

template <int D>
constexpr double norm2(const Vec<D>& a) {
  return dot(a, a);
}

template <int D>
inline double norm(const Vec<D>& a) {
  return std::sqrt(norm2(a));
}

template <int D>
inline double distance(const Vec<D>& a, const Vec<D>& b) {
  return norm(a - b);
}

template <int D>
constexpr double distance2(const Vec<D>& a, const Vec<D>& b) {
  return norm2(a - b);
}

constexpr Point3 cross(const Point3& a, const Point3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

constexpr double cross(const Point2& a, const Point2& b) {
  return a[0] * b[1] - a[1] * b[0];
}

template <int D>
inline bool is_finite(const Vec<D>& a) {
  for (int i = 0; i < D; ++i)
    if (!std::isfinite(a[i])) return false;
  return true;
}

// Axis-aligned box, closed on both ends.
template <int D>
struct Box {
  Vec<D> lo;
  Vec<D> hi;

  double extent(int axis) const { return hi[axis] - lo[axis]; }
  double diagonal() const { return distance(lo, hi); }
  bool contains(const Vec<D>& p, double tol = 0.0) const {
    for (int i = 0; i < D; ++i)
      if (p[i] < lo[i] - tol || p[i] > hi[i] + tol) return false;
    return true;
  }
  void expand(const Vec<D>& p) {
    for (int i = 0; i < D; ++i) {
      lo[i] = std::fmin(lo[i], p[i]);
      hi[i] = std::fmax(hi[i], p[i]);
    }
  }
  static Box empty() {
    Box b;
    for (int i = 0; i < D; ++i) {
      b.lo[i] = INFINITY;
      b.hi[i] = -INFINITY;
    }
    return b;
  }
};

using Box2 = Box<2>;
using Box3 = Box<3>;

}  // namespace mpsmesh
