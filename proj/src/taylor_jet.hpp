#pragma once

#include <cmath>

namespace fdopt::detail {

// Second-order Taylor jet of t -> u(x + t p) at t = 0: value, first and
// second derivative along p. Used only to derive reference gradients and
// Hessian quadratic forms for the built-in catalog.
struct Jet {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;

  constexpr Jet() = default;
  constexpr Jet(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  constexpr Jet(double value, double first, double second) : v(value), d1(first), d2(second) {}
};

// Chain rule for a scalar function with derivatives g1, g2 at u.v.
inline Jet chain(const Jet& u, double g0, double g1, double g2) {
  return {g0, g1 * u.d1, g2 * u.d1 * u.d1 + g1 * u.d2};
}

inline Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
inline Jet operator-(const Jet& a, const Jet& b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
inline Jet operator-(const Jet& a) { return {-a.v, -a.d1, -a.d2}; }
inline Jet operator*(const Jet& a, const Jet& b) {
  return {a.v * b.v, a.v * b.d1 + a.d1 * b.v, a.v * b.d2 + 2.0 * a.d1 * b.d1 + a.d2 * b.v};
}
inline Jet inverse(const Jet& u) {
  const double r = 1.0 / u.v;
  return chain(u, r, -r * r, 2.0 * r * r * r);
}
inline Jet operator/(const Jet& a, const Jet& b) { return a * inverse(b); }

inline Jet operator+(const Jet& a, double b) { return {a.v + b, a.d1, a.d2}; }
inline Jet operator+(double a, const Jet& b) { return b + a; }
inline Jet operator-(const Jet& a, double b) { return {a.v - b, a.d1, a.d2}; }
inline Jet operator-(double a, const Jet& b) { return {a - b.v, -b.d1, -b.d2}; }
inline Jet operator*(const Jet& a, double b) { return {a.v * b, a.d1 * b, a.d2 * b}; }
inline Jet operator*(double a, const Jet& b) { return b * a; }
inline Jet operator/(const Jet& a, double b) { return a * (1.0 / b); }
inline Jet operator/(double a, const Jet& b) { return a * inverse(b); }

inline Jet& operator+=(Jet& a, const Jet& b) { return a = a + b; }
inline Jet& operator-=(Jet& a, const Jet& b) { return a = a - b; }
inline Jet& operator*=(Jet& a, const Jet& b) { return a = a * b; }

inline Jet exp(const Jet& u) {
  const double e = std::exp(u.v);
  return chain(u, e, e, e);
}
inline Jet log(const Jet& u) { return chain(u, std::log(u.v), 1.0 / u.v, -1.0 / (u.v * u.v)); }
inline Jet sin(const Jet& u) {
  const double s = std::sin(u.v), c = std::cos(u.v);
  return chain(u, s, c, -s);
}
inline Jet cos(const Jet& u) {
  const double s = std::sin(u.v), c = std::cos(u.v);
  return chain(u, c, -s, -c);
}
inline Jet sqrt(const Jet& u) {
  const double s = std::sqrt(u.v);
  return chain(u, s, 0.5 / s, -0.25 / (s * u.v));
}
inline Jet atan(const Jet& u) {
  const double q = 1.0 / (1.0 + u.v * u.v);
  return chain(u, std::atan(u.v), q, -2.0 * u.v * q * q);
}

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }

}  // namespace fdopt::detail
