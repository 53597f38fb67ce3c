#pragma once

// Truncated Taylor series arithmetic.
//
// A Jet holds the normalized Taylor coefficients c_k = f^(k)(t0) / k! of a
// function of one variable, truncated after order kJetOrder. Arithmetic on
// jets propagates all derivatives exactly (up to rounding), which is how the
// curve module obtains x'(z) ... x''''(z) without finite differences.

#include <array>
#include <cmath>
#include <cstddef>

namespace rieszflow {

inline constexpr int kJetOrder = 4;

struct Jet {
  std::array<double, kJetOrder + 1> c{};

  constexpr Jet() = default;
  constexpr explicit Jet(double value) { c[0] = value; }

  /// Identity jet t0 + (t - t0): the independent variable at t0.
  static constexpr Jet variable(double t0) {
    Jet j(t0);
    j.c[1] = 1.0;
    return j;
  }

  constexpr double value() const { return c[0]; }

  /// k-th derivative at the expansion point.
  constexpr double derivative(int k) const {
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    return c[static_cast<std::size_t>(k)] * fact;
  }

  Jet& operator+=(const Jet& o) {
    for (int k = 0; k <= kJetOrder; ++k) c[k] += o.c[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int k = 0; k <= kJetOrder; ++k) c[k] -= o.c[k];
    return *this;
  }
  Jet& operator*=(double a) {
    for (auto& v : c) v *= a;
    return *this;
  }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator-(Jet a) { return a *= -1.0; }
inline Jet operator*(Jet a, double b) { return a *= b; }
inline Jet operator*(double a, Jet b) { return b *= a; }
inline Jet operator+(Jet a, double b) {
  a.c[0] += b;
  return a;
}
inline Jet operator+(double a, Jet b) { return b + a; }
inline Jet operator-(Jet a, double b) {
  a.c[0] -= b;
  return a;
}
inline Jet operator-(double a, const Jet& b) { return -b + a; }

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k <= kJetOrder; ++k) {
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) acc += a.c[j] * b.c[k - j];
    r.c[k] = acc;
  }
  return r;
}

inline Jet operator/(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k <= kJetOrder; ++k) {
    double acc = a.c[k];
    for (int j = 1; j <= k; ++j) acc -= b.c[j] * r.c[k - j];
    r.c[k] = acc / b.c[0];
  }
  return r;
}

inline Jet operator/(double a, const Jet& b) { return Jet(a) / b; }

inline Jet sqrt(const Jet& a) {
  Jet r;
  r.c[0] = std::sqrt(a.c[0]);
  for (int k = 1; k <= kJetOrder; ++k) {
    double acc = a.c[k];
    for (int j = 1; j < k; ++j) acc -= r.c[j] * r.c[k - j];
    r.c[k] = acc / (2.0 * r.c[0]);
  }
  return r;
}

/// Simultaneous sine and cosine by the standard coupled recurrence.
inline void sincos(const Jet& a, Jet& s, Jet& co) {
  s = Jet(std::sin(a.c[0]));
  co = Jet(std::cos(a.c[0]));
  for (int k = 1; k <= kJetOrder; ++k) {
    double ss = 0.0;
    double cc = 0.0;
    for (int j = 1; j <= k; ++j) {
      ss += j * a.c[j] * co.c[k - j];
      cc -= j * a.c[j] * s.c[k - j];
    }
    s.c[k] = ss / k;
    co.c[k] = cc / k;
  }
}

inline Jet sin(const Jet& a) {
  Jet s, c;
  sincos(a, s, c);
  return s;
}

inline Jet cos(const Jet& a) {
  Jet s, c;
  sincos(a, s, c);
  return c;
}

/// Composition f(g(t)) where f is given by its Taylor coefficients at g(t0).
inline Jet compose(const std::array<double, kJetOrder + 1>& outer, const Jet& inner) {
  Jet shift = inner;
  shift.c[0] = 0.0;
  Jet result(outer[kJetOrder]);
  // Horner in the shifted inner series.
  for (int m = kJetOrder - 1; m >= 0; --m) result = result * shift + outer[m];
  return result;
}

/// Antiderivative with zero constant term; the top coefficient is dropped.
inline Jet integrate(const Jet& a, double constant) {
  Jet r(constant);
  for (int k = 1; k <= kJetOrder; ++k) r.c[k] = a.c[k - 1] / k;
  return r;
}

}  // namespace rieszflow
