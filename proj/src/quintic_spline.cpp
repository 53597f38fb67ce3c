#include "quintic_spline.hpp"

#include <cmath>
#include <stdexcept>

namespace rieszflow::detail {
namespace {

constexpr std::array<double, 7> kBinom6 = {1, 6, 15, 20, 15, 6, 1};

// m-th derivative of the cardinal quintic B-spline supported on [0, 6].
// Evaluated from the nearer end so at most three truncated powers enter.
double bspline5(double x, int m) {
  if (x <= 0.0 || x >= 6.0) return 0.0;
  double sign = 1.0;
  if (x > 3.0) {
    x = 6.0 - x;
    if (m % 2 == 1) sign = -1.0;
  }
  double falling = 1.0;  // 5! / (5 - m)!
  for (int i = 0; i < m; ++i) falling *= 5 - i;
  const int p = 5 - m;
  double acc = 0.0;
  for (int k = 0; k <= 3 && k < x; ++k) {
    const double t = x - k;
    double tp = 1.0;
    for (int i = 0; i < p; ++i) tp *= t;
    acc += ((k % 2 == 0) ? 1.0 : -1.0) * kBinom6[k] * tp;
  }
  return sign * falling * acc / 120.0;
}

// y = A c for the circulant interpolation matrix (1, 26, 66, 26, 1) / 120.
void apply(const std::vector<double>& c, std::vector<double>& y) {
  const long n = static_cast<long>(c.size());
  for (long i = 0; i < n; ++i) {
    const auto at = [&](long off) { return c[static_cast<std::size_t>((i + off + n) % n)]; };
    y[static_cast<std::size_t>(i)] =
        (at(-2) + 26.0 * at(-1) + 66.0 * at(0) + 26.0 * at(1) + at(2)) / 120.0;
  }
}

}  // namespace

PeriodicQuinticSpline::PeriodicQuinticSpline(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 8) throw std::invalid_argument("quintic spline needs at least 8 samples");

  // The matrix is symmetric positive definite with condition number 7.5, so
  // conjugate gradients converge in a few dozen iterations.
  std::vector<double> c(values), r(n), p(n), ap(n);
  apply(c, ap);
  double rr = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = values[i] - ap[i];
    p[i] = r[i];
    rr += r[i] * r[i];
    bb += values[i] * values[i];
  }
  const double stop = 1e-32 * std::max(bb, 1e-300);
  for (int it = 0; it < 500 && rr > stop; ++it) {
    apply(p, ap);
    double pap = 0.0;
    for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
    const double alpha = rr / pap;
    double rr_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      c[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      rr_new += r[i] * r[i];
    }
    const double beta = rr_new / rr;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rr = rr_new;
  }
  coeffs_ = std::move(c);
}

std::array<double, 5> PeriodicQuinticSpline::taylor(double u) const {
  const long n = static_cast<long>(coeffs_.size());
  const double t = (u - std::floor(u)) * static_cast<double>(n);
  const long base = static_cast<long>(std::floor(t));
  std::array<double, 5> out{};
  constexpr std::array<double, 5> kFact = {1, 1, 2, 6, 24};
  for (long j = base - 2; j <= base + 3; ++j) {
    const double cj = coeffs_[static_cast<std::size_t>(((j % n) + n) % n)];
    const double x = t - static_cast<double>(j) + 3.0;
    double scale = 1.0;
    for (int m = 0; m <= 4; ++m) {
      out[m] += cj * bspline5(x, m) * scale / kFact[m];
      scale *= static_cast<double>(n);
    }
  }
  return out;
}

}  // namespace rieszflow::detail
