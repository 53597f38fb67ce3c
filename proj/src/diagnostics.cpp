#include "rieszflow/diagnostics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rieszflow {
namespace {

// Absolute rounding of a gap z_{i+1} - z_i with |z| < 2.
constexpr double kGapRounding = 4.0 * std::numeric_limits<double>::epsilon();

void require_increasing(std::span<const double> x, const char* what) {
  if (x.size() < 2) throw std::invalid_argument(std::string(what) + ": need at least two points");
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (!(x[i] < x[i + 1]) || !std::isfinite(x[i + 1]))
      throw std::invalid_argument(std::string(what) + ": points must strictly increase (index " +
                                  std::to_string(i + 1) + ")");
  }
}

// Sum over pairs that involve at least one free point; the rest is constant.
double free_cut_energy(const std::vector<double>& x, int i_L, int i_R, double s) {
  const int n = static_cast<int>(x.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const bool i_free = i > i_L && i < i_R;
    for (int j = i + 1; j < n; ++j) {
      const bool j_free = j > i_L && j < i_R;
      if (i_free || j_free) acc += std::pow(x[j] - x[i], -s);
    }
  }
  return acc;
}

double spread_of(const std::vector<double>& P, int i_L, int i_R) {
  double mean = 0.0;
  for (int k = i_L; k < i_R; ++k) mean += P[k];
  mean /= (i_R - i_L);
  double worst = 0.0;
  for (int k = i_L; k < i_R; ++k) worst = std::max(worst, std::abs(P[k] - mean));
  return worst / mean;
}

}  // namespace

ClosestPair closest_pair(const Configuration& z) {
  ClosestPair out;
  const int n = z.size();
  out.delta = z.gap(0);
  for (int i = 1; i < n; ++i) out.delta = std::min(out.delta, z.gap(i));
  // Gaps within rounding of the minimum count as ties.
  for (int i = 0; i < n; ++i) {
    if (z.gap(i) <= out.delta + kGapRounding) {
      out.i_M = i;
      break;
    }
  }
  out.rho_M = 1.0 / (n * out.delta);
  return out;
}

CutProfile cut_profile(std::span<const double> points, double s) {
  require_increasing(points, "cut_profile");
  const int n = static_cast<int>(points.size()) - 1;
  CutProfile out;
  out.points.assign(points.begin(), points.end());
  out.P.assign(static_cast<std::size_t>(n), 0.0);
  // Row i contributes its suffix sum over j > k to every cut k >= i, so every
  // P_k is accumulated from positive terms only.
  std::vector<double> suffix(static_cast<std::size_t>(n) + 2);
  for (int i = 0; i < n; ++i) {
    suffix[n + 1] = 0.0;
    for (int j = n; j > i; --j) suffix[j] = suffix[j + 1] + std::pow(points[j] - points[i], -s - 1.0);
    for (int k = i; k < n; ++k) out.P[k] += suffix[k + 1];
  }
  out.argmin = static_cast<int>(std::min_element(out.P.begin(), out.P.end()) - out.P.begin());
  out.argmax = static_cast<int>(std::max_element(out.P.begin(), out.P.end()) - out.P.begin());
  return out;
}

WeakCut weak_cut(std::span<const double> points, double s, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("weak_cut: epsilon must be positive");
  require_increasing(points, "weak_cut");
  if (std::abs(points.front()) > 1e-12 || std::abs(points.back() - 1.0) > 1e-12)
    throw std::invalid_argument("weak_cut: points must run from 0 to 1");
  WeakCut out;
  if (epsilon > 0.01) out.warnings.push_back("epsilon above 0.01 lies outside the range where the bound is proven");
  const int n = static_cast<int>(points.size()) - 1;
  out.epsilon1 = epsilon / (3.0 * (1.0 + s));
  const CutProfile profile = cut_profile(points, s);
  for (int k = 0; k < n; ++k) {
    const bool meets = points[k + 1] > out.epsilon1 && points[k] < 1.0 - out.epsilon1;
    if (meets && (out.index < 0 || profile.P[k] < out.P)) {
      out.index = k;
      out.P = profile.P[k];
    }
  }
  if (out.index < 0) {
    out.warnings.push_back("no cut meets the admissible window");
    return out;
  }
  out.ratio = out.P / (zeta(s).zeta * std::pow(static_cast<double>(n), s + 1.0));
  out.bound_holds = out.ratio <= 1.0 + epsilon;
  return out;
}

double cut_identity_rhs(std::span<const double> x, int i_L, int i_R, double s) {
  const int n = static_cast<int>(x.size()) - 1;
  double acc = 0.0;
  for (int i = 0; i < i_R; ++i) {
    for (int j = std::max(i + 1, i_L + 1); j <= n; ++j) {
      const double span = x[std::min(j, i_R)] - x[std::max(i, i_L)];
      acc += span * std::pow(x[j] - x[i], -s - 1.0);
    }
  }
  return acc / (x[i_R] - x[i_L]);
}

EqualizedCuts equalize_cuts(std::span<const double> points, int i_L, int i_R, double s,
                            double tol, int max_iterations) {
  require_increasing(points, "equalize_cuts");
  const int n = static_cast<int>(points.size()) - 1;
  if (!(0 <= i_L && i_L < i_R && i_R <= n)) throw std::invalid_argument("equalize_cuts: need 0 <= i_L < i_R <= N");
  if (!(s > 0.0)) throw std::invalid_argument("equalize_cuts: s must be positive");

  std::vector<double> x(points.begin(), points.end());
  const int m = i_R - i_L - 1;
  EqualizedCuts out;
  Eigen::MatrixXd H(m, m);
  Eigen::VectorXd g(m);

  for (int iter = 0;; ++iter) {
    const CutProfile profile = cut_profile(x, s);
    out.spread = spread_of(profile.P, i_L, i_R);
    out.iterations = iter;
    if (m == 0 || out.spread < tol) {
      out.P = profile.P;
      break;
    }
    if (iter >= max_iterations)
      throw std::runtime_error("equalize_cuts: no convergence, spread " + std::to_string(out.spread));

    H.setZero();
    for (int a = 0; a < m; ++a) {
      const int k = i_L + 1 + a;
      double grad = 0.0, diag = 0.0;
      for (int i = 0; i <= n; ++i) {
        if (i == k) continue;
        const double r = std::abs(x[k] - x[i]);
        const double r1 = std::pow(r, -s - 1.0);
        grad += (i < k ? -s : s) * r1;
        const double h = s * (s + 1.0) * r1 / r;
        diag += h;
        if (i > i_L && i < i_R) H(a, i - i_L - 1) = -h;
      }
      g(a) = grad;
      H(a, a) = diag;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(H);
    Eigen::VectorXd p = llt.info() == Eigen::Success ? Eigen::VectorXd(llt.solve(-g)) : Eigen::VectorXd(-g);

    // Keep every gap at least 10% of its current length.
    double alpha = 1.0;
    for (int k = i_L; k < i_R; ++k) {
      const double vk = (k > i_L) ? p(k - i_L - 1) : 0.0;
      const double vk1 = (k + 1 < i_R) ? p(k - i_L) : 0.0;
      const double closing = vk - vk1;
      if (closing > 0.0) alpha = std::min(alpha, 0.9 * (x[k + 1] - x[k]) / closing);
    }
    const double e0 = free_cut_energy(x, i_L, i_R, s);
    const double slope = g.dot(p);
    std::vector<double> trial = x;
    // Once the Newton decrement is below the energy's resolution the
    // Armijo test is noise; the clipped full step is taken as is.
    const bool resolved = -slope <= 1e-10 * std::abs(e0);
    for (int bt = 0; bt < 60; ++bt) {
      for (int a = 0; a < m; ++a) trial[i_L + 1 + a] = x[i_L + 1 + a] + alpha * p(a);
      if (resolved || free_cut_energy(trial, i_L, i_R, s) <= e0 + 1e-4 * alpha * slope) break;
      alpha *= 0.5;
    }
    if (trial == x) throw std::runtime_error("equalize_cuts: line search stalled");
    x.swap(trial);
  }

  out.points = x;
  out.min_P = *std::min_element(out.P.begin() + i_L, out.P.begin() + i_R);
  out.identity_rhs = cut_identity_rhs(x, i_L, i_R, s);
  return out;
}

double discrepancy(const Configuration& z, double a, double L) {
  if (!(L > 0.0 && L < 1.0)) throw std::invalid_argument("discrepancy: window length must lie in (0, 1)");
  constexpr double kSlack = 1e-13;
  const int n = z.size();
  int count = 0;
  for (int i = 0; i < n; ++i) {
    const double shift = std::ceil(a - z[i] - kSlack);
    if (z.at(i + 1) + shift <= a + L + kSlack) ++count;
  }
  return static_cast<double>(count) / n - L;
}

double gap_mad(const Configuration& z) {
  const int n = z.size();
  std::vector<double> dev(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(z.gap(i) - 1.0 / n);
    dev[i] = d <= kGapRounding ? 0.0 : d;
  }
  return pairwise_sum(dev) / n;
}

double n_star(double s, int N) {
  if (s > 2.0) return 1.0;
  if (s == 2.0) return std::log(static_cast<double>(N));
  return std::pow(static_cast<double>(N), 2.0 - s);
}

double mad_bound(double s, int N, double epsilon) {
  const double zt = zeta(s).zeta_tilde;
  return 2.0 * std::sqrt(2.0 * zt / (s + 1.0)) * std::sqrt(std::max(epsilon, 0.0)) / N;
}

double discrepancy_bound(double s, double L, double epsilon) {
  const double zt = zeta(s).zeta_tilde;
  return std::sqrt(L * (1.0 - L) * zt) * std::sqrt(2.0 * std::max(epsilon, 0.0));
}

double lyapunov(double E, double rho_M, double s) { return E + std::pow(rho_M, s); }

DistributionReport distribution_report(const Curve& curve, const RieszParams& params,
                                       const Configuration& z, double epsilon,
                                       std::span<const Window> windows) {
  params.validate();
  for (const Window& w : windows)
    if (!(w.L > 0.0 && w.L < 1.0)) throw std::invalid_argument("window length must lie in (0, 1)");

  DistributionReport r;
  r.N = z.size();
  r.s = params.s;
  const ClosestPair cp = closest_pair(z);
  r.delta = cp.delta;
  r.rho_M = cp.rho_M;
  r.i_M = cp.i_M;
  for (int i = 0; i < r.N; ++i) r.max_gap = std::max(r.max_gap, z.gap(i));
  r.mad = gap_mad(z);

  r.E = energy_value(curve, params, z);
  r.E_flat = flat_energy(params, z);
  r.zeta_tilde = zeta(params.s).zeta_tilde;
  r.zeta_sN = zeta_truncated(params.s, r.N);
  r.lyapunov = lyapunov(r.E, r.rho_M, params.s);
  r.N_star = n_star(params.s, r.N);

  r.epsilon = epsilon;
  r.epsilon_E = r.E / r.zeta_tilde - 1.0;
  r.epsilon_flat = r.zeta_sN > 0.0 ? std::max(0.0, params.s * r.E_flat / r.zeta_sN - 1.0) : 0.0;
  r.mad_bound = mad_bound(params.s, r.N, epsilon);
  r.mad_bound_flat = mad_bound(params.s, r.N, r.epsilon_flat);
  r.mad_within = r.mad <= r.mad_bound;
  r.mad_within_flat = r.mad <= r.mad_bound_flat;

  for (const Window& w : windows) {
    WindowReport wr;
    wr.a = w.a;
    wr.L = w.L;
    wr.value = discrepancy(z, w.a, w.L);
    wr.bound = discrepancy_bound(params.s, w.L, epsilon);
    wr.bound_flat = discrepancy_bound(params.s, w.L, r.epsilon_flat);
    wr.within = std::abs(wr.value) <= wr.bound;
    wr.within_flat = std::abs(wr.value) <= wr.bound_flat;
    r.windows.push_back(wr);
  }
  return r;
}

}  // namespace rieszflow
