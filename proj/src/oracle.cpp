#include "rieszflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rieszflow/dynamics.hpp"

namespace rieszflow {
namespace {

struct Points {
  std::vector<std::vector<double>> x, t;
};

Points sample(const Curve& curve, std::span<const double> z) {
  Points p;
  for (double zi : z) {
    CurveFrame f = curve.frame(zi);
    p.x.push_back(std::move(f.x));
    p.t.push_back(std::move(f.d1));
  }
  return p;
}

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double r2 = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) r2 += (a[c] - b[c]) * (a[c] - b[c]);
  return std::sqrt(r2);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double direct_energy(const Curve& curve, const RieszParams& params, std::span<const double> z) {
  const Points p = sample(curve, z);
  const std::size_t n = z.size();
  long double acc = 0.0L;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) acc += std::pow(dist(p.x[i], p.x[j]), -params.s) / params.s;
  return static_cast<double>(acc * std::pow(static_cast<long double>(n), -params.s - 1.0L));
}

std::vector<double> direct_gradient(const Curve& curve, const RieszParams& params, std::span<const double> z) {
  const Points p = sample(curve, z);
  const std::size_t n = z.size();
  const double scale = std::pow(static_cast<double>(n), -params.s - 1.0);
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    long double acc = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double dot = 0.0;
      for (std::size_t c = 0; c < p.x[i].size(); ++c) dot += (p.x[i][c] - p.x[j][c]) * p.t[i][c];
      acc -= std::pow(dist(p.x[i], p.x[j]), -params.s - 2.0) * dot;
    }
    g[i] = scale * static_cast<double>(acc);
  }
  return g;
}

OracleResult minimize_energy_direct(const Curve& curve, const RieszParams& params, const Configuration& z0,
                                    double tol, int starts, std::uint64_t seed, int max_iterations) {
  params.validate();
  const int n = z0.size();
  if (n > kOracleMaxN) throw std::invalid_argument("oracle is limited to N <= " + std::to_string(kOracleMaxN));
  if (n != params.N) throw std::invalid_argument("initial configuration size differs from N");

  std::mt19937_64 rng(seed);
  OracleResult best;
  bool have_best = false;
  for (int start = 0; start < std::max(1, starts); ++start) {
    std::vector<double> z;
    if (start == 0) {
      z.assign(z0.values().begin(), z0.values().end());
    } else {
      const double offset = unit_uniform(rng());
      const Configuration j = jittered_configuration(n, rng(), 0.9);
      for (double v : j.values()) z.push_back(v + offset);
    }

    double e = direct_energy(curve, params, z);
    std::vector<double> g = direct_gradient(curve, params, z);
    double alpha = 1e-3;
    int iter = 0;
    std::vector<double> trial(z.size());
    std::vector<double> z_prev, g_prev;
    while (max_abs(g) >= tol && iter < max_iterations) {
      double g2 = 0.0;
      for (double gi : g) g2 += gi * gi;
      // Barzilai-Borwein trial length, then plain Armijo backtracking.
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < z_prev.size(); ++i) {
        const double dz = z[i] - z_prev[i];
        ss += dz * dz;
        sy += dz * (g[i] - g_prev[i]);
      }
      alpha = sy > 0.0 ? ss / sy : 2.0 * alpha;
      z_prev = z;
      g_prev = g;
      bool moved = false;
      for (int bt = 0; bt < 80; ++bt, alpha *= 0.5) {
        for (std::size_t i = 0; i < z.size(); ++i) trial[i] = z[i] - alpha * g[i];
        if (!Configuration::check(trial).empty()) continue;
        const double et = direct_energy(curve, params, trial);
        if (et <= e - 1e-4 * alpha * g2) {
          moved = true;
        } else if (alpha * g2 < 1e-12 * std::abs(e)) {
          // Below the energy resolution: accept while still descending.
          const std::vector<double> gt = direct_gradient(curve, params, trial);
          double slope = 0.0;
          for (std::size_t i = 0; i < g.size(); ++i) slope += gt[i] * g[i];
          moved = slope >= 0.0;
        }
        if (moved) {
          z.swap(trial);
          e = et;
          break;
        }
      }
      if (!moved) break;
      g = direct_gradient(curve, params, z);
      ++iter;
    }

    const double gn = max_abs(g);
    if (!have_best || e < best.energy) {
      std::vector<double> sorted = z;
      const double shift = std::floor(sorted.front());
      for (double& v : sorted) v -= shift;
      best.Z = Configuration(std::move(sorted));
      best.energy = e;
      best.iterations = iter;
      best.gradient_norm = gn;
      best.converged = gn < tol;
      best.best_start = start;
      have_best = true;
    }
  }
  best.starts = std::max(1, starts);
  return best;
}

std::vector<double> finite_diff_gradient(const Curve& curve, const RieszParams& params, const Configuration& z,
                                         double step, std::vector<std::string>* notes) {
  if (!(step >= 1e-9 && step <= 1e-4)) throw std::invalid_argument("finite-difference step must lie in [1e-9, 1e-4]");
  const int n = z.size();
  std::vector<double> g(static_cast<std::size_t>(n));
  std::vector<double> work(z.values().begin(), z.values().end());
  for (int i = 0; i < n; ++i) {
    double h = step * std::max(1.0, std::abs(z[i]));
    // Central-difference truncation grows like (h / gap)^2.
    const double room = 1e-3 * std::min(z.gap(i), z.gap((i + n - 1) % n));
    if (h > room) {
      h = room;
      if (notes) notes->push_back("step shrunk to " + std::to_string(h) + " at index " + std::to_string(i));
    }
    work[i] = z[i] + h;
    const double ep = direct_energy(curve, params, work);
    work[i] = z[i] - h;
    const double em = direct_energy(curve, params, work);
    work[i] = z[i];
    g[i] = (ep - em) / (2.0 * h);
  }
  return g;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
  const double ref = max_abs(b);
  return ref > 0.0 ? diff / ref : diff;
}

CutProfile exhaustive_cut_check(std::span<const double> points, double s) {
  std::vector<double> x(points.begin(), points.end());
  std::sort(x.begin(), x.end());
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    if (!(x[i] < x[i + 1])) throw std::invalid_argument("exhaustive_cut_check: repeated point");
  const int n = static_cast<int>(x.size()) - 1;
  if (n < 1) throw std::invalid_argument("exhaustive_cut_check: need at least two points");
  CutProfile out;
  out.P.assign(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    long double acc = 0.0L;
    for (int i = 0; i <= k; ++i)
      for (int j = k + 1; j <= n; ++j) acc += std::pow(static_cast<long double>(x[j] - x[i]), -s - 1.0L);
    out.P[k] = static_cast<double>(acc);
  }
  out.points = std::move(x);
  out.argmin = static_cast<int>(std::min_element(out.P.begin(), out.P.end()) - out.P.begin());
  out.argmax = static_cast<int>(std::max_element(out.P.begin(), out.P.end()) - out.P.begin());
  return out;
}

double aligned_max_deviation(const Configuration& a, const Configuration& b) {
  if (a.size() != b.size()) throw std::invalid_argument("aligned_max_deviation: size mismatch");
  const int n = a.size();
  double best = INFINITY;
  std::vector<double> d(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += (d[i] = a[i] - b.at(i + k));
    mean /= n;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(d[i] - mean));
    best = std::min(best, worst);
  }
  return best;
}

}  // namespace rieszflow
