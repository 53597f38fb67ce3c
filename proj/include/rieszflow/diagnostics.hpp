#pragma once

// Distribution and repulsion statistics of a configuration: closest pair,
// cut repulsions P_k, weak-cut search, equalized cuts, gap deviation,
// window discrepancy and the Lyapunov functional F = E + rho_M^s.

#include <span>
#include <string>
#include <vector>

#include "rieszflow/curve.hpp"
#include "rieszflow/riesz.hpp"

namespace rieszflow {

struct ClosestPair {
  double delta = 0.0;
  double rho_M = 0.0;
  int i_M = 0;  // 0-based index of the smallest gap z_{i+1} - z_i; ties go low
};

ClosestPair closest_pair(const Configuration& z);

/// P_k = sum_{i <= k < j} (x_j - x_i)^{-s-1} for points x_0 < ... < x_N.
struct CutProfile {
  std::vector<double> points;
  std::vector<double> P;  // P[k], k = 0..N-1
  int argmin = 0;
  int argmax = 0;
};

/// O(N^2). Throws std::invalid_argument unless the points strictly increase.
CutProfile cut_profile(std::span<const double> points, double s);

struct WeakCut {
  int index = -1;         // i_S, or -1 when no cut meets the window
  double P = 0.0;
  double ratio = 0.0;     // P / (zeta(s) N^{s+1})
  double epsilon1 = 0.0;  // epsilon / (3 (1 + s))
  bool bound_holds = false;
  std::vector<std::string> warnings;
};

/// Smallest P_k among cuts (x_k, x_{k+1}) meeting (eps1, 1 - eps1). Points
/// must run from x_0 = 0 to x_N = 1.
WeakCut weak_cut(std::span<const double> points, double s, double epsilon);

struct EqualizedCuts {
  std::vector<double> points;  // full point set with the optimized interior
  std::vector<double> P;       // cut profile of points
  int iterations = 0;
  double spread = 0.0;         // max_{i_L <= k < i_R} |P_k - mean| / mean
  double min_P = 0.0;          // F_m = min_{i_L <= k < i_R} P_k
  double identity_rhs = 0.0;   // weighted pair sum that equals F_m at X*
};

/// Minimizes the convex cut energy sum_{i<j} (x_j - x_i)^{-s} over the free
/// points i_L < i < i_R by damped Newton. Throws std::runtime_error when the
/// spread does not reach tol within max_iterations.
EqualizedCuts equalize_cuts(std::span<const double> points, int i_L, int i_R, double s,
                            double tol = 1e-10, int max_iterations = 200);

/// (1 / (x_{i_R} - x_{i_L})) sum over pairs i < i_R, j > i_L of
/// (x_{min(j,i_R)} - x_{max(i,i_L)}) (x_j - x_i)^{-s-1}.
double cut_identity_rhs(std::span<const double> points, int i_L, int i_R, double s);

/// #{i : [z_i, z_{i+1}) inside [a, a + L)} / N - L, with the periodic extension.
double discrepancy(const Configuration& z, double a, double L);

/// (1/N) sum |d_i - 1/N|.
double gap_mad(const Configuration& z);

/// Regime factor of the closest-pair estimate: 1, log N or N^{2-s}.
double n_star(double s, int N);

/// Right-hand sides of the gap-deviation and discrepancy bounds at level eps.
double mad_bound(double s, int N, double epsilon);
double discrepancy_bound(double s, double L, double epsilon);

struct Window {
  double a = 0.0;
  double L = 0.5;
};

struct WindowReport {
  double a = 0.0;
  double L = 0.0;
  double value = 0.0;
  double bound = 0.0;       // at the supplied epsilon
  double bound_flat = 0.0;  // at epsilon_flat
  bool within = false;
  bool within_flat = false;
};

struct DistributionReport {
  int N = 0;
  double s = 0.0;
  double delta = 0.0;
  double rho_M = 0.0;
  int i_M = 0;
  double max_gap = 0.0;
  double mad = 0.0;
  double E = 0.0;
  double E_flat = 0.0;
  double zeta_tilde = 0.0;
  double zeta_sN = 0.0;
  double lyapunov = 0.0;      // E + rho_M^s
  double N_star = 0.0;
  double epsilon = 0.0;       // supplied level
  double epsilon_E = 0.0;     // E / zeta_tilde - 1
  double epsilon_flat = 0.0;  // s E_flat / zeta(s;N) - 1, never negative
  double mad_bound = 0.0;
  double mad_bound_flat = 0.0;
  bool mad_within = false;
  bool mad_within_flat = false;
  std::vector<WindowReport> windows;
};

/// Throws std::invalid_argument for a window with L outside (0, 1).
DistributionReport distribution_report(const Curve& curve, const RieszParams& params,
                                       const Configuration& z, double epsilon,
                                       std::span<const Window> windows);

/// E + rho_M^s.
double lyapunov(double E, double rho_M, double s);

}  // namespace rieszflow
