#pragma once

// Brute-force references. Nothing here calls the pair kernel, the flow
// integrator or the O(N^2) cut accumulation, so agreement is meaningful.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rieszflow/curve.hpp"
#include "rieszflow/diagnostics.hpp"
#include "rieszflow/riesz.hpp"

namespace rieszflow {

inline constexpr int kOracleMaxN = 64;

struct OracleResult {
  Configuration Z;
  double energy = 0.0;
  int iterations = 0;          // gradient-descent iterations of the best start
  double gradient_norm = 0.0;  // max-norm of dE/dz at Z
  bool converged = false;
  int starts = 0;
  int best_start = 0;          // 0 is the supplied Z0
};

/// E(Z) by a plain double loop with std::pow.
double direct_energy(const Curve& curve, const RieszParams& params, std::span<const double> z);

/// dE/dz by a plain double loop.
std::vector<double> direct_gradient(const Curve& curve, const RieszParams& params, std::span<const double> z);

/// Multistart gradient descent with Armijo backtracking until the gradient
/// max-norm is below tol. Start 0 is z0; the others are seeded jittered
/// lattices. Throws std::invalid_argument when N exceeds kOracleMaxN.
OracleResult minimize_energy_direct(const Curve& curve, const RieszParams& params, const Configuration& z0,
                                    double tol = 1e-10, int starts = 20, std::uint64_t seed = 0,
                                    int max_iterations = 200000);

/// Central differences of direct_energy with step h max(1, |z_i|), capped at
/// 1e-3 of the nearest gap; each cap appends a line to notes.
std::vector<double> finite_diff_gradient(const Curve& curve, const RieszParams& params, const Configuration& z,
                                         double step, std::vector<std::string>* notes = nullptr);

/// ||a - b||_inf / ||b||_inf.
double relative_error(std::span<const double> a, std::span<const double> b);

/// Sorts the points and recomputes every P_k with a triple loop.
CutProfile exhaustive_cut_check(std::span<const double> points, double s);

/// max_i |a_i - b_{i+k} - c| minimized over cyclic relabelings k, with c the
/// least-squares shift for each k.
double aligned_max_deviation(const Configuration& a, const Configuration& b);

}  // namespace rieszflow
