#pragma once

// Riesz s-energy of points on a unit-speed curve.
//
//   E(Z)    = N^{-s-1} sum_{i<j} W(x(z_i) - x(z_j)),   W(x) = |x|^{-s} / s
//   E^k(Z)  = (s N^{s+1})^{-1} sum_i |x(z_{i+k}) - x(z_i)|^{-s}
//   Ẽ^k(Z)  = (s N^{s+1})^{-1} sum_i (z_{i+k} - z_i)^{-s}
//
// with the periodic extension z_{i+N} = z_i + 1. E and Ẽ recombine from the
// k-neighbour pieces over k <= (N-1)/2, plus half of the k = N/2 term when N
// is even.

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rieszflow/curve.hpp"

namespace rieszflow {

class SingularConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RieszParams {
  double s = 2.0;
  int N = 2;

  /// Throws std::invalid_argument unless s > 1 and N >= 2.
  void validate() const;
};

/// Sorted particle parameters z_0 < ... < z_{N-1} < z_0 + 1 (0-based).
class Configuration {
 public:
  Configuration() = default;
  /// Validates ordering; throws ConfigurationError.
  explicit Configuration(std::vector<double> z);

  /// Sorts the values, then validates.
  static Configuration from_unsorted(std::vector<double> z);

  int size() const { return static_cast<int>(z_.size()); }
  double operator[](int i) const { return z_[static_cast<std::size_t>(i)]; }
  std::span<const double> values() const { return z_; }

  /// Periodic extension: at(i + N) = at(i) + 1 for any integer i.
  double at(long i) const;

  /// d_i = z_{i+1} - z_i, with d_{N-1} = z_0 + 1 - z_{N-1}.
  double gap(int i) const;
  std::vector<double> gaps() const;

  /// Empty string when valid, otherwise the reason.
  static std::string check(std::span<const double> z);

 private:
  std::vector<double> z_;
};

/// r^{-s} / s.
double potential(double r, double s);

struct ZetaValue {
  double zeta = 0.0;        // Riemann zeta(s)
  double zeta_tilde = 0.0;  // zeta(s) / s
  double error_bound = 0.0;
};

/// Partial sum plus Euler-Maclaurin tail; |error| < tolerance.
ZetaValue zeta(double s, double tolerance = 1e-12);

/// sum_{k=1}^{floor((N-1)/2)} k^{-s}.
double zeta_truncated(double s, int N);

struct EnergyBreakdown {
  double E = 0.0;
  std::vector<double> E_k;       // E_k[k-1] = E^k, k = 1..N-1
  double E_flat = 0.0;
  std::vector<double> E_flat_k;  // E_flat_k[k-1] = Ẽ^k, k = 1..N-1
  double zeta_sN = 0.0;
};

struct EnergyOptions {
  /// When positive, pairs with torus distance above cutoff are skipped.
  /// The result is then an approximation of E, not E.
  double cutoff = 0.0;
};

/// Full breakdown, always exact (cutoff is not applied here).
EnergyBreakdown energy(const Curve& curve, const RieszParams& params, const Configuration& z);

double energy_value(const Curve& curve, const RieszParams& params, const Configuration& z,
                    const EnergyOptions& options = {});

/// Ẽ(Z), the flat-torus energy.
double flat_energy(const RieszParams& params, const Configuration& z);
std::vector<double> flat_energy_terms(const RieszParams& params, const Configuration& z);

/// dE/dz_i.
std::vector<double> energy_gradient(const Curve& curve, const RieszParams& params,
                                    const Configuration& z, const EnergyOptions& options = {});

/// Result of one pass over all pairs.
struct PairSums {
  double energy = 0.0;        // E(Z)
  std::vector<double> force;  // sum_{j != i} |r|^{-s-2} r . x'(z_i),  r = x(z_i) - x(z_j)
};

/// Deterministic pair kernel shared by the energy, gradient and flow.
/// The reduction order depends only on N, never on the thread count.
void pair_sums(const Curve& curve, const RieszParams& params, std::span<const double> z,
               PairSums& out, const EnergyOptions& options = {});

/// Tree summation.
double pairwise_sum(std::span<const double> values);

}  // namespace rieszflow
