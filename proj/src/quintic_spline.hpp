#pragma once

// Periodic interpolating quintic spline on a uniform grid (C^4).

#include <array>
#include <vector>

namespace rieszflow::detail {

class PeriodicQuinticSpline {
 public:
  PeriodicQuinticSpline() = default;
  /// values[i] is the sample at u = i / values.size().
  explicit PeriodicQuinticSpline(const std::vector<double>& values);

  /// Taylor coefficients S^(k)(u) / k!, k = 0..4.
  std::array<double, 5> taylor(double u) const;

  std::size_t size() const { return coeffs_.size(); }

 private:
  std::vector<double> coeffs_;
};

}  // namespace rieszflow::detail
