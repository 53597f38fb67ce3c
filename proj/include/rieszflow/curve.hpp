#pragma once

// Closed curves in R^d with a unit-speed, length-one parametrization.
//
// A curve is described by a raw 1-periodic parametrization X(u). build_curve
// measures its length L, tabulates the cumulative arc length, and exposes
// x(z) = X(u(z)) / L where u(z) inverts the normalized arc length. All
// derivatives of x with respect to z up to fourth order are obtained by
// Taylor-jet composition, so |x'(z)| = 1 holds to rounding and the
// orthogonality identities x''.x' = 0, x'''.x' + |x''|^2 = 0 follow.

#include <array>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rieszflow {

class CurveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultR1 = 0.05;
inline constexpr int kDefaultGridSize = 4096;

struct CurveSpec {
  enum class Kind { circle, ellipse, knot, pinched, table };

  Kind kind = Kind::circle;
  // ellipse
  double semi_axis_a = 2.0;
  double semi_axis_b = 1.0;
  // (p, q) torus knot on a torus with the given radii
  int knot_p = 2;
  int knot_q = 3;
  double knot_major = 2.0;
  double knot_minor = 1.0;
  // half-width of the waist of the pinched test curve (raw units, outer radius 1)
  double pinch_width = 0.05;
  // table: samples[k] is the raw point at u = k / samples.size()
  std::vector<std::vector<double>> samples;

  int dimension() const;

  static CurveSpec circle();
  static CurveSpec ellipse(double a, double b);
  static CurveSpec knot(int p = 2, int q = 3, double major = 2.0, double minor = 1.0);
  static CurveSpec pinched(double width = 0.05);
  static CurveSpec table(std::vector<std::vector<double>> samples);
};

const char* to_string(CurveSpec::Kind kind);
CurveSpec::Kind curve_kind_from_string(const std::string& name);

/// Reads a table curve from CSV with columns u, x1, ..., xd (header optional).
/// The u column must be a uniform grid on [0, 1); a closing row at u = 1 that
/// repeats the first point is dropped.
CurveSpec load_table_csv(const std::string& path);

/// Raw 1-periodic parametrization with Taylor coefficients up to order 4.
class RawCurve {
 public:
  virtual ~RawCurve() = default;
  virtual int dimension() const = 0;
  /// out[c][k] = X_c^(k)(u) / k! for each coordinate c.
  virtual void taylor(double u, std::span<std::array<double, 5>> out) const = 0;
};

std::shared_ptr<const RawCurve> make_raw_curve(const CurveSpec& spec);

/// Position and derivatives of the unit-speed curve at one parameter.
struct CurveFrame {
  std::vector<double> x, d1, d2, d3, d4;
};

class Curve {
 public:
  int dimension() const { return dim_; }
  double raw_length() const { return raw_length_; }
  int grid_size() const { return static_cast<int>(cumulative_.size()) - 1; }
  CurveSpec::Kind kind() const { return kind_; }

  /// Self-avoidance radius computed at build time with r1 = kDefaultR1.
  double r0() const { return r0_; }

  /// Raw parameter u in [0, 1) for the arc-length parameter z (any real).
  double raw_parameter(double z) const;

  /// Writes x, x', ..., x^(order) at z into out[k * dim + c]; order <= 4.
  void evaluate(double z, int order, std::span<double> out) const;

  CurveFrame frame(double z) const;
  std::vector<double> position(double z) const;

  /// Curvature correction ((s - 2) / 24) |x''(z)|^2.
  double kappa(double z, double s) const;

  /// Positions and unit tangents for a batch of parameters, row-major N x d.
  void positions_and_tangents(std::span<const double> z, std::span<double> pos,
                              std::span<double> tangent) const;
  void positions(std::span<const double> z, std::span<double> pos) const;

 private:
  friend Curve build_curve(const CurveSpec& spec, int grid_size);

  double normalized_arclength(double u, int cell) const;
  double raw_speed(double u) const;

  std::shared_ptr<const RawCurve> raw_;
  CurveSpec::Kind kind_ = CurveSpec::Kind::circle;
  int dim_ = 0;
  double raw_length_ = 0.0;
  std::vector<double> cumulative_;  // normalized arc length at u_j = j / n
  std::vector<double> node_speed_;  // |X'(u_j)|
  double r0_ = 0.0;
};

/// Builds the unit-speed parametrization. The arc-length grid starts at
/// grid_size cells and is doubled until the Simpson length is converged.
Curve build_curve(const CurveSpec& spec, int grid_size = kDefaultGridSize);

/// Periodic parameter distance min_k |y - z + k|, in [0, 1/2].
double torus_distance(double y, double z);

/// Euclidean distance |x(y) - x(z)|.
double chord(const Curve& curve, double y, double z);

/// Minimum chord over pairs with torus distance >= r1, times 0.9; 0 < r1 <= 1/2. Grid search
/// at 2000 x 2000 followed by a local pattern search.
double compute_r0(const Curve& curve, double r1 = kDefaultR1);

}  // namespace rieszflow
