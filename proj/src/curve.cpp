#include "rieszflow/curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "quintic_spline.hpp"
#include "rieszflow/jet.hpp"

namespace rieszflow {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using JetFunction = std::function<void(const Jet&, std::span<Jet>)>;

class AnalyticCurve final : public RawCurve {
 public:
  AnalyticCurve(int dim, JetFunction fn) : dim_(dim), fn_(std::move(fn)) {}

  int dimension() const override { return dim_; }

  void taylor(double u, std::span<std::array<double, 5>> out) const override {
    std::array<Jet, 8> xs;
    fn_(Jet::variable(u), std::span<Jet>(xs.data(), static_cast<std::size_t>(dim_)));
    for (int c = 0; c < dim_; ++c) out[c] = xs[c].c;
  }

 private:
  int dim_;
  JetFunction fn_;
};

class TableCurve final : public RawCurve {
 public:
  explicit TableCurve(const std::vector<std::vector<double>>& samples) {
    const std::size_t dim = samples.front().size();
    for (std::size_t c = 0; c < dim; ++c) {
      std::vector<double> column(samples.size());
      for (std::size_t k = 0; k < samples.size(); ++k) column[k] = samples[k][c];
      splines_.emplace_back(column);
    }
  }

  int dimension() const override { return static_cast<int>(splines_.size()); }

  void taylor(double u, std::span<std::array<double, 5>> out) const override {
    for (std::size_t c = 0; c < splines_.size(); ++c) out[c] = splines_[c].taylor(u);
  }

 private:
  std::vector<detail::PeriodicQuinticSpline> splines_;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) * (fa + 4.0 * fm + fb) / 6.0;
}

struct LengthTable {
  std::vector<double> node_speed;
  std::vector<double> cell_length;
  double total = 0.0;
};

LengthTable tabulate_length(const RawCurve& raw, int cells) {
  const int dim = raw.dimension();
  std::vector<std::array<double, 5>> buf(static_cast<std::size_t>(dim));
  const auto speed = [&](double u) {
    raw.taylor(u, buf);
    double s2 = 0.0;
    for (const auto& a : buf) s2 += a[1] * a[1];
    return std::sqrt(s2);
  };
  LengthTable t;
  t.node_speed.resize(static_cast<std::size_t>(cells) + 1);
  t.cell_length.resize(static_cast<std::size_t>(cells));
  const double h = 1.0 / cells;
  for (int j = 0; j <= cells; ++j) t.node_speed[j] = speed(j == cells ? 1.0 : j * h);
  for (int j = 0; j < cells; ++j) {
    const double a = j * h;
    const double b = (j + 1 == cells) ? 1.0 : (j + 1) * h;
    t.cell_length[j] = simpson(a, b, t.node_speed[j], speed(0.5 * (a + b)), t.node_speed[j + 1]);
  }
  // Pairwise accumulation keeps the total stable for fine grids.
  std::vector<double> partial(t.cell_length);
  while (partial.size() > 1) {
    std::vector<double> next((partial.size() + 1) / 2);
    for (std::size_t i = 0; i < next.size(); ++i)
      next[i] = partial[2 * i] + (2 * i + 1 < partial.size() ? partial[2 * i + 1] : 0.0);
    partial.swap(next);
  }
  t.total = partial.front();
  return t;
}

}  // namespace

int CurveSpec::dimension() const {
  switch (kind) {
    case Kind::knot:
      return 3;
    case Kind::table:
      return samples.empty() ? 0 : static_cast<int>(samples.front().size());
    default:
      return 2;
  }
}

CurveSpec CurveSpec::circle() { return CurveSpec{}; }

CurveSpec CurveSpec::ellipse(double a, double b) {
  CurveSpec s;
  s.kind = Kind::ellipse;
  s.semi_axis_a = a;
  s.semi_axis_b = b;
  return s;
}

CurveSpec CurveSpec::knot(int p, int q, double major, double minor) {
  CurveSpec s;
  s.kind = Kind::knot;
  s.knot_p = p;
  s.knot_q = q;
  s.knot_major = major;
  s.knot_minor = minor;
  return s;
}

CurveSpec CurveSpec::pinched(double width) {
  CurveSpec s;
  s.kind = Kind::pinched;
  s.pinch_width = width;
  return s;
}

CurveSpec CurveSpec::table(std::vector<std::vector<double>> samples) {
  CurveSpec s;
  s.kind = Kind::table;
  s.samples = std::move(samples);
  return s;
}

const char* to_string(CurveSpec::Kind kind) {
  switch (kind) {
    case CurveSpec::Kind::circle:
      return "circle";
    case CurveSpec::Kind::ellipse:
      return "ellipse";
    case CurveSpec::Kind::knot:
      return "knot";
    case CurveSpec::Kind::pinched:
      return "pinched";
    case CurveSpec::Kind::table:
      return "table";
  }
  return "unknown";
}

CurveSpec::Kind curve_kind_from_string(const std::string& name) {
  for (auto k : {CurveSpec::Kind::circle, CurveSpec::Kind::ellipse, CurveSpec::Kind::knot,
                 CurveSpec::Kind::pinched, CurveSpec::Kind::table}) {
    if (name == to_string(k)) return k;
  }
  throw CurveError("unknown curve kind '" + name + "'");
}

CurveSpec load_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CurveError("cannot open curve table '" + path + "'");
  std::vector<double> us;
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::vector<double> vals;
    std::string tok;
    bool numeric = true;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(tok, &used));
        if (used != tok.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (rows.empty() && us.empty()) continue;  // header
      throw CurveError(path + ":" + std::to_string(line_no) + ": non-numeric value");
    }
    if (vals.size() < 3)
      throw CurveError(path + ":" + std::to_string(line_no) + ": need columns u, x1, x2[, ...]");
    if (!rows.empty() && vals.size() - 1 != rows.front().size())
      throw CurveError(path + ":" + std::to_string(line_no) + ": inconsistent column count");
    us.push_back(vals[0]);
    rows.emplace_back(vals.begin() + 1, vals.end());
  }
  if (rows.size() < 8) throw CurveError("curve table '" + path + "' needs at least 8 samples");

  // Optional closing row at u = 1 must repeat the first sample.
  if (std::abs(us.back() - 1.0) < 1e-12) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t c = 0; c < rows.front().size(); ++c) {
      diff = std::max(diff, std::abs(rows.back()[c] - rows.front()[c]));
      scale = std::max(scale, std::abs(rows.front()[c]));
    }
    if (diff > 1e-9 * std::max(scale, 1.0))
      throw CurveError("curve table '" + path + "' is not periodic: row at u = 1 differs from u = 0");
    us.pop_back();
    rows.pop_back();
  }
  const double n = static_cast<double>(rows.size());
  for (std::size_t k = 0; k < us.size(); ++k) {
    if (std::abs(us[k] - static_cast<double>(k) / n) > 1e-9)
      throw CurveError("curve table '" + path + "' must be sampled on the uniform grid u = k / n");
  }
  return CurveSpec::table(std::move(rows));
}

std::shared_ptr<const RawCurve> make_raw_curve(const CurveSpec& spec) {
  using K = CurveSpec::Kind;
  switch (spec.kind) {
    case K::circle:
      return std::make_shared<AnalyticCurve>(2, [](const Jet& u, std::span<Jet> x) {
        sincos(kTwoPi * u, x[1], x[0]);
      });
    case K::ellipse: {
      const double a = spec.semi_axis_a, b = spec.semi_axis_b;
      if (!(a > 0.0 && b > 0.0)) throw CurveError("ellipse semi-axes must be positive");
      return std::make_shared<AnalyticCurve>(2, [a, b](const Jet& u, std::span<Jet> x) {
        Jet s, c;
        sincos(kTwoPi * u, s, c);
        x[0] = a * c;
        x[1] = b * s;
      });
    }
    case K::knot: {
      const double p = spec.knot_p, q = spec.knot_q;
      const double big = spec.knot_major, small = spec.knot_minor;
      if (!(big > small && small > 0.0)) throw CurveError("knot needs major > minor > 0");
      if (spec.knot_p <= 0 || spec.knot_q <= 0) throw CurveError("knot winding numbers must be positive");
      return std::make_shared<AnalyticCurve>(3, [=](const Jet& u, std::span<Jet> x) {
        Jet sp, cp, sq, cq;
        sincos(kTwoPi * p * u, sp, cp);
        sincos(kTwoPi * q * u, sq, cq);
        const Jet r = big + small * cq;
        x[0] = r * cp;
        x[1] = r * sp;
        x[2] = small * sq;
      });
    }
    case K::pinched: {
      const double w = spec.pinch_width;
      if (!(w > 0.0 && w < 1.0)) throw CurveError("pinch width must lie in (0, 1)");
      return std::make_shared<AnalyticCurve>(2, [w](const Jet& u, std::span<Jet> x) {
        Jet s, c;
        sincos(kTwoPi * u, s, c);
        x[0] = c;
        x[1] = s * (w + (1.0 - w) * (c * c));
      });
    }
    case K::table: {
      if (spec.samples.size() < 8) throw CurveError("table curve needs at least 8 samples");
      const std::size_t dim = spec.samples.front().size();
      if (dim < 2) throw CurveError("table curve needs dimension >= 2");
      if (dim > 8) throw CurveError("table curve dimension above 8 is not supported");
      for (const auto& row : spec.samples)
        if (row.size() != dim) throw CurveError("table curve rows have inconsistent dimension");
      return std::make_shared<TableCurve>(spec.samples);
    }
  }
  throw CurveError("unhandled curve kind");
}

Curve build_curve(const CurveSpec& spec, int grid_size) {
  if (grid_size < 256) throw CurveError("grid_size must be at least 256");
  Curve curve;
  curve.raw_ = make_raw_curve(spec);
  curve.kind_ = spec.kind;
  curve.dim_ = curve.raw_->dimension();
  const RawCurve& raw = *curve.raw_;

  // Periodicity of the raw parametrization.
  {
    std::vector<std::array<double, 5>> a0(static_cast<std::size_t>(curve.dim_)),
        a1(static_cast<std::size_t>(curve.dim_));
    raw.taylor(0.0, a0);
    raw.taylor(1.0 - std::numeric_limits<double>::epsilon() / 2, a1);
    double diff = 0.0, scale = 0.0;
    for (int c = 0; c < curve.dim_; ++c) {
      diff = std::max(diff, std::abs(a0[c][0] - a1[c][0]));
      scale = std::max(scale, std::abs(a0[c][0]) + std::abs(a0[c][1]));
    }
    if (diff > 1e-9 * std::max(scale, 1.0)) throw CurveError("curve spec is not periodic");
  }

  int cells = grid_size;
  LengthTable table = tabulate_length(raw, cells);
  for (;;) {
    const auto max_speed = *std::max_element(table.node_speed.begin(), table.node_speed.end());
    const auto min_speed = *std::min_element(table.node_speed.begin(), table.node_speed.end());
    if (!(min_speed > 1e-10 * max_speed)) throw CurveError("zero raw speed detected");
    if (cells >= (1 << 20)) break;
    LengthTable finer = tabulate_length(raw, 2 * cells);
    const bool converged = std::abs(finer.total - table.total) <= 1e-14 * finer.total;
    cells *= 2;
    table = std::move(finer);
    if (converged) break;
  }

  curve.raw_length_ = table.total;
  curve.node_speed_ = std::move(table.node_speed);
  curve.cumulative_.assign(static_cast<std::size_t>(cells) + 1, 0.0);
  // Neumaier summation; a plain running sum drifts by ~cells * eps.
  double acc = 0.0, comp = 0.0;
  for (int j = 0; j < cells; ++j) {
    const double v = table.cell_length[j];
    const double t = acc + v;
    comp += std::abs(acc) >= std::abs(v) ? (acc - t) + v : (v - t) + acc;
    acc = t;
    curve.cumulative_[j + 1] = (acc + comp) / curve.raw_length_;
  }
  curve.cumulative_.back() = 1.0;

  curve.r0_ = compute_r0(curve, kDefaultR1);
  return curve;
}

double Curve::raw_speed(double u) const {
  std::array<std::array<double, 5>, 8> buf;
  raw_->taylor(u, std::span(buf.data(), static_cast<std::size_t>(dim_)));
  double s2 = 0.0;
  for (int c = 0; c < dim_; ++c) s2 += buf[c][1] * buf[c][1];
  return std::sqrt(s2);
}

double Curve::normalized_arclength(double u, int cell) const {
  const double h = 1.0 / grid_size();
  const double a = cell * h;
  const double fa = node_speed_[cell];
  return cumulative_[cell] +
         simpson(a, u, fa, raw_speed(0.5 * (a + u)), raw_speed(u)) / raw_length_;
}

double Curve::raw_parameter(double z) const {
  double zr = z - std::floor(z);
  if (zr >= 1.0) zr = 0.0;
  const int n = grid_size();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), zr);
  const int j = std::clamp(static_cast<int>(it - cumulative_.begin()) - 1, 0, n - 1);
  const double h = 1.0 / n;
  const double s0 = cumulative_[j], s1 = cumulative_[j + 1];
  const double ds = s1 - s0;
  const double t = (zr - s0) / ds;

  // Monotone cubic Hermite guess for u(S) using du/dS = L / |X'| at the nodes.
  const double secant = h / ds;
  double m0 = raw_length_ / node_speed_[j];
  double m1 = raw_length_ / node_speed_[j + 1];
  const double a = m0 / secant, b = m1 / secant;
  if (a * a + b * b > 9.0) {
    const double tau = 3.0 / std::sqrt(a * a + b * b);
    m0 = tau * a * secant;
    m1 = tau * b * secant;
  }
  const double t2 = t * t, t3 = t2 * t;
  double u = j * h + (-2.0 * t3 + 3.0 * t2) * h + (t3 - 2.0 * t2 + t) * m0 * ds +
             (t3 - t2) * m1 * ds;

  // Newton polish against the exact Simpson arc length inside the cell.
  for (int it_n = 0; it_n < 8; ++it_n) {
    const double f = normalized_arclength(u, j) - zr;
    const double step = f * raw_length_ / raw_speed(u);
    u -= step;
    if (std::abs(step) <= 1e-17) break;
  }
  return std::clamp(u, j * h, (j + 1) * h);
}

void Curve::evaluate(double z, int order, std::span<double> out) const {
  if (order < 0 || order > kJetOrder) throw CurveError("derivative order must be in [0, 4]");
  const double u0 = raw_parameter(z);
  std::array<std::array<double, 5>, 8> a;
  raw_->taylor(u0, std::span(a.data(), static_cast<std::size_t>(dim_)));

  // du/dz = L / |X'(u)|; Picard iteration fixes one Taylor coefficient per pass.
  std::array<std::array<double, 5>, 8> da{};
  for (int c = 0; c < dim_; ++c)
    for (int k = 0; k < kJetOrder; ++k) da[c][k] = (k + 1) * a[c][k + 1];
  Jet u(u0);
  for (int pass = 0; pass < kJetOrder; ++pass) {
    Jet speed2;
    for (int c = 0; c < dim_; ++c) {
      const Jet v = compose(da[c], u);
      speed2 += v * v;
    }
    u = integrate(raw_length_ / sqrt(speed2), u0);
  }
  const double inv_length = 1.0 / raw_length_;
  for (int c = 0; c < dim_; ++c) {
    const Jet x = compose(a[c], u);
    for (int k = 0; k <= order; ++k) out[k * dim_ + c] = x.derivative(k) * inv_length;
  }
}

CurveFrame Curve::frame(double z) const {
  std::vector<double> buf(static_cast<std::size_t>(5 * dim_));
  evaluate(z, 4, buf);
  CurveFrame f;
  auto slice = [&](int k) {
    return std::vector<double>(buf.begin() + k * dim_, buf.begin() + (k + 1) * dim_);
  };
  f.x = slice(0);
  f.d1 = slice(1);
  f.d2 = slice(2);
  f.d3 = slice(3);
  f.d4 = slice(4);
  return f;
}

std::vector<double> Curve::position(double z) const {
  std::vector<double> p(static_cast<std::size_t>(dim_));
  positions(std::span<const double>(&z, 1), p);
  return p;
}

double Curve::kappa(double z, double s) const {
  std::vector<double> buf(static_cast<std::size_t>(3 * dim_));
  evaluate(z, 2, buf);
  double k2 = 0.0;
  for (int c = 0; c < dim_; ++c) k2 += buf[2 * dim_ + c] * buf[2 * dim_ + c];
  return (s - 2.0) / 24.0 * k2;
}

void Curve::positions_and_tangents(std::span<const double> z, std::span<double> pos,
                                   std::span<double> tangent) const {
  std::array<std::array<double, 5>, 8> a;
  const double inv_length = 1.0 / raw_length_;
  for (std::size_t i = 0; i < z.size(); ++i) {
    raw_->taylor(raw_parameter(z[i]), std::span(a.data(), static_cast<std::size_t>(dim_)));
    double s2 = 0.0;
    for (int c = 0; c < dim_; ++c) s2 += a[c][1] * a[c][1];
    const double inv_speed = 1.0 / std::sqrt(s2);
    for (int c = 0; c < dim_; ++c) {
      pos[i * dim_ + c] = a[c][0] * inv_length;
      tangent[i * dim_ + c] = a[c][1] * inv_speed;
    }
  }
}

void Curve::positions(std::span<const double> z, std::span<double> pos) const {
  std::array<std::array<double, 5>, 8> a;
  const double inv_length = 1.0 / raw_length_;
  for (std::size_t i = 0; i < z.size(); ++i) {
    raw_->taylor(raw_parameter(z[i]), std::span(a.data(), static_cast<std::size_t>(dim_)));
    for (int c = 0; c < dim_; ++c) pos[i * dim_ + c] = a[c][0] * inv_length;
  }
}

double torus_distance(double y, double z) {
  double d = std::fmod(std::abs(y - z), 1.0);
  return std::min(d, 1.0 - d);
}

double chord(const Curve& curve, double y, double z) {
  const auto a = curve.position(y);
  const auto b = curve.position(z);
  double d2 = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) d2 += (a[c] - b[c]) * (a[c] - b[c]);
  return std::sqrt(d2);
}

double compute_r0(const Curve& curve, double r1) {
  if (!(r1 > 0.0 && r1 <= 0.5)) throw CurveError("r1 must lie in (0, 1/2]");
  constexpr int m = 2000;
  const int dim = curve.dimension();
  std::vector<double> grid(m), pos(static_cast<std::size_t>(m) * dim);
  for (int a = 0; a < m; ++a) grid[a] = static_cast<double>(a) / m;
  curve.positions(grid, pos);

  const double admissible = r1 - 1e-12;
  double best = std::numeric_limits<double>::infinity();
  int best_a = 0, best_b = 0;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      const int sep = std::min(b - a, m - (b - a));
      if (static_cast<double>(sep) / m < admissible) continue;
      double d2 = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double diff = pos[a * dim + c] - pos[b * dim + c];
        d2 += diff * diff;
      }
      if (d2 < best) {
        best = d2;
        best_a = a;
        best_b = b;
      }
    }
  }

  // Local pattern search around the best grid pair, constraint kept.
  double y = grid[best_a], z = grid[best_b];
  double value = std::sqrt(best);
  double step = 1.0 / m;
  for (int level = 0; level < 40; ++level) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          if (dy == 0 && dz == 0) continue;
          const double ty = y + dy * step, tz = z + dz * step;
          if (torus_distance(ty, tz) < admissible) continue;
          const double v = chord(curve, ty, tz);
          if (v < value) {
            value = v;
            y = ty;
            z = tz;
            improved = true;
          }
        }
      }
    }
    step *= 0.5;
    if (step < 1e-12) break;
  }

  const double r0 = 0.9 * value;
  if (r0 < 1e-6) throw CurveError("self-intersection detected (r0 below 1e-6)");
  return r0;
}

}  // namespace rieszflow
