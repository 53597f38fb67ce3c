#include "rieszflow/riesz.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "rieszflow/parallel.hpp"

namespace rieszflow {
namespace {

// r2^{-e} with a multiplication/sqrt fast path when 4e is a small integer,
// which covers every half-integer s.
class InversePower {
 public:
  explicit InversePower(double e) : e_(e) {
    const double q = 4.0 * e;
    if (std::abs(q - std::round(q)) < 1e-12 && q > 0.0 && q < 200.0) {
      const int quarters = static_cast<int>(std::lround(q));
      whole_ = quarters / 4;
      half_ = (quarters % 4) >= 2;
      quarter_ = (quarters % 2) == 1;
      fast_ = true;
    }
  }

  double operator()(double r2) const {
    if (!fast_) return std::pow(r2, -e_);
    const double q = 1.0 / r2;
    double result = 1.0;
    for (int k = 0; k < whole_; ++k) result *= q;
    if (half_ || quarter_) {
      const double root = std::sqrt(q);
      if (half_) result *= root;
      if (quarter_) result *= std::sqrt(root);
    }
    return result;
  }

 private:
  double e_;
  int whole_ = 0;
  bool half_ = false;
  bool quarter_ = false;
  bool fast_ = false;
};

void require_ordered(std::span<const double> z) {
  const std::string why = Configuration::check(z);
  if (!why.empty()) throw SingularConfigurationError("singular configuration: " + why);
}

struct BlockLayout {
  int size = 0;
  int count = 0;
};

BlockLayout block_layout(int n) {
  BlockLayout b;
  b.size = std::max(64, (n + 63) / 64);
  b.count = (n + b.size - 1) / b.size;
  return b;
}

template <int D>
void pair_block(int begin, int end, int n, int dim, std::span<const double> z,
                const std::vector<double>& pos, const std::vector<double>& tan,
                const InversePower& power, double cutoff, double* row_energy, double* row_force,
                double* col_force, std::atomic<bool>& degenerate) {
  const int d = D > 0 ? D : dim;
  for (int i = begin; i < end; ++i) {
    const double* xi = &pos[static_cast<std::size_t>(i) * d];
    const double* ti = &tan[static_cast<std::size_t>(i) * d];
    double e_acc = 0.0;
    double f_acc = 0.0;
    for (int j = i + 1; j < n; ++j) {
      if (cutoff > 0.0) {
        const double sep = z[j] - z[i];
        if (std::min(sep, 1.0 - sep) > cutoff) continue;
      }
      const double* xj = &pos[static_cast<std::size_t>(j) * d];
      const double* tj = &tan[static_cast<std::size_t>(j) * d];
      double r2 = 0.0, ri = 0.0, rj = 0.0;
      for (int c = 0; c < d; ++c) {
        const double r = xi[c] - xj[c];
        r2 += r * r;
        ri += r * ti[c];
        rj += r * tj[c];
      }
      if (!(r2 > 0.0)) {
        degenerate.store(true);
        continue;
      }
      const double w = power(r2);
      e_acc += w * r2;
      f_acc += w * ri;
      col_force[j] -= w * rj;
    }
    row_energy[i] = e_acc;
    row_force[i] = f_acc;
  }
}

}  // namespace

void RieszParams::validate() const {
  if (!(s > 1.0)) throw std::invalid_argument("Riesz exponent s must exceed 1");
  if (N < 2) throw std::invalid_argument("particle count N must be at least 2");
}

Configuration::Configuration(std::vector<double> z) : z_(std::move(z)) {
  const std::string why = check(z_);
  if (!why.empty()) throw ConfigurationError("invalid configuration: " + why);
}

Configuration Configuration::from_unsorted(std::vector<double> z) {
  std::sort(z.begin(), z.end());
  return Configuration(std::move(z));
}

std::string Configuration::check(std::span<const double> z) {
  if (z.size() < 2) return "need at least two particles";
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z[i])) return "non-finite value at index " + std::to_string(i);
    if (i + 1 < z.size() && !(z[i] < z[i + 1]))
      return "ordering broken between indices " + std::to_string(i) + " and " + std::to_string(i + 1);
  }
  if (!(z.back() < z.front() + 1.0)) return "last particle not below first + 1";
  return {};
}

double Configuration::at(long i) const {
  const long n = static_cast<long>(z_.size());
  long q = i / n;
  long r = i % n;
  if (r < 0) {
    r += n;
    --q;
  }
  return z_[static_cast<std::size_t>(r)] + static_cast<double>(q);
}

double Configuration::gap(int i) const {
  const int n = size();
  return i + 1 < n ? z_[i + 1] - z_[i] : z_[0] + 1.0 - z_[n - 1];
}

std::vector<double> Configuration::gaps() const {
  std::vector<double> d(z_.size());
  for (int i = 0; i < size(); ++i) d[i] = gap(i);
  return d;
}

double potential(double r, double s) {
  if (!(r > 0.0)) throw std::invalid_argument("potential needs r > 0");
  return std::pow(r, -s) / s;
}

ZetaValue zeta(double s, double tolerance) {
  if (!(s > 1.0)) throw std::invalid_argument("zeta(s) diverges for s <= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("zeta tolerance must be positive");
  // Euler-Maclaurin from M with terms through f'''; the remainder is below
  // the first omitted term |B_6 / 6!| |f^(5)(M)| for f(x) = x^{-s}.
  const double poly5 = s * (s + 1) * (s + 2) * (s + 3) * (s + 4);
  double m = 16.0;
  const auto remainder = [&](double mm) { return poly5 * std::pow(mm, -s - 5.0) / 30240.0; };
  while (remainder(m) > 0.5 * tolerance && m < 1e7) m *= 2.0;
  const long last = static_cast<long>(m) - 1;
  double partial = 0.0;
  for (long i = last; i >= 1; --i) partial += std::pow(static_cast<double>(i), -s);
  const double tail = std::pow(m, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(m, -s) +
                      s * std::pow(m, -s - 1.0) / 12.0 -
                      s * (s + 1) * (s + 2) * std::pow(m, -s - 3.0) / 720.0;
  ZetaValue v;
  v.zeta = partial + tail;
  v.zeta_tilde = v.zeta / s;
  v.error_bound = remainder(m) + static_cast<double>(last) * std::numeric_limits<double>::epsilon() * v.zeta;
  if (v.error_bound >= tolerance) throw std::runtime_error("zeta: requested tolerance not reachable");
  return v;
}

double zeta_truncated(double s, int N) {
  if (N < 2) throw std::invalid_argument("zeta_truncated needs N >= 2");
  double acc = 0.0;
  for (int k = (N - 1) / 2; k >= 1; --k) acc += std::pow(static_cast<double>(k), -s);
  return acc;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 32;
  if (values.size() <= kLeaf) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void pair_sums(const Curve& curve, const RieszParams& params, std::span<const double> z,
               PairSums& out, const EnergyOptions& options) {
  require_ordered(z);
  const int n = static_cast<int>(z.size());
  const int dim = curve.dimension();
  const BlockLayout blocks = block_layout(n);

  std::vector<double> pos(static_cast<std::size_t>(n) * dim), tan(pos.size());
  parallel_for(blocks.count, [&](int b) {
    const int begin = b * blocks.size;
    const int end = std::min(n, begin + blocks.size);
    const auto count = static_cast<std::size_t>(end - begin);
    curve.positions_and_tangents(
        z.subspan(static_cast<std::size_t>(begin), count),
        std::span(pos).subspan(static_cast<std::size_t>(begin) * dim, count * dim),
        std::span(tan).subspan(static_cast<std::size_t>(begin) * dim, count * dim));
  });

  std::vector<double> row_energy(static_cast<std::size_t>(n)), row_force(static_cast<std::size_t>(n));
  std::vector<double> col_force(static_cast<std::size_t>(blocks.count) * n, 0.0);
  const InversePower power(0.5 * (params.s + 2.0));
  std::atomic<bool> degenerate{false};

  parallel_for(blocks.count, [&](int b) {
    const int begin = b * blocks.size;
    const int end = std::min(n, begin + blocks.size);
    double* col = &col_force[static_cast<std::size_t>(b) * n];
    switch (dim) {
      case 2:
        pair_block<2>(begin, end, n, dim, z, pos, tan, power, options.cutoff, row_energy.data(),
                      row_force.data(), col, degenerate);
        break;
      case 3:
        pair_block<3>(begin, end, n, dim, z, pos, tan, power, options.cutoff, row_energy.data(),
                      row_force.data(), col, degenerate);
        break;
      default:
        pair_block<0>(begin, end, n, dim, z, pos, tan, power, options.cutoff, row_energy.data(),
                      row_force.data(), col, degenerate);
    }
  });
  if (degenerate.load()) throw SingularConfigurationError("coincident curve points");

  out.force.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = row_force[i];
    for (int b = 0; b < blocks.count; ++b) acc += col_force[static_cast<std::size_t>(b) * n + i];
    out.force[i] = acc;
  }
  const double scale = std::pow(static_cast<double>(n), -params.s - 1.0) / params.s;
  out.energy = scale * pairwise_sum(row_energy);
}

double energy_value(const Curve& curve, const RieszParams& params, const Configuration& z,
                    const EnergyOptions& options) {
  params.validate();
  PairSums sums;
  pair_sums(curve, params, z.values(), sums, options);
  return sums.energy;
}

std::vector<double> energy_gradient(const Curve& curve, const RieszParams& params,
                                    const Configuration& z, const EnergyOptions& options) {
  params.validate();
  PairSums sums;
  pair_sums(curve, params, z.values(), sums, options);
  const double scale = -std::pow(static_cast<double>(z.size()), -params.s - 1.0);
  for (double& f : sums.force) f *= scale;
  return std::move(sums.force);
}

std::vector<double> flat_energy_terms(const RieszParams& params, const Configuration& z) {
  params.validate();
  const int n = z.size();
  const double scale = std::pow(static_cast<double>(n), -params.s - 1.0) / params.s;
  std::vector<double> terms(static_cast<std::size_t>(n - 1));
  std::vector<double> buf(static_cast<std::size_t>(n));
  for (int k = 1; k < n; ++k) {
    for (int i = 0; i < n; ++i) buf[i] = std::pow(z.at(i + k) - z[i], -params.s);
    terms[k - 1] = scale * pairwise_sum(buf);
  }
  return terms;
}

namespace {
double recombine(const std::vector<double>& pieces, int n) {
  double acc = 0.0;
  for (int k = (n - 1) / 2; k >= 1; --k) acc += pieces[k - 1];
  if (n % 2 == 0) acc += 0.5 * pieces[n / 2 - 1];
  return acc;
}
}  // namespace

double flat_energy(const RieszParams& params, const Configuration& z) {
  params.validate();
  const int n = z.size();
  const double scale = std::pow(static_cast<double>(n), -params.s - 1.0) / params.s;
  std::vector<double> pieces(static_cast<std::size_t>(n / 2));
  std::vector<double> buf(static_cast<std::size_t>(n));
  for (int k = 1; k <= n / 2; ++k) {
    for (int i = 0; i < n; ++i) buf[i] = std::pow(z.at(i + k) - z[i], -params.s);
    pieces[k - 1] = scale * pairwise_sum(buf);
  }
  return recombine(pieces, n);
}

EnergyBreakdown energy(const Curve& curve, const RieszParams& params, const Configuration& z) {
  params.validate();
  const int n = z.size();
  if (n != params.N) throw std::invalid_argument("configuration size differs from N");
  const int dim = curve.dimension();
  std::vector<double> pos(static_cast<std::size_t>(n) * dim);
  curve.positions(z.values(), pos);

  const auto dist2 = [&](int i, int j) {
    double r2 = 0.0;
    for (int c = 0; c < dim; ++c) {
      const double r = pos[static_cast<std::size_t>(i) * dim + c] - pos[static_cast<std::size_t>(j) * dim + c];
      r2 += r * r;
    }
    if (!(r2 > 0.0)) throw SingularConfigurationError("coincident curve points");
    return r2;
  };
  const double half_s = 0.5 * params.s;
  const double scale = std::pow(static_cast<double>(n), -params.s - 1.0) / params.s;

  EnergyBreakdown out;
  std::vector<double> rows(static_cast<std::size_t>(n), 0.0), buf;
  buf.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    buf.clear();
    for (int j = i + 1; j < n; ++j) buf.push_back(std::pow(dist2(i, j), -half_s));
    rows[i] = pairwise_sum(buf);
  }
  out.E = scale * pairwise_sum(rows);

  out.E_k.resize(static_cast<std::size_t>(n - 1));
  buf.resize(static_cast<std::size_t>(n));
  // E^{N-k} holds the E^k pairs; slotting each term by the pair's start in
  // the shorter direction makes the two sums bitwise identical.
  for (int k = 1; k < n; ++k) {
    const bool far = 2 * k > n;
    for (int i = 0; i < n; ++i) buf[far ? (i + k) % n : i] = std::pow(dist2((i + k) % n, i), -half_s);
    out.E_k[k - 1] = scale * pairwise_sum(buf);
  }
  out.E_flat_k = flat_energy_terms(params, z);
  out.E_flat = recombine(out.E_flat_k, n);
  out.zeta_sN = zeta_truncated(params.s, n);
  return out;
}

}  // namespace rieszflow
