#include "rieszflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>

#include "rieszflow/diagnostics.hpp"

namespace rieszflow {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Candidate {
  std::vector<double> z;
  std::vector<double> velocity;
  double E = 0.0;
  double error = 0.0;     // scaled local error, adaptive only
  double gap_ratio = 0.0;  // max_i |d_i' - d_i| / d_i
  int worst_gap = 0;
  bool ordered = true;
};

class Stepper {
 public:
  Stepper(const Curve& curve, const RieszParams& params) : curve_(curve), params_(params) {}

  // Returns false when an intermediate stage lost its ordering.
  bool attempt(const FlowState& st, double dt, IntegratorConfig::Method method, double rtol,
               Candidate& c) {
    const auto z0 = st.Z.values();
    const std::vector<double>& k1 = st.velocity;
    const std::size_t n = z0.size();
    c.z.resize(n);
    switch (method) {
      case IntegratorConfig::Method::euler:
        for (std::size_t i = 0; i < n; ++i) c.z[i] = z0[i] + dt * k1[i];
        break;
      case IntegratorConfig::Method::rk4: {
        if (!stage(z0, dt, {&k1}, {0.5}, k2_)) return false;
        if (!stage(z0, dt, {&k2_}, {0.5}, k3_)) return false;
        if (!stage(z0, dt, {&k3_}, {1.0}, k4_)) return false;
        for (std::size_t i = 0; i < n; ++i)
          c.z[i] = z0[i] + dt * (k1[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]) / 6.0;
        break;
      }
      case IntegratorConfig::Method::adaptive: {
        if (!stage(z0, dt, {&k1}, {a21}, k2_)) return false;
        if (!stage(z0, dt, {&k1, &k2_}, {a31, a32}, k3_)) return false;
        if (!stage(z0, dt, {&k1, &k2_, &k3_}, {a41, a42, a43}, k4_)) return false;
        if (!stage(z0, dt, {&k1, &k2_, &k3_, &k4_}, {a51, a52, a53, a54}, k5_)) return false;
        if (!stage(z0, dt, {&k1, &k2_, &k3_, &k4_, &k5_}, {a61, a62, a63, a64, a65}, k6_)) return false;
        for (std::size_t i = 0; i < n; ++i)
          c.z[i] = z0[i] + dt * (b1 * k1[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] + b6 * k6_[i]);
        break;
      }
    }
    if (!Configuration::check(c.z).empty()) return false;
    try {
      c.E = evaluate_flow(curve_, params_, c.z, c.velocity);
    } catch (const SingularConfigurationError&) {
      return false;
    }
    c.error = 0.0;
    if (method == IntegratorConfig::Method::adaptive) {
      const std::vector<double>& k7 = c.velocity;
      for (std::size_t i = 0; i < n; ++i) {
        const double local = dt * std::abs(e1 * k1[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                                           e6 * k6_[i] + e7 * k7[i]);
        const double scale = rtol * std::min(st.Z.gap(static_cast<int>(i)),
                                             st.Z.gap(static_cast<int>((i + n - 1) % n)));
        c.error = std::max(c.error, local / scale);
      }
    }
    return true;
  }

 private:
  bool stage(std::span<const double> z0, double dt, std::initializer_list<const std::vector<double>*> ks,
             std::initializer_list<double> coeffs, std::vector<double>& out) {
    const std::size_t n = z0.size();
    buf_.assign(z0.begin(), z0.end());
    auto coeff = coeffs.begin();
    for (const std::vector<double>* k : ks) {
      const double w = dt * *coeff++;
      for (std::size_t i = 0; i < n; ++i) buf_[i] += w * (*k)[i];
    }
    if (!Configuration::check(buf_).empty()) return false;
    try {
      evaluate_flow(curve_, params_, buf_, out);
    } catch (const SingularConfigurationError&) {
      return false;
    }
    return true;
  }

  const Curve& curve_;
  const RieszParams& params_;
  std::vector<double> buf_, k2_, k3_, k4_, k5_, k6_;
};

void measure_gaps(const Configuration& before, Candidate& c) {
  const int n = before.size();
  c.gap_ratio = 0.0;
  c.worst_gap = 0;
  c.ordered = true;
  for (int i = 0; i < n; ++i) {
    const double d_old = before.gap(i);
    const double d_new = i + 1 < n ? c.z[i + 1] - c.z[i] : c.z[0] + 1.0 - c.z[n - 1];
    if (!(d_new > 0.0)) c.ordered = false;
    const double ratio = std::abs(d_new - d_old) / d_old;
    if (ratio > c.gap_ratio) {
      c.gap_ratio = ratio;
      c.worst_gap = i;
    }
  }
}

double mean_square(const std::vector<double>& v) {
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
  return pairwise_sum(sq) / static_cast<double>(v.size());
}

// Integer shifts keep z_0 near [0, 1) without changing any curve point.
void canonicalize(std::vector<double>& z) {
  double shift = 0.0;
  if (z.front() >= 1.0) shift = -std::floor(z.front());
  else if (z.front() < -0.5) shift = 1.0;
  if (shift != 0.0)
    for (double& v : z) v += shift;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(gap_fraction > 0.0 && gap_fraction <= 0.5))
    throw std::invalid_argument("gap_fraction must lie in (0, 0.5]");
  if (!(dt_min > 0.0)) throw std::invalid_argument("dt_min must be positive");
  if (!(dt_init >= dt_min)) throw std::invalid_argument("dt_init must be at least dt_min");
  if (!(dt_max >= dt_min)) throw std::invalid_argument("dt_max must be at least dt_min");
  if (!(safety > 0.0 && safety <= 1.0)) throw std::invalid_argument("safety must lie in (0, 1]");
  if (!(rtol > 0.0)) throw std::invalid_argument("rtol must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be non-negative");
  if (plateau_window < 1) throw std::invalid_argument("plateau_window must be at least 1");
  if (max_steps < 0) throw std::invalid_argument("max_steps must be non-negative");
}

const char* to_string(IntegratorConfig::Method method) {
  switch (method) {
    case IntegratorConfig::Method::euler: return "euler";
    case IntegratorConfig::Method::rk4: return "rk4";
    case IntegratorConfig::Method::adaptive: return "adaptive";
  }
  return "?";
}

IntegratorConfig::Method method_from_string(const std::string& name) {
  if (name == "euler") return IntegratorConfig::Method::euler;
  if (name == "rk4") return IntegratorConfig::Method::rk4;
  if (name == "adaptive" || name == "dopri5") return IntegratorConfig::Method::adaptive;
  throw std::invalid_argument("unknown integrator method '" + name + "'");
}

double evaluate_flow(const Curve& curve, const RieszParams& params, std::span<const double> z,
                     std::vector<double>& out) {
  PairSums sums;
  pair_sums(curve, params, z, sums);
  const double scale = std::pow(static_cast<double>(z.size()), -params.s);
  out.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = scale * sums.force[i];
  return sums.energy;
}

std::vector<double> rhs(const Curve& curve, const RieszParams& params, const Configuration& z) {
  params.validate();
  std::vector<double> v;
  evaluate_flow(curve, params, z.values(), v);
  return v;
}

FlowState initial_state(const Curve& curve, const RieszParams& params, const Configuration& z0,
                        const IntegratorConfig& cfg) {
  FlowState st;
  st.Z = z0;
  st.E = evaluate_flow(curve, params, z0.values(), st.velocity);
  st.dissipation = mean_square(st.velocity);
  st.dt = std::min(cfg.dt_init, cfg.dt_max);
  return st;
}

FlowState step(const FlowState& state, const IntegratorConfig& cfg, const Curve& curve,
               const RieszParams& params) {
  FlowState base = state;
  if (base.velocity.size() != static_cast<std::size_t>(base.Z.size())) {
    base.E = evaluate_flow(curve, params, base.Z.values(), base.velocity);
    base.dissipation = mean_square(base.velocity);
  }

  const bool fixed = cfg.method != IntegratorConfig::Method::adaptive;
  double dt = fixed ? cfg.dt_init : (base.dt > 0.0 ? base.dt : cfg.dt_init);
  dt = std::min(dt, cfg.dt_max);
  const double remaining = cfg.t_end - base.t;
  bool clipped = false;
  if (remaining > 0.0 && dt >= remaining) {
    dt = remaining;
    clipped = true;
  }

  Stepper stepper(curve, params);
  Candidate c;
  std::int64_t rejected = 0;
  int worst_gap = closest_pair(base.Z).i_M;
  for (;;) {
    if (dt < cfg.dt_min) {
      throw StiffnessError("step size fell below dt_min at t = " + std::to_string(base.t) +
                               " (gap index " + std::to_string(worst_gap) + ")",
                           worst_gap, base.t);
    }
    bool ok = stepper.attempt(base, dt, cfg.method, cfg.rtol, c);
    if (ok) {
      measure_gaps(base.Z, c);
      worst_gap = c.worst_gap;
      ok = c.ordered && c.gap_ratio <= cfg.gap_fraction && c.error <= 1.0 &&
           c.E <= base.E + 1e-9 * std::abs(base.E);
    }
    if (ok) break;
    ++rejected;
    dt *= 0.5;
    clipped = false;
  }

  FlowState next;
  next.t = clipped ? cfg.t_end : base.t + dt;
  canonicalize(c.z);
  next.Z = Configuration(std::move(c.z));
  next.E = c.E;
  next.velocity = std::move(c.velocity);
  next.dissipation = mean_square(next.velocity);
  next.step_count = base.step_count + 1;
  next.rejected_steps = base.rejected_steps + rejected;

  if (fixed) {
    next.dt = cfg.dt_init;
  } else if (clipped && rejected == 0) {
    next.dt = std::max(dt, base.dt);
  } else {
    double grow = c.error > 0.0 ? cfg.safety * std::pow(c.error, -0.2) : 5.0;
    grow = std::clamp(grow, 0.2, 5.0);
    if (c.gap_ratio > 0.0) grow = std::min(grow, cfg.safety * cfg.gap_fraction / c.gap_ratio);
    if (rejected > 0) grow = std::min(grow, 1.0);
    next.dt = std::clamp(dt * grow, cfg.dt_min, cfg.dt_max);
  }
  return next;
}

FlowState run(const Curve& curve, const RieszParams& params, const Configuration& z0,
              const IntegratorConfig& cfg, std::span<Observer* const> sinks) {
  cfg.validate();
  params.validate();
  if (z0.size() != params.N) throw std::invalid_argument("initial configuration size differs from N");

  FlowState state = initial_state(curve, params, z0, cfg);
  for (Observer* o : sinks) o->on_start(state);

  std::deque<double> recent{state.E};
  while (state.t < cfg.t_end) {
    if (state.step_count >= cfg.max_steps) {
      state.stop_reason = "max_steps";
      break;
    }
    FlowState next = step(state, cfg, curve, params);
    for (Observer* o : sinks) o->on_step(state, next);
    state = std::move(next);

    recent.push_back(state.E);
    if (recent.size() > static_cast<std::size_t>(cfg.plateau_window) + 1) recent.pop_front();
    if (recent.size() == static_cast<std::size_t>(cfg.plateau_window) + 1 &&
        recent.front() - recent.back() < cfg.plateau_threshold) {
      state.stop_reason = "plateau";
      break;
    }
  }
  if (state.stop_reason.empty()) state.stop_reason = "t_end";
  for (Observer* o : sinks) o->on_finish(state);
  return state;
}

TrajectoryWriter::TrajectoryWriter(const std::string& path, int every, bool full_z)
    : out_(path), path_(path), every_(std::max(1, every)), full_z_(full_z) {
  if (!out_) throw IoError("cannot open trajectory file " + path);
  out_ << std::setprecision(17);
}

void TrajectoryWriter::write(const FlowState& s) {
  const ClosestPair cp = closest_pair(s.Z);
  out_ << s.step_count << ',' << s.t << ',' << s.dt << ',' << s.E << ',' << s.dissipation << ','
       << cp.delta << ',' << cp.rho_M;
  if (full_z_)
    for (double z : s.Z.values()) out_ << ',' << z;
  out_ << '\n';
  last_written_ = s.step_count;
  if (!out_) throw IoError("write failed on " + path_);
}

void TrajectoryWriter::on_start(const FlowState& s) {
  out_ << "step,t,dt,E,dissipation,delta,rho_M";
  if (full_z_)
    for (int i = 1; i <= s.Z.size(); ++i) out_ << ",z_" << i;
  out_ << '\n';
  write(s);
}

void TrajectoryWriter::on_step(const FlowState&, const FlowState& current) {
  if (current.step_count % every_ == 0) write(current);
}

void TrajectoryWriter::on_finish(const FlowState& s) {
  if (last_written_ != s.step_count) write(s);
  out_.flush();
  if (!out_) throw IoError("write failed on " + path_);
}

void InvariantChecker::on_step(const FlowState& previous, const FlowState& current) {
  ++steps_;
  if (!Configuration::check(current.Z.values()).empty()) ++ordering_;
  const double rise = current.E - previous.E;
  if (rise > slack_ * std::abs(previous.E)) ++energy_;
  worst_rise_ = std::max(worst_rise_, rise / std::abs(previous.E));
  if (!(closest_pair(current.Z).delta > 0.0)) ++delta_;
}

FlowRecorder::FlowRecorder(double s, int every, double energy_threshold)
    : s_(s), every_(std::max(1, every)), threshold_(energy_threshold) {}

void FlowRecorder::sample(const FlowState& st) {
  const ClosestPair cp = closest_pair(st.Z);
  Sample smp{st.step_count, st.t, st.E, st.dissipation, cp.delta, cp.rho_M, lyapunov(st.E, cp.rho_M, s_)};
  if (!samples_.empty()) {
    const Sample& prev = samples_.back();
    const double dt = smp.t - prev.t;
    if (dt > 0.0 && smp.delta < prev.delta) {
      const int n = st.Z.size();
      const double scale = std::pow(static_cast<double>(n), -s_) * n_star(s_, n) * std::pow(prev.delta, 2.0 - s_);
      delta_k_ = std::max(delta_k_, (prev.delta - smp.delta) / dt / scale);
    }
  }
  samples_.push_back(smp);
}

void FlowRecorder::on_start(const FlowState& st) {
  if (st.E <= threshold_) threshold_time_ = st.t;
  sample(st);
}

void FlowRecorder::on_step(const FlowState&, const FlowState& current) {
  if (threshold_time_ < 0.0 && current.E <= threshold_) threshold_time_ = current.t;
  if (current.step_count % every_ == 0) sample(current);
}

void FlowRecorder::on_finish(const FlowState& st) {
  if (samples_.empty() || samples_.back().step != st.step_count) sample(st);
}

double FlowRecorder::lyapunov_monotone_fraction() const {
  if (samples_.size() < 2) return 1.0;
  std::size_t good = 0;
  for (std::size_t i = 1; i < samples_.size(); ++i)
    if (samples_[i].lyapunov <= samples_[i - 1].lyapunov * (1.0 + 1e-12)) ++good;
  return static_cast<double>(good) / static_cast<double>(samples_.size() - 1);
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

Configuration uniform_configuration(int N, double offset) {
  if (N < 2) throw std::invalid_argument("need N >= 2");
  std::vector<double> z(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) z[i] = offset + static_cast<double>(i) / N;
  return Configuration(std::move(z));
}

Configuration random_configuration(int N, std::uint64_t seed) {
  if (N < 2) throw std::invalid_argument("need N >= 2");
  std::mt19937_64 rng(seed);
  std::vector<double> z(static_cast<std::size_t>(N));
  for (;;) {
    for (double& v : z) v = unit_uniform(rng());
    std::sort(z.begin(), z.end());
    if (Configuration::check(z).empty()) return Configuration(std::move(z));
  }
}

Configuration jittered_configuration(int N, std::uint64_t seed, double amplitude) {
  if (N < 2) throw std::invalid_argument("need N >= 2");
  if (!(amplitude >= 0.0 && amplitude < 1.0)) throw std::invalid_argument("jitter amplitude must lie in [0, 1)");
  std::mt19937_64 rng(seed);
  std::vector<double> z(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) z[i] = (i + amplitude * (unit_uniform(rng()) - 0.5)) / N;
  return Configuration(std::move(z));
}

}  // namespace rieszflow
