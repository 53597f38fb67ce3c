#pragma once

// Gradient flow dz_i/dt = -N^{-s} sum_{j != i} grad W(x(z_i) - x(z_j)) . x'(z_i)
// with gap-guarded explicit time stepping.

#include <cstdint>
#include <deque>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rieszflow/curve.hpp"
#include "rieszflow/riesz.hpp"

namespace rieszflow {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the step controller cannot satisfy the gap guard above dt_min.
class StiffnessError : public std::runtime_error {
 public:
  StiffnessError(const std::string& what, int gap_index, double t)
      : std::runtime_error(what), gap_index_(gap_index), t_(t) {}
  int gap_index() const { return gap_index_; }
  double time() const { return t_; }

 private:
  int gap_index_;
  double t_;
};

struct IntegratorConfig {
  enum class Method { euler, rk4, adaptive };

  Method method = Method::adaptive;
  double dt_init = 1e-6;
  double dt_min = 1e-30;
  double dt_max = 1e-2;
  double safety = 0.9;
  double gap_fraction = 0.2;  // gamma: reject when some |delta d_i| > gamma d_i
  double rtol = 1e-6;         // adaptive only, relative to the adjacent gaps
  double t_end = 1.0;
  double plateau_threshold = 1e-12;
  int plateau_window = 100;
  std::int64_t max_steps = 50'000'000;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

const char* to_string(IntegratorConfig::Method method);
IntegratorConfig::Method method_from_string(const std::string& name);

struct FlowState {
  double t = 0.0;
  Configuration Z;
  double E = 0.0;
  double dissipation = 0.0;  // (1/N) sum |dz_i/dt|^2 at Z
  double dt = 0.0;           // step size proposed for the next step
  std::int64_t step_count = 0;
  std::int64_t rejected_steps = 0;
  std::vector<double> velocity;  // dz/dt at Z
  std::string stop_reason;       // set by run: "t_end", "plateau", "max_steps"
};

/// Velocity field at z; equals -N times the energy gradient.
std::vector<double> rhs(const Curve& curve, const RieszParams& params, const Configuration& z);

/// Writes the velocity into out and returns E(z) from the same pair pass.
double evaluate_flow(const Curve& curve, const RieszParams& params, std::span<const double> z,
                     std::vector<double>& out);

FlowState initial_state(const Curve& curve, const RieszParams& params, const Configuration& z0,
                        const IntegratorConfig& cfg);

/// One accepted step, never past cfg.t_end. Rejected attempts halve dt.
FlowState step(const FlowState& state, const IntegratorConfig& cfg, const Curve& curve,
               const RieszParams& params);

/// Receives immutable snapshots of the flow.
class Observer {
 public:
  virtual ~Observer() = default;
  virtual void on_start(const FlowState&) {}
  virtual void on_step(const FlowState& previous, const FlowState& current) = 0;
  virtual void on_finish(const FlowState&) {}
};

/// Integrates to cfg.t_end, stopping early on an energy plateau (energy drop
/// over the trailing plateau_window accepted steps below plateau_threshold).
FlowState run(const Curve& curve, const RieszParams& params, const Configuration& z0,
              const IntegratorConfig& cfg, std::span<Observer* const> sinks = {});

/// CSV rows: step, t, dt, E, dissipation, delta, rho_M[, z_1..z_N].
class TrajectoryWriter final : public Observer {
 public:
  TrajectoryWriter(const std::string& path, int every, bool full_z);
  void on_start(const FlowState& s) override;
  void on_step(const FlowState& previous, const FlowState& current) override;
  void on_finish(const FlowState& s) override;

 private:
  void write(const FlowState& s);
  std::ofstream out_;
  std::string path_;
  int every_;
  bool full_z_;
  std::int64_t last_written_ = -1;
};

/// Checks ordering, energy monotonicity and delta > 0 on every accepted step.
class InvariantChecker final : public Observer {
 public:
  explicit InvariantChecker(double energy_slack = 1e-9) : slack_(energy_slack) {}
  void on_step(const FlowState& previous, const FlowState& current) override;

  std::int64_t steps() const { return steps_; }
  std::int64_t ordering_violations() const { return ordering_; }
  std::int64_t energy_violations() const { return energy_; }
  std::int64_t delta_violations() const { return delta_; }
  double worst_energy_rise() const { return worst_rise_; }
  bool ok() const { return ordering_ == 0 && energy_ == 0 && delta_ == 0; }

 private:
  double slack_;
  std::int64_t steps_ = 0, ordering_ = 0, energy_ = 0, delta_ = 0;
  double worst_rise_ = 0.0;
};

/// Samples t, E, delta, rho_M and F = E + rho_M^s every `every` steps, and
/// records the first time E drops to threshold.
class FlowRecorder final : public Observer {
 public:
  struct Sample {
    std::int64_t step = 0;
    double t = 0.0, E = 0.0, dissipation = 0.0, delta = 0.0, rho_M = 0.0, lyapunov = 0.0;
  };

  FlowRecorder(double s, int every, double energy_threshold);
  void on_start(const FlowState& st) override;
  void on_step(const FlowState& previous, const FlowState& current) override;
  void on_finish(const FlowState& st) override;

  const std::vector<Sample>& samples() const { return samples_; }
  /// Negative when E never reached the threshold.
  double threshold_time() const { return threshold_time_; }
  /// Fraction of sampled intervals on which F did not increase.
  double lyapunov_monotone_fraction() const;
  /// Largest observed K with -d delta/dt <= K N^{-s} N_* delta^{2-s}.
  double delta_rate_constant() const { return delta_k_; }

 private:
  void sample(const FlowState& st);
  double s_;
  int every_;
  double threshold_;
  double threshold_time_ = -1.0;
  double delta_k_ = 0.0;
  std::vector<Sample> samples_;
};

// Initial data. Seeds make every generator reproducible.
Configuration uniform_configuration(int N, double offset = 0.0);
Configuration random_configuration(int N, std::uint64_t seed);
/// z_i = (i + amplitude (u_i - 1/2)) / N with u_i uniform in [0, 1); amplitude < 1.
Configuration jittered_configuration(int N, std::uint64_t seed, double amplitude);

/// Uniform double in [0, 1) from a 64-bit engine, identical across platforms.
double unit_uniform(std::uint64_t bits);

}  // namespace rieszflow
