// rieszflow: command-line front end.
//
//   rieszflow simulate --config run.yaml [--out DIR] [--seed S] [--repeat K]
//   rieszflow diagnose --config run.yaml --snapshot state.json [--out DIR]
//   rieszflow cut --points pts.csv --s 2 --epsilon 0.01
//   rieszflow oracle --config run.yaml
//   rieszflow print-default-config
//
// Exit codes: 0 success, 2 bad input or config, 3 stiffness failure, 4 I/O.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "rieszflow/config.hpp"
#include "rieszflow/diagnostics.hpp"
#include "rieszflow/dynamics.hpp"
#include "rieszflow/io.hpp"
#include "rieszflow/oracle.hpp"
#include "rieszflow/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rieszflow;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitStiff = 3;
constexpr int kExitIo = 4;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

// Writes snapshot_<step>.json every `every` accepted steps.
class SnapshotWriter final : public Observer {
 public:
  SnapshotWriter(std::string dir, int every, RieszParams params)
      : dir_(std::move(dir)), every_(every), params_(params) {}
  void on_step(const FlowState&, const FlowState& current) override {
    if (every_ > 0 && current.step_count % every_ == 0)
      write_snapshot(dir_ + "/snapshot_" + std::to_string(current.step_count) + ".json", current, params_);
  }

 private:
  std::string dir_;
  int every_;
  RieszParams params_;
};

json curve_summary(const Curve& curve) {
  return {{"kind", to_string(curve.kind())},
          {"dimension", curve.dimension()},
          {"raw_length", curve.raw_length()},
          {"grid_size", curve.grid_size()},
          {"r0", curve.r0()}};
}

void simulate_one(const RunConfig& cfg, const std::string& dir) {
  make_dir(dir);
  const auto started = std::chrono::steady_clock::now();
  const Curve curve = build_configured_curve(cfg);
  const Configuration z0 = initial_configuration(cfg);
  const double s = cfg.params.s;
  const double zt = zeta(s).zeta_tilde;
  const double threshold = zt * (1.0 + cfg.diagnostics.epsilon);

  InvariantChecker invariants;
  FlowRecorder recorder(s, cfg.diagnostics.sample_every, threshold);
  SnapshotWriter snapshots(dir, cfg.output.snapshot_every, cfg.params);
  std::vector<Observer*> sinks{&invariants, &recorder, &snapshots};
  std::unique_ptr<TrajectoryWriter> trajectory;
  if (cfg.output.trajectory) {
    trajectory = std::make_unique<TrajectoryWriter>(dir + "/trajectory.csv", cfg.output.trajectory_every,
                                                    cfg.output.trajectory_full_z);
    sinks.push_back(trajectory.get());
  }

  const auto& windows = cfg.diagnostics.windows;
  const DistributionReport initial = distribution_report(curve, cfg.params, z0, cfg.diagnostics.epsilon, windows);
  const FlowState final_state = run(curve, cfg.params, z0, cfg.integrator, sinks);
  const DistributionReport report =
      distribution_report(curve, cfg.params, final_state.Z, cfg.diagnostics.epsilon, windows);
  write_snapshot(dir + "/snapshot.json", final_state, cfg.params);

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json summary = {
      {"config_yaml", to_yaml(cfg)},
      {"curve", curve_summary(curve)},
      {"s", s},
      {"N", cfg.params.N},
      {"t_final", final_state.t},
      {"steps", final_state.step_count},
      {"rejected_steps", final_state.rejected_steps},
      {"stop_reason", final_state.stop_reason},
      {"final_E", final_state.E},
      {"final_E_flat", report.E_flat},
      {"zeta_tilde", zt},
      {"ratio", final_state.E / zt},
      {"epsilon", cfg.diagnostics.epsilon},
      {"energy_threshold", threshold},
      {"energy_bound_holds", final_state.E <= threshold},
      {"threshold_time", recorder.threshold_time() >= 0.0 ? json(recorder.threshold_time()) : json(nullptr)},
      {"initial_report", to_json(initial)},
      {"report", to_json(report)},
      {"lyapunov_monotone_fraction", recorder.lyapunov_monotone_fraction()},
      {"delta_rate_constant", recorder.delta_rate_constant()},
      {"invariants",
       {{"steps_checked", invariants.steps()},
        {"ordering_violations", invariants.ordering_violations()},
        {"energy_violations", invariants.energy_violations()},
        {"delta_violations", invariants.delta_violations()},
        {"ok", invariants.ok()}}},
      {"metadata", {{"timestamp", utc_timestamp()}, {"wall_seconds", wall}, {"threads", thread_count()}}}};
  write_json(dir + "/summary.json", summary);

  std::cout << dir << ": E = " << std::setprecision(10) << final_state.E << ", E/zeta_tilde = " << final_state.E / zt
            << ", t = " << final_state.t << " (" << final_state.stop_reason << ", " << final_state.step_count
            << " steps)\n";
}

int cmd_simulate(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed,
                 int repeat) {
  RunConfig cfg = load_config(config_path);
  if (seed) cfg.init.seed = seed;
  cfg.validate();
  const std::string base = out.empty() ? cfg.output.directory : out;
  if (repeat <= 1) {
    simulate_one(cfg, base);
    return 0;
  }
  const std::uint64_t first = cfg.init.seed.value_or(0);
  for (int r = 0; r < repeat; ++r) {
    cfg.init.seed = first + static_cast<std::uint64_t>(r);
    simulate_one(cfg, base + "/seed_" + std::to_string(*cfg.init.seed));
  }
  return 0;
}

int cmd_diagnose(const std::string& config_path, const std::string& snapshot_path, const std::string& out) {
  const RunConfig cfg = load_config(config_path);
  const FlowState state = read_snapshot(snapshot_path);
  if (state.Z.size() != cfg.params.N)
    throw ConfigError("snapshot holds " + std::to_string(state.Z.size()) + " particles, config says N = " +
                          std::to_string(cfg.params.N),
                      0);
  const std::string dir = out.empty() ? cfg.output.directory : out;
  make_dir(dir);
  const Curve curve = build_configured_curve(cfg);
  const DistributionReport report =
      distribution_report(curve, cfg.params, state.Z, cfg.diagnostics.epsilon, cfg.diagnostics.windows);
  json j = to_json(report);
  j["t"] = state.t;
  j["step_count"] = state.step_count;
  write_json(dir + "/report.json", j);

  // Unroll the circle at z_0: x_k = z_k - z_0 for k < N, x_N = 1.
  const int n = state.Z.size();
  std::vector<double> x(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k < n; ++k) x[k] = state.Z[k] - state.Z[0];
  x[n] = 1.0;
  write_cut_profile_csv(dir + "/cut_profile.csv", cut_profile(x, cfg.params.s));

  std::cout << "mad = " << report.mad << " (bound " << report.mad_bound << "), delta = " << report.delta
            << ", rho_M = " << report.rho_M << "\n";
  return 0;
}

int cmd_cut(const std::string& points_path, double s, double epsilon, const std::string& out) {
  const std::vector<double> pts = read_numbers(points_path);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    if (!(pts[i] < pts[i + 1])) throw std::invalid_argument("points must be strictly increasing (row " + std::to_string(i + 2) + ")");
  const WeakCut w = weak_cut(pts, s, epsilon);
  const CutProfile profile = cut_profile(pts, s);
  std::cout << std::setprecision(12);
  for (const std::string& msg : w.warnings) std::cerr << "warning: " << msg << "\n";
  std::cout << "N = " << pts.size() - 1 << "\n"
            << "epsilon1 = " << w.epsilon1 << "\n"
            << "i_S = " << w.index << "\n"
            << "P_i_S = " << w.P << "\n"
            << "ratio = " << w.ratio << "\n"
            << "bound_holds = " << (w.bound_holds ? "true" : "false") << "\n"
            << "k,x_k,P_k\n";
  for (std::size_t k = 0; k < profile.P.size(); ++k)
    std::cout << k << ',' << profile.points[k] << ',' << profile.P[k] << "\n";
  if (!out.empty()) {
    make_dir(out);
    write_cut_profile_csv(out + "/cut_profile.csv", profile);
  }
  return 0;
}

int cmd_oracle(const std::string& config_path, std::optional<std::uint64_t> seed, double tol,
               const std::string& out) {
  RunConfig cfg = load_config(config_path);
  if (seed) cfg.init.seed = seed;
  if (cfg.params.N > kOracleMaxN)
    throw ConfigError("oracle runs only for N <= " + std::to_string(kOracleMaxN), 0);
  const Curve curve = build_configured_curve(cfg);
  const Configuration z0 = initial_configuration(cfg);
  const OracleResult r = minimize_energy_direct(curve, cfg.params, z0, tol, 20, cfg.init.seed.value_or(0));
  json j = to_json(r);
  j["zeta_tilde"] = zeta(cfg.params.s).zeta_tilde;
  std::cout << j.dump(2) << "\n";
  if (!out.empty()) {
    make_dir(out);
    write_json(out + "/oracle.json", j);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riesz s-energy gradient flow on closed curves"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "worker threads, 0 = all cores (results do not depend on it)");

  std::string config, out, snapshot, points;
  std::optional<std::uint64_t> seed;
  int repeat = 1;
  double s = 2.0, epsilon = 0.01, tol = 1e-10;

  CLI::App* sim = app.add_subcommand("simulate", "run the gradient flow and write a summary");
  sim->add_option("--config", config, "config file")->required();
  sim->add_option("--out", out, "output directory (overrides output.directory)");
  sim->add_option("--seed", seed, "overrides init.seed");
  sim->add_option("--repeat", repeat, "run K consecutive seeds")->check(CLI::PositiveNumber);

  CLI::App* diag = app.add_subcommand("diagnose", "distribution report for a snapshot");
  diag->add_option("--config", config, "config file")->required();
  diag->add_option("--snapshot", snapshot, "snapshot JSON")->required();
  diag->add_option("--out", out, "output directory");

  CLI::App* cut = app.add_subcommand("cut", "weak-cut search on a sorted point set");
  cut->add_option("--points", points, "CSV of sorted points from 0 to 1")->required();
  cut->add_option("--s", s, "Riesz exponent")->required();
  cut->add_option("--epsilon", epsilon, "tolerance of the weak-cut bound");
  cut->add_option("--out", out, "directory for cut_profile.csv");

  CLI::App* orc = app.add_subcommand("oracle", "direct multistart energy minimization (N <= 64)");
  orc->add_option("--config", config, "config file")->required();
  orc->add_option("--seed", seed, "overrides init.seed");
  orc->add_option("--tol", tol, "gradient max-norm tolerance");
  orc->add_option("--out", out, "directory for oracle.json");

  app.add_subcommand("print-default-config", "print every config key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    set_thread_count(threads);
    if (*sim) return cmd_simulate(config, out, seed, repeat);
    if (*diag) return cmd_diagnose(config, snapshot, out);
    if (*cut) return cmd_cut(points, s, epsilon, out);
    if (*orc) return cmd_oracle(config, seed, tol, out);
    RunConfig defaults;
    defaults.init.seed = 1;
    std::cout << to_yaml(defaults);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitInput;
  } catch (const StiffnessError& e) {
    std::cerr << "stiffness failure: " << e.what() << "\n";
    return kExitStiff;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const CurveError& e) {
    std::cerr << "curve error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
