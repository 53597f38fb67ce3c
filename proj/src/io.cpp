#include "rieszflow/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace rieszflow {

using nlohmann::json;

json to_json(const EnergyBreakdown& e) {
  return {{"E", e.E}, {"E_k", e.E_k}, {"E_flat", e.E_flat}, {"E_flat_k", e.E_flat_k}, {"zeta_sN", e.zeta_sN}};
}

json to_json(const DistributionReport& r) {
  json windows = json::array();
  for (const WindowReport& w : r.windows) {
    windows.push_back({{"a", w.a},
                       {"L", w.L},
                       {"discrepancy", w.value},
                       {"bound", w.bound},
                       {"bound_flat", w.bound_flat},
                       {"within", w.within},
                       {"within_flat", w.within_flat}});
  }
  return {{"N", r.N},
          {"s", r.s},
          {"delta", r.delta},
          {"rho_M", r.rho_M},
          {"i_M", r.i_M + 1},
          {"max_gap", r.max_gap},
          {"mad", r.mad},
          {"E", r.E},
          {"E_flat", r.E_flat},
          {"zeta_tilde", r.zeta_tilde},
          {"zeta_sN", r.zeta_sN},
          {"lyapunov", r.lyapunov},
          {"N_star", r.N_star},
          {"epsilon", r.epsilon},
          {"epsilon_E", r.epsilon_E},
          {"epsilon_flat", r.epsilon_flat},
          {"mad_bound", r.mad_bound},
          {"mad_bound_flat", r.mad_bound_flat},
          {"mad_within", r.mad_within},
          {"mad_within_flat", r.mad_within_flat},
          {"windows", windows}};
}

json to_json(const CutProfile& p) {
  return {{"points", p.points}, {"P", p.P}, {"argmin", p.argmin}, {"argmax", p.argmax}};
}

json to_json(const WeakCut& w) {
  return {{"i_S", w.index},
          {"P", w.P},
          {"ratio", w.ratio},
          {"epsilon1", w.epsilon1},
          {"bound_holds", w.bound_holds},
          {"warnings", w.warnings}};
}

json to_json(const OracleResult& r) {
  return {{"z", std::vector<double>(r.Z.values().begin(), r.Z.values().end())},
          {"energy", r.energy},
          {"iterations", r.iterations},
          {"gradient_norm", r.gradient_norm},
          {"converged", r.converged},
          {"starts", r.starts},
          {"best_start", r.best_start}};
}

json to_json(const FlowState& s) {
  return {{"t", s.t},
          {"z", std::vector<double>(s.Z.values().begin(), s.Z.values().end())},
          {"E", s.E},
          {"dissipation", s.dissipation},
          {"dt", s.dt},
          {"step_count", s.step_count},
          {"rejected_steps", s.rejected_steps},
          {"velocity", s.velocity},
          {"stop_reason", s.stop_reason}};
}

json to_json(const IntegratorConfig& c) {
  return {{"method", to_string(c.method)},
          {"dt_init", c.dt_init},
          {"dt_min", c.dt_min},
          {"dt_max", c.dt_max},
          {"safety", c.safety},
          {"gap_fraction", c.gap_fraction},
          {"rtol", c.rtol},
          {"t_end", c.t_end},
          {"plateau_threshold", c.plateau_threshold},
          {"plateau_window", c.plateau_window},
          {"max_steps", c.max_steps}};
}

FlowState flow_state_from_json(const json& j) {
  try {
    FlowState s;
    s.t = j.at("t").get<double>();
    s.Z = Configuration(j.at("z").get<std::vector<double>>());
    s.E = j.at("E").get<double>();
    s.dissipation = j.at("dissipation").get<double>();
    s.dt = j.at("dt").get<double>();
    s.step_count = j.at("step_count").get<std::int64_t>();
    s.rejected_steps = j.at("rejected_steps").get<std::int64_t>();
    s.velocity = j.at("velocity").get<std::vector<double>>();
    s.stop_reason = j.at("stop_reason").get<std::string>();
    return s;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed flow state: ") + e.what());
  } catch (const ConfigurationError& e) {
    throw IoError(std::string("malformed flow state: ") + e.what());
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed on " + path);
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_snapshot(const std::string& path, const FlowState& s, const RieszParams& params) {
  write_json(path, {{"state", to_json(s)}, {"params", {{"s", params.s}, {"N", params.N}}}});
}

FlowState read_snapshot(const std::string& path) {
  const json j = read_json(path);
  if (!j.contains("state")) throw IoError(path + ": missing 'state'");
  return flow_state_from_json(j["state"]);
}

std::vector<double> read_numbers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<double> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const std::string cell = line.substr(first, line.find(',', first) - first);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      if (values.empty()) continue;  // header row
      throw IoError(path + ":" + std::to_string(lineno) + ": not a number");
    }
    values.push_back(v);
  }
  return values;
}

Configuration read_z_file(const std::string& path) { return Configuration::from_unsorted(read_numbers(path)); }

void write_cut_profile_csv(const std::string& path, const CutProfile& p) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << std::setprecision(17) << "k,x_k,P_k\n";
  for (std::size_t k = 0; k < p.P.size(); ++k) out << k << ',' << p.points[k] << ',' << p.P[k] << '\n';
  if (!out) throw IoError("write failed on " + path);
}

}  // namespace rieszflow
