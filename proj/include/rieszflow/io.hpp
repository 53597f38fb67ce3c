#pragma once

// JSON and CSV serialization. All JSON keys are snake_case; doubles are
// written with round-trip precision.

#include <json.hpp>

#include <string>
#include <vector>

#include "rieszflow/config.hpp"
#include "rieszflow/diagnostics.hpp"
#include "rieszflow/dynamics.hpp"
#include "rieszflow/oracle.hpp"
#include "rieszflow/riesz.hpp"

namespace rieszflow {

nlohmann::json to_json(const EnergyBreakdown& e);
nlohmann::json to_json(const DistributionReport& r);
nlohmann::json to_json(const CutProfile& p);
nlohmann::json to_json(const WeakCut& w);
nlohmann::json to_json(const OracleResult& r);
nlohmann::json to_json(const FlowState& s);
nlohmann::json to_json(const IntegratorConfig& c);

/// Inverse of to_json(FlowState); throws IoError on missing or bad fields.
FlowState flow_state_from_json(const nlohmann::json& j);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

/// Snapshot file: {"state": FlowState, "params": {"s", "N"}}.
void write_snapshot(const std::string& path, const FlowState& s, const RieszParams& params);
FlowState read_snapshot(const std::string& path);

/// One number per line (first CSV column); blank lines and '#' comments skipped.
std::vector<double> read_numbers(const std::string& path);
/// read_numbers, sorted into a Configuration.
Configuration read_z_file(const std::string& path);

/// Columns k, x_k, P_k.
void write_cut_profile_csv(const std::string& path, const CutProfile& p);

}  // namespace rieszflow
