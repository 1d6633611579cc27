#pragma once

#include <string>

#include <json.hpp>

#include "openslt/algsim.hpp"
#include "openslt/config.hpp"

namespace openslt {

/// Knobs shared by the report-producing commands; every paper-level quantity
/// the reports depend on is surfaced here, nothing is hidden in code.
struct RunOptions {
  std::vector<int> m_sequence = {16, 32, 64, 128};
  long long m_override = 0;  // 0 = automatic
  double eps = 0.1;
  double z = 4.42;
  RunMode mode = RunMode::Exact;
  std::uint64_t seed = 1;
  Caps caps;
  double grid_tol = 1e-10;
  NormEffort effort;
  BetaMode beta_mode = BetaMode::FullSpace;
  StepRule step_rule = StepRule::Validated;
};

using Report = nlohmann::ordered_json;

/// Indivisibility measures, t^ID estimate, bound values and the
/// (m, empirical error, bound) sweep.
Report build_analyze_report(const ModelConfig& cfg, const RunOptions& opts);

/// The simulation plan record.
Report build_plan_report(const ModelConfig& cfg, const RunOptions& opts);

/// Reconstruction, per-slot ledgers and error budget for one run.
Report build_simulate_report(const ModelConfig& cfg, const RunOptions& opts);

/// Simulation output compared against the reference integrator.
Report build_verify_report(const ModelConfig& cfg, const RunOptions& opts);

/// CSV projections of the reports (fixed schemas; 17 significant digits).
std::string report_to_csv(const Report& report);

/// Atomic file emission: write to a temporary file, then rename.
void write_text_atomic(const std::string& path, const std::string& payload);

}  // namespace openslt
