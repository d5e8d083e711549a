#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsse/experiment.hpp"

namespace dsse {

/// Everything a sweep needs. Seeds are always explicit; nothing is seeded
/// from the clock.
struct RunConfig {
  std::filesystem::path network;
  std::string plan = "default";        // "default" or a plan file path
  std::string variants = "standard";     // "standard", "gaussian-only" or a grid file path
  int n_scenarios_crb = 100;
  int n_scenarios_coverage = 1000;
  std::uint64_t master_seed = 42;
  std::uint64_t sensor_seed = 7;       // real-sensor accuracy draw
  double pf_tol_mva = 1e-8;
  int pf_max_iter = 30;
  double wls_tol = 1e-8;
  int wls_max_iter = 50;
  bool wls_damping = false;
  std::optional<double> slack_setpoint;
  std::filesystem::path output_dir = ".";
  int threads = 0;

  void validate() const;
};

/// Reads a JSON config; keys mirror the RunConfig field names. Unknown keys
/// are rejected.
RunConfig parse_run_config(std::string_view json_text, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// Inputs resolved from a config.
struct ResolvedInputs {
  Network network;
  std::string network_hash;
  MatrixXcd ybus;
  MeasurementPlan plan;
  std::vector<Variant> variants;
};

ResolvedInputs resolve_inputs(const RunConfig& cfg);

struct SweepOutcome {
  int failed_crb_cells = 0;
  int failed_coverage_cells = 0;
  std::vector<std::string> errors;
  std::filesystem::path crb_csv, coverage_csv, rmse_csv, manifest;

  bool ok() const { return failed_crb_cells == 0 && failed_coverage_cells == 0 && errors.empty(); }
};

/// Full study: CRB sweep and RMSE over n_scenarios_crb scenarios, coverage
/// over n_scenarios_coverage scenarios. Writes crb_ratios.csv, rmse.csv,
/// coverage.csv and manifest.json into output_dir. The manifest is written
/// even when the run fails; configuration and I/O errors are recorded there
/// and rethrown.
SweepOutcome run_sweep(const RunConfig& cfg);

}  // namespace dsse
