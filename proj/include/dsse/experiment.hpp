#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsse/crb.hpp"
#include "dsse/measurement.hpp"
#include "dsse/network.hpp"
#include "dsse/noise.hpp"
#include "dsse/power_flow.hpp"
#include "dsse/wls.hpp"

namespace dsse {

struct Scenario {
  int id = 0;
  double lambda = 1.0;
  VectorXd x_star;
};

/// n converged scenarios with lambda ~ U(0.5, 1.5). Draw a of the load-scale
/// stream is keyed by (master_seed, a); a non-converging draw is discarded
/// and the next one tried. Throws ConvergenceError after 10 n draws.
std::vector<Scenario> generate_scenarios(const Network& net, const MatrixXcd& y, int n, std::uint64_t master_seed,
                                         const PowerFlowOptions& pf = {});

struct SweepOptions {
  std::uint64_t master_seed = 42;
  WlsOptions wls;
  int threads = 0;  // 0: hardware concurrency
};

/// Outcome of one (variant, scenario) cell.
struct Cell {
  bool ok = false;
  std::string error;  // set when !ok
  CrbReport report;
  VectorXd x_hat;
  int wls_iterations = 0;
};

struct SweepResult {
  std::vector<Variant> variants;
  std::vector<Scenario> scenarios;
  std::vector<Cell> cells;  // row-major: variant index * scenario count + scenario index

  const Cell& cell(std::size_t variant, std::size_t scenario) const {
    return cells[variant * scenarios.size() + scenario];
  }
  int failed_cells() const;
};

/// One cell end to end: sample z, solve WLS from flat start, compare the two
/// gain matrices at x_hat. Failures are captured in the cell, never thrown.
Cell run_cell(const Network& net, const MatrixXcd& y, const MeasurementPlan& plan, const Variant& variant,
              const NoiseShape& shape, const Scenario& scenario, const SweepOptions& opts);

/// Parallel map over all (variant, scenario) cells. Results land in fixed
/// slots, so the output does not depend on scheduling.
SweepResult run_crb_sweep(const Network& net, const MatrixXcd& y, const MeasurementPlan& plan,
                          const std::vector<Variant>& variants, const std::vector<Scenario>& scenarios,
                          const SweepOptions& opts);

struct CoverageRow {
  std::string variant_id;
  double level = 0.0;
  double cov_wls = 0.0;
  double cov_true = 0.0;
  int n_scenarios = 0;  // scenarios that entered the average
};

/// Two-sided Gaussian quantile used for the interval half-width: 1.0 for 68%,
/// 1.96 for 95%.
double coverage_quantile(double level);

/// Fraction of (scenario, non-slack bus) pairs with |x*_k - x_hat_k| below
/// z * sqrt(var_k) on the |V| states, for the assumed and true variances.
std::vector<CoverageRow> empirical_coverage(const SweepResult& sweep, const std::vector<double>& levels);

struct RmseRow {
  std::string variant_id;
  int scenario_id = 0;
  double lambda = 0.0;
  double rmse_vmag = 0.0;
};

/// Root mean square |V| error over non-slack buses, one row per successful
/// cell.
std::vector<RmseRow> rmse_summary(const SweepResult& sweep);

double rmse_vmag(const VectorXd& x_hat, const VectorXd& x_star);

}  // namespace dsse
