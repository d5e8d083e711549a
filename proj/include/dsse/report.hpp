#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "dsse/experiment.hpp"

namespace dsse {

/// Schema tags written as the first line of every CSV ("# <tag>").
inline constexpr std::string_view kCrbSchema = "dsse-crb crb_ratios v1";
inline constexpr std::string_view kCoverageSchema = "dsse-crb coverage v1";
inline constexpr std::string_view kRmseSchema = "dsse-crb rmse v1";

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

/// Columns: variant_id, scenario_id, lambda, bus_id, state_kind, assumed_var,
/// true_var, rho. One row per non-slack bus and state kind (theta, vmag).
void write_crb_csv(std::ostream& out, const SweepResult& sweep, const Network& net);

/// Columns: variant_id, level, cov_wls, cov_true, n_scenarios; a trailing
/// comment line carries the failed-cell count.
void write_coverage_csv(std::ostream& out, const std::vector<CoverageRow>& rows, int failed_cells);

/// Columns: variant_id, scenario_id, lambda, rmse_vmag.
void write_rmse_csv(std::ostream& out, const std::vector<RmseRow>& rows);

/// 64-bit FNV-1a of a byte string, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace dsse
