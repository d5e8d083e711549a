#pragma once

#include "dsse/common.hpp"
#include "dsse/network.hpp"

namespace dsse {

struct PowerFlowOptions {
  double tol_mva = 1e-8;
  int max_iter = 30;
};

/// Newton-Raphson outcome. `state` follows the layout of power_equations.hpp.
struct PowerFlowSolution {
  VectorXd state;
  int iterations = 0;
  double max_mismatch_mva = 0.0;
  bool converged = false;
};

/// Scheduled net injections (generation minus load) at every bus in per-unit,
/// with all loads multiplied by `load_scale`.
void scheduled_injections(const Network& net, double load_scale, VectorXd& p, VectorXd& q);

/// Solves the AC power flow from a flat start. Every non-slack bus is PQ.
/// Non-convergence is reported through `converged == false`, not thrown.
PowerFlowSolution solve_power_flow(const Network& net, const MatrixXcd& y, double load_scale,
                                   const PowerFlowOptions& opts = {});

/// Largest per-bus complex power mismatch (MVA) over non-slack buses.
double power_mismatch_mva(const Network& net, const MatrixXcd& y, double load_scale, const VectorXd& state);

}  // namespace dsse
