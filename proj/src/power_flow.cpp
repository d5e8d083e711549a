#include "dsse/power_flow.hpp"

#include <cmath>

#include <Eigen/LU>

#include "dsse/power_equations.hpp"

namespace dsse {

namespace {

// Mismatch vector [dP; dQ] over non-slack buses and its infinity norm in MVA.
double mismatch(const Network& net, const VectorXd& p_sched, const VectorXd& q_sched,
                const VectorXd& p, const VectorXd& q, VectorXd& f) {
  const int half = net.bus_count() - 1;
  f.resize(2 * half);
  double worst = 0.0;
  for (int pos = 0; pos < half; ++pos) {
    const int i = net.bus_at_state_position(pos);
    f(pos) = p_sched(i) - p(i);
    f(half + pos) = q_sched(i) - q(i);
    worst = std::max(worst, std::hypot(f(pos), f(half + pos)));
  }
  return worst * net.s_base_mva();
}

}  // namespace

void scheduled_injections(const Network& net, double load_scale, VectorXd& p, VectorXd& q) {
  const int n = net.bus_count();
  p.setZero(n);
  q.setZero(n);
  for (int i = 0; i < n; ++i) {
    const Bus& b = net.buses()[i];
    if (b.kind == BusKind::slack) continue;
    p(i) = -load_scale * b.p_load_mw / net.s_base_mva();
    q(i) = -load_scale * b.q_load_mvar / net.s_base_mva();
  }
}

double power_mismatch_mva(const Network& net, const MatrixXcd& y, double load_scale, const VectorXd& state) {
  VectorXd ps, qs, p, q, f;
  scheduled_injections(net, load_scale, ps, qs);
  bus_injections<double>(y, expand_state<double>(net, state), p, q);
  return mismatch(net, ps, qs, p, q, f);
}

PowerFlowSolution solve_power_flow(const Network& net, const MatrixXcd& y, double load_scale,
                                   const PowerFlowOptions& opts) {
  if (!(opts.tol_mva > 0.0)) throw ValidationError("power-flow tolerance must be positive");
  if (!(load_scale > 0.0)) throw ValidationError("load scale must be positive");

  const int half = net.bus_count() - 1;
  VectorXd p_sched, q_sched, p, q, f;
  scheduled_injections(net, load_scale, p_sched, q_sched);

  PowerFlowSolution sol;
  sol.state = flat_start(net);
  MatrixXd jac(2 * half, 2 * half);

  for (int it = 0;; ++it) {
    const auto v = expand_state<double>(net, sol.state);
    bus_injections<double>(y, v, p, q);
    sol.max_mismatch_mva = mismatch(net, p_sched, q_sched, p, q, f);
    sol.iterations = it;
    if (!std::isfinite(sol.max_mismatch_mva)) return sol;
    if (sol.max_mismatch_mva < opts.tol_mva) {
      sol.converged = true;
      return sol;
    }
    if (it == opts.max_iter) return sol;

    for (int pos = 0; pos < half; ++pos) {
      const int i = net.bus_at_state_position(pos);
      injection_derivatives<double>(net, y, v, i, p(i), q(i), jac.row(pos), jac.row(half + pos));
    }
    sol.state += jac.partialPivLu().solve(f);
    if (!(magnitudes(sol.state).array() > 0.0).all()) return sol;
  }
}

}  // namespace dsse
