#include "dsse/wls.hpp"

namespace dsse {

VectorXd build_weights(const MeasurementPlan& plan, const VectorXd& sigmas) {
  if (sigmas.size() != plan.size()) throw ValidationError("one sigma per measurement required");
  if (!(sigmas.array() > 0.0).all() || !sigmas.allFinite())
    throw ValidationError("measurement sigmas must be positive and finite");
  return sigmas.array().square().inverse();
}

EstimationResult estimate(const Network& net, const MatrixXcd& y, const MeasurementPlan& plan, const VectorXd& z,
                          const VectorXd& w, const VectorXd& x0, const WlsOptions& opts) {
  if (z.size() != plan.size()) throw ValidationError("measurement vector length does not match the plan");
  if (x0.size() != net.state_dimension()) throw ValidationError("initial state has the wrong dimension");
  return solve_wls<long double>(NetworkModel(net, y, plan), z, w, x0, opts);
}

}  // namespace dsse
