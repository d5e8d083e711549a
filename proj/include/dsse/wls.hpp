#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "dsse/common.hpp"
#include "dsse/measurement.hpp"

namespace dsse {

struct WlsOptions {
  double step_tol = 1e-8;      // on the infinity norm of the correction
  double gradient_tol = 1e-6;  // on the infinity norm of H^T W (z - h(x)), p.u.
  int max_iter = 50;
  bool damping = false;        // halve the step while the objective increases
};

template <typename Scalar>
struct WlsResult {
  VectorX<Scalar> x_hat;
  MatrixX<Scalar> jacobian;  // H at x_hat
  MatrixX<Scalar> gain;      // H^T W H at x_hat
  int iterations = 0;
  bool converged = false;
  double final_step_norm = 0.0;
  double final_gradient_norm = 0.0;
  std::vector<double> objective_trace;  // J(x) at the start of each iteration, then at x_hat
};

/// The network estimator works in long double: the fixture's gain reaches
/// ~1e11, so one ulp of a double state is already ~1e-5 of gradient.
using EstimationResult = WlsResult<long double>;

/// Diagonal WLS weights 1/sigma^2.
VectorXd build_weights(const MeasurementPlan& plan, const VectorXd& sigmas);

template <typename Model, typename Scalar>
double wls_objective(const Model& model, const VectorXd& z, const VectorXd& w, const VectorX<Scalar>& x) {
  const VectorX<Scalar> r = z.cast<Scalar>() - model.evaluate(x);
  return static_cast<double>(r.dot(w.cast<Scalar>().asDiagonal() * r));
}

/// Infinity norm of the objective gradient H^T W (z - h(x)).
template <typename Model, typename Scalar>
double wls_stationarity(const Model& model, const VectorXd& z, const VectorXd& w, const VectorX<Scalar>& x) {
  const MatrixX<Scalar> h = model.jacobian(x);
  const VectorX<Scalar> r = z.cast<Scalar>() - model.evaluate(x);
  return static_cast<double>((h.transpose() * (w.cast<Scalar>().asDiagonal() * r)).template lpNorm<Eigen::Infinity>());
}

/// Weighted least squares by Newton iteration on the normal equations
/// G dx = H^T W (z - h(x)), G = H^T W H, each solved by Cholesky. Converged
/// once the last step is below step_tol and the gradient below gradient_tol.
/// `Model` provides `evaluate(x)` and `jacobian(x)` for VectorX<Scalar> x.
template <typename Scalar = double, typename Model>
WlsResult<Scalar> solve_wls(const Model& model, const VectorXd& z, const VectorXd& w, const VectorXd& x0,
                            const WlsOptions& opts = {}) {
  using Vec = VectorX<Scalar>;
  using Mat = MatrixX<Scalar>;
  if (z.size() != w.size()) throw ValidationError("measurement and weight vectors differ in length");
  if (!(w.array() > 0.0).all() || !w.allFinite()) throw ValidationError("weights must be positive and finite");

  const Vec zs = z.cast<Scalar>();
  const Vec ws = w.cast<Scalar>();
  WlsResult<Scalar> res;
  res.x_hat = x0.cast<Scalar>();
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    const Vec r = zs - model.evaluate(res.x_hat);
    const Scalar objective = r.dot(ws.asDiagonal() * r);
    res.objective_trace.push_back(static_cast<double>(objective));
    res.jacobian = model.jacobian(res.x_hat);
    res.gain = res.jacobian.transpose() * ws.asDiagonal() * res.jacobian;
    const Vec rhs = res.jacobian.transpose() * (ws.asDiagonal() * r);
    res.final_gradient_norm = static_cast<double>(rhs.template lpNorm<Eigen::Infinity>());
    if (last_step < opts.step_tol && res.final_gradient_norm < opts.gradient_tol) {
      res.converged = true;
      break;
    }
    if (it == opts.max_iter) break;

    Eigen::LLT<Mat> llt(res.gain);
    if (llt.info() != Eigen::Success) {
      const Mat scaled = ws.cwiseSqrt().asDiagonal() * res.jacobian;
      const int rank = static_cast<int>(Eigen::ColPivHouseholderQR<Mat>(scaled).rank());
      throw ObservabilityError("gain matrix is not positive definite (rank " + std::to_string(rank) + " of " +
                                   std::to_string(res.jacobian.cols()) + ")",
                               rank, static_cast<int>(res.jacobian.cols()));
    }
    Vec dx = llt.solve(rhs);

    if (opts.damping) {
      // residual rounding near the optimum is far above a few ulps of J; sqrt(eps) slack
      const Scalar limit = objective * (1 + std::sqrt(std::numeric_limits<Scalar>::epsilon()));
      for (int halvings = 0; halvings < 30; ++halvings) {
        const Vec rt = zs - model.evaluate(Vec(res.x_hat + dx));
        if (rt.dot(ws.asDiagonal() * rt) <= limit) break;
        dx *= Scalar(0.5);
      }
    }
    res.x_hat += dx;
    res.iterations = it + 1;
    res.final_step_norm = last_step = static_cast<double>(dx.template lpNorm<Eigen::Infinity>());
    if (!std::isfinite(last_step)) break;
  }
  if (!res.converged) {
    res.jacobian = model.jacobian(res.x_hat);
    res.gain = res.jacobian.transpose() * ws.asDiagonal() * res.jacobian;
    res.objective_trace.push_back(wls_objective(model, z, w, res.x_hat));
  }
  return res;
}

/// h(x) and H(x) of a measurement plan on a network.
class NetworkModel {
 public:
  NetworkModel(const Network& net, const MatrixXcd& y, const MeasurementPlan& plan)
      : net_(net), y_(y), plan_(plan) {}

  template <typename Scalar>
  VectorX<Scalar> evaluate(const VectorX<Scalar>& x) const {
    return evaluate_h<Scalar>(net_, y_, plan_, x);
  }
  template <typename Scalar>
  MatrixX<Scalar> jacobian(const VectorX<Scalar>& x) const {
    return evaluate_jacobian<Scalar>(net_, y_, plan_, x);
  }

 private:
  const Network& net_;
  const MatrixXcd& y_;
  const MeasurementPlan& plan_;
};

/// Linear measurement model h(x) = A x.
class LinearModel {
 public:
  explicit LinearModel(MatrixXd a) : a_(std::move(a)) {}
  template <typename Scalar>
  VectorX<Scalar> evaluate(const VectorX<Scalar>& x) const {
    return a_.cast<Scalar>() * x;
  }
  template <typename Scalar>
  MatrixX<Scalar> jacobian(const VectorX<Scalar>&) const {
    return a_.cast<Scalar>();
  }

 private:
  MatrixXd a_;
};

EstimationResult estimate(const Network& net, const MatrixXcd& y, const MeasurementPlan& plan, const VectorXd& z,
                          const VectorXd& w, const VectorXd& x0, const WlsOptions& opts = {});

}  // namespace dsse
