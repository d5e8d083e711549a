#include "dsse/crb.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace dsse {

namespace {

MatrixXd spd_inverse(const MatrixXd& g, const MatrixXd& h, const VectorXd& w, const char* which) {
  Eigen::LLT<MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) {
    const MatrixXd scaled = w.cwiseSqrt().asDiagonal() * h;
    const int rank = static_cast<int>(Eigen::ColPivHouseholderQR<MatrixXd>(scaled).rank());
    throw ObservabilityError(std::string(which) + " gain matrix is not positive definite", rank,
                             static_cast<int>(h.cols()));
  }
  return llt.solve(MatrixXd::Identity(g.rows(), g.cols()));
}

}  // namespace

VectorXd build_true_weights(const MeasurementPlan& plan, const std::vector<CalibratedNoise>& library) {
  if (static_cast<int>(library.size()) != plan.size()) throw ValidationError("noise library size does not match the plan");
  VectorXd w(plan.size());
  for (int i = 0; i < plan.size(); ++i) w(i) = fisher_information(library[i]);
  return w;
}

GainPair build_gain_pair(const MatrixXd& h, const VectorXd& w_assumed, const VectorXd& w_true) {
  if (h.rows() != w_assumed.size() || h.rows() != w_true.size())
    throw ValidationError("weights and Jacobian rows differ in length");
  return {h.transpose() * w_assumed.asDiagonal() * h, h.transpose() * w_true.asDiagonal() * h};
}

CrbReport crb_ratio(const MatrixXd& h, const VectorXd& w_assumed, const VectorXd& w_true) {
  const GainPair pair = build_gain_pair(h, w_assumed, w_true);
  CrbReport rep;
  rep.cov_wls = spd_inverse(pair.g_wls, h, w_assumed, "assumed");
  rep.cov_true = spd_inverse(pair.g_true, h, w_true, "true");
  rep.assumed_var = rep.cov_wls.diagonal();
  rep.true_var = rep.cov_true.diagonal();
  if (!(rep.assumed_var.array() > 0.0).all() || !(rep.true_var.array() > 0.0).all())
    throw ObservabilityError("non-positive variance on the CRB diagonal", -1, static_cast<int>(h.cols()));
  rep.rho = rep.true_var.cwiseQuotient(rep.assumed_var);
  return rep;
}

IdentityCheck fim_gain_identity_check(const EstimationResult& result, const GainPair& pair, double tol) {
  const MatrixXd& g = pair.g_wls;
  const MatrixXd& f = pair.g_true;
  IdentityCheck out;
  if (g.rows() != f.rows() || g.cols() != f.cols() || g.rows() != result.gain.rows()) return out;
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double scale = std::max(std::abs(g(i, j)), std::abs(f(i, j)));
      if (scale == 0.0) continue;
      out.max_relative_deviation = std::max(out.max_relative_deviation, std::abs(f(i, j) - g(i, j)) / scale);
    }
    if (g(j, j) > 0.0) out.max_diagonal_ratio = std::max(out.max_diagonal_ratio, f(j, j) / g(j, j));
  }
  out.passed = out.max_relative_deviation < tol;
  return out;
}

}  // namespace dsse
