#pragma once

#include <string>
#include <vector>

#include "dsse/common.hpp"
#include "dsse/measurement.hpp"
#include "dsse/wls.hpp"

namespace dsse {

/// Gain matrices under the assumed (Gaussian) and true Fisher weights, both
/// built from the same Jacobian.
struct GainPair {
  MatrixXd g_wls;
  MatrixXd g_true;
};

/// Per-state Cramer-Rao comparison for one (variant, scenario) cell. State
/// order follows the state vector: angles first, then magnitudes.
struct CrbReport {
  std::string variant_id;
  int scenario_id = -1;
  double lambda = 0.0;
  VectorXd assumed_var;  // diag(G_wls^-1)
  VectorXd true_var;     // diag(G_true^-1)
  VectorXd rho;          // true_var / assumed_var
  MatrixXd cov_wls;      // full inverses, not emitted in reports
  MatrixXd cov_true;

  auto angle_rho() const { return rho.head(rho.size() / 2); }
  auto magnitude_rho() const { return rho.tail(rho.size() / 2); }
};

/// W_true: F_i from each measurement's calibrated noise law. Gaussian
/// entries evaluate to exactly the assumed 1/sigma^2.
VectorXd build_true_weights(const MeasurementPlan& plan, const std::vector<CalibratedNoise>& library);

GainPair build_gain_pair(const MatrixXd& h, const VectorXd& w_assumed, const VectorXd& w_true);

/// Throws ObservabilityError if either gain fails to factorize.
CrbReport crb_ratio(const MatrixXd& h, const VectorXd& w_assumed, const VectorXd& w_true);

struct IdentityCheck {
  bool passed = false;
  /// Largest |G_true - G| / max(|G_true|, |G|) over nonzero entries.
  double max_relative_deviation = 0.0;
  /// Largest diagonal ratio G_true(k,k) / G(k,k).
  double max_diagonal_ratio = 0.0;
};

/// Checks that the Fisher information matrix H^T W_true H equals the WLS gain
/// H^T W H, as it must under Gaussian noise. `pair` is built from the
/// Jacobian of `result`.
IdentityCheck fim_gain_identity_check(const EstimationResult& result, const GainPair& pair, double tol = 1e-12);

}  // namespace dsse
