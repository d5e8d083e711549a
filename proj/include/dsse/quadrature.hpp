#pragma once

#include <functional>
#include <span>

namespace dsse {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_subdivisions = 2000;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Globally adaptive 7/15-point Gauss-Kronrod integration. Either limit may
/// be infinite; infinite ranges are mapped onto finite ones by
/// x = a + t / (1 - t).
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts = {});

/// Integrates over consecutive breakpoints [p0, p1], [p1, p2], ... and sums
/// the pieces. Used to keep kinks of the integrand on panel edges.
QuadratureResult integrate_piecewise(const std::function<double(double)>& f, std::span<const double> breakpoints,
                                     const QuadratureOptions& opts = {});

}  // namespace dsse
