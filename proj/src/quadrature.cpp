#include "dsse/quadrature.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace dsse {

namespace {

// Kronrod nodes on [0, 1]; odd indices are the embedded Gauss nodes.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gauss_kronrod(const std::function<double(double)>& f, double a, double b, int& evals) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int k = 0; k < 7; ++k) {
    const double dx = half * kNodes[k];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[k] * pair;
    if (k % 2 == 1) gauss += kGaussWeights[k / 2] * pair;
  }
  evals += 15;
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

QuadratureResult integrate_finite(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& opts) {
  QuadratureResult r;
  if (a == b) {
    r.converged = true;
    return r;
  }
  std::priority_queue<Panel> panels;
  panels.push(gauss_kronrod(f, a, b, r.evaluations));
  double total = panels.top().value;
  double error = panels.top().error;
  int subdivisions = 0;
  while (error > std::max(opts.abs_tol, opts.rel_tol * std::abs(total)) && subdivisions < opts.max_subdivisions) {
    const Panel worst = panels.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // panel below floating-point resolution
    panels.pop();
    const Panel left = gauss_kronrod(f, worst.a, mid, r.evaluations);
    const Panel right = gauss_kronrod(f, mid, worst.b, r.evaluations);
    panels.push(left);
    panels.push(right);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    ++subdivisions;
  }
  // Re-sum to shed the drift of the running updates.
  total = 0.0;
  error = 0.0;
  while (!panels.empty()) {
    total += panels.top().value;
    error += panels.top().error;
    panels.pop();
  }
  r.value = total;
  r.error_estimate = error;
  r.converged = error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
  return r;
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts) {
  if (a > b) {
    QuadratureResult r = integrate(f, b, a, opts);
    r.value = -r.value;
    return r;
  }
  const bool lo_inf = std::isinf(a);
  const bool hi_inf = std::isinf(b);
  if (lo_inf && hi_inf) {
    QuadratureResult left = integrate(f, a, 0.0, opts);
    QuadratureResult right = integrate(f, 0.0, b, opts);
    return {left.value + right.value, left.error_estimate + right.error_estimate,
            left.evaluations + right.evaluations, left.converged && right.converged};
  }
  if (hi_inf) {
    // x = a + t / (1 - t), t in [0, 1)
    auto g = [&](double t) {
      if (t >= 1.0) return 0.0;
      const double s = 1.0 - t;
      const double v = f(a + t / s) / (s * s);
      return std::isfinite(v) ? v : 0.0;
    };
    return integrate_finite(g, 0.0, 1.0, opts);
  }
  if (lo_inf) {
    auto g = [&](double t) {
      if (t >= 1.0) return 0.0;
      const double s = 1.0 - t;
      const double v = f(b - t / s) / (s * s);
      return std::isfinite(v) ? v : 0.0;
    };
    return integrate_finite(g, 0.0, 1.0, opts);
  }
  return integrate_finite(f, a, b, opts);
}

QuadratureResult integrate_piecewise(const std::function<double(double)>& f, std::span<const double> breakpoints,
                                     const QuadratureOptions& opts) {
  QuadratureResult total;
  total.converged = true;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const QuadratureResult part = integrate(f, breakpoints[k], breakpoints[k + 1], opts);
    total.value += part.value;
    total.error_estimate += part.error_estimate;
    total.evaluations += part.evaluations;
    total.converged = total.converged && part.converged;
  }
  return total;
}

}  // namespace dsse
