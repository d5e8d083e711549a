#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsse/common.hpp"
#include "dsse/network.hpp"
#include "dsse/noise.hpp"
#include "dsse/power_equations.hpp"

namespace dsse {

enum class MeasurementKind { v_mag, p_injection, q_injection, p_flow, q_flow };
enum class MeasurementSource { real, pseudo };
enum class BranchEnd { from, to };

/// Absolute sigma floor (p.u.) for proportional spreads at near-zero values.
inline constexpr double kSigmaFloor = 1e-6;
/// Standard deviation of a zero-injection pseudo-measurement: variance 1e-4 p.u.^2.
inline constexpr double kZeroInjectionSigma = 1e-2;

struct MeasurementDescriptor {
  MeasurementKind kind = MeasurementKind::v_mag;
  int bus = -1;     // bus id; v_mag and injections
  int branch = -1;  // position in Network::branches(); flows
  BranchEnd end = BranchEnd::from;
  MeasurementSource source = MeasurementSource::real;
  /// Relative accuracy of a real sensor (fraction of |z*|). Pseudo-measurements
  /// take their relative spread from the distribution variant instead.
  double sigma_pct = 0.0;
  /// Fixed absolute spread in p.u.; overrides any relative spread.
  std::optional<double> sigma_abs;
  /// "gaussian" for real sensors and zero-injection pseudo-measurements,
  /// "variant" for pseudo-measurements that follow the swept distribution.
  std::string distribution = "gaussian";

  bool is_flow() const { return kind == MeasurementKind::p_flow || kind == MeasurementKind::q_flow; }
  bool follows_variant() const { return distribution == "variant"; }
};

/// Ordered list of descriptors; the order fixes the index of each entry in z.
struct MeasurementPlan {
  std::vector<MeasurementDescriptor> descriptors;

  int size() const { return static_cast<int>(descriptors.size()); }
  int count(MeasurementSource source) const;
};

std::string_view to_string(MeasurementKind k);
std::string_view to_string(MeasurementSource s);

/// The reference plan: |V| at buses 0, 3, 8, 11, 13; P and Q injections at
/// 3, 8, 11, 13; P and Q flows at the sending end of every in-service branch
/// leaving the slack bus; a P/Q pseudo pair at every other non-slack bus.
/// Real sensor accuracies are drawn once from U(0.5%, 2%) for voltages and
/// U(1%, 5%) for power (shared by the P/Q pair of a bus or branch) using
/// `sensor_seed`.
MeasurementPlan default_plan(const Network& net, std::uint64_t sensor_seed);

/// Throws ValidationError if a descriptor references a missing bus/branch.
void validate_plan(const Network& net, const MeasurementPlan& plan);

std::string plan_to_json(const MeasurementPlan& plan);
MeasurementPlan parse_plan(std::string_view json_text);
MeasurementPlan load_plan(const std::filesystem::path& path);

/// Noise-free measurement values h(x) in p.u. on the network's s_base.
template <typename Scalar>
VectorX<Scalar> evaluate_h(const Network& net, const MatrixXcd& y, const MeasurementPlan& plan,
                           const VectorX<Scalar>& x);

/// Analytic Jacobian dh/dx, m x n_s.
template <typename Scalar>
MatrixX<Scalar> evaluate_jacobian(const Network& net, const MatrixXcd& y, const MeasurementPlan& plan,
                                  const VectorX<Scalar>& x);

/// Absolute spread of every measurement for one scenario. Real sensors use
/// sigma_pct * |z*|, variant-driven pseudo-measurements use
/// pseudo_sigma_pct * |z*|, both floored at kSigmaFloor; fixed spreads are
/// taken as is.
/// Numerical rank of H at flat start (column-pivoted QR).
int flat_start_rank(const Network& net, const MatrixXcd& y, const MeasurementPlan& plan);

VectorXd measurement_sigmas(const MeasurementPlan& plan, const VectorXd& z_true, double pseudo_sigma_pct);

/// One calibrated noise law per measurement. Descriptors following the
/// variant get `variant_shape`; the rest are unbiased Gaussians.
std::vector<CalibratedNoise> build_noise_library(const MeasurementPlan& plan, const VectorXd& z_true,
                                                 const VectorXd& sigmas, const NoiseShape& variant_shape);

/// Identifies the random stream of one scenario. Measurement i draws from
/// its own substream keyed by (seed, scenario, i), so the same scenario sees
/// the same underlying randomness under every variant.
struct ScenarioStream {
  std::uint64_t seed = 0;
  std::uint64_t scenario = 0;
};

VectorXd sample_measurements(const MeasurementPlan& plan, const std::vector<CalibratedNoise>& library,
                             const ScenarioStream& stream);

// ---------------------------------------------------------------------------

namespace detail {

template <typename Scalar>
MatrixX<std::complex<Scalar>> cast_admittance(const MatrixXcd& y) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return y;
  } else {
    return y.cast<std::complex<Scalar>>();
  }
}

struct FlowEnds {
  int near;
  int far;
};

inline FlowEnds flow_ends(const Network& net, const MeasurementDescriptor& d) {
  const Branch& br = net.branches().at(d.branch);
  const int f = net.require_index(br.from_bus);
  const int t = net.require_index(br.to_bus);
  return d.end == BranchEnd::from ? FlowEnds{f, t} : FlowEnds{t, f};
}

}  // namespace detail

template <typename Scalar>
VectorX<Scalar> evaluate_h(const Network& net, const MatrixXcd& y, const MeasurementPlan& plan,
                           const VectorX<Scalar>& x) {
  const auto ys = detail::cast_admittance<Scalar>(y);
  const BusVoltages<Scalar> v = expand_state<Scalar>(net, x);
  VectorX<Scalar> p, q;
  bus_injections<Scalar>(ys, v, p, q);

  VectorX<Scalar> h(plan.size());
  for (int i = 0; i < plan.size(); ++i) {
    const MeasurementDescriptor& d = plan.descriptors[i];
    switch (d.kind) {
      case MeasurementKind::v_mag: h(i) = v.vm(net.require_index(d.bus)); break;
      case MeasurementKind::p_injection: h(i) = p(net.require_index(d.bus)); break;
      case MeasurementKind::q_injection: h(i) = q(net.require_index(d.bus)); break;
      case MeasurementKind::p_flow:
      case MeasurementKind::q_flow: {
        const auto ends = detail::flow_ends(net, d);
        const auto flow = branch_flow<Scalar>(net.branch_admittance(d.branch), v, ends.near, ends.far);
        h(i) = d.kind == MeasurementKind::p_flow ? flow.p : flow.q;
        break;
      }
    }
  }
  return h;
}

template <typename Scalar>
MatrixX<Scalar> evaluate_jacobian(const Network& net, const MatrixXcd& y, const MeasurementPlan& plan,
                                  const VectorX<Scalar>& x) {
  const auto ys = detail::cast_admittance<Scalar>(y);
  const BusVoltages<Scalar> v = expand_state<Scalar>(net, x);
  VectorX<Scalar> p, q;
  bus_injections<Scalar>(ys, v, p, q);

  const int n_s = net.state_dimension();
  const int half = n_s / 2;
  MatrixX<Scalar> jac = MatrixX<Scalar>::Zero(plan.size(), n_s);
  VectorX<Scalar> row_p(n_s), row_q(n_s);
  for (int i = 0; i < plan.size(); ++i) {
    const MeasurementDescriptor& d = plan.descriptors[i];
    switch (d.kind) {
      case MeasurementKind::v_mag: {
        const int pos = net.state_position(net.require_index(d.bus));
        if (pos >= 0) jac(i, half + pos) = Scalar(1);
        break;
      }
      case MeasurementKind::p_injection:
      case MeasurementKind::q_injection: {
        const int b = net.require_index(d.bus);
        injection_derivatives<Scalar>(net, ys, v, b, p(b), q(b), row_p, row_q);
        jac.row(i) = (d.kind == MeasurementKind::p_injection ? row_p : row_q).transpose();
        break;
      }
      case MeasurementKind::p_flow:
      case MeasurementKind::q_flow: {
        const auto ends = detail::flow_ends(net, d);
        branch_flow_derivatives<Scalar>(net, net.branch_admittance(d.branch), v, ends.near, ends.far, row_p, row_q);
        jac.row(i) = (d.kind == MeasurementKind::p_flow ? row_p : row_q).transpose();
        break;
      }
    }
  }
  return jac;
}

}  // namespace dsse
