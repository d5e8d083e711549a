#pragma once

// AC power-flow equations in polar form, templated on the scalar type so the
// same expressions serve double-precision solvers and extended-precision
// finite-difference checks.
//
// State layout: x = [theta_1 .. theta_{n-1}, |V|_1 .. |V|_{n-1}] over the
// non-slack buses in network order; the slack bus is fixed at
// (0, v_setpoint).

#include <cmath>

#include "dsse/common.hpp"
#include "dsse/network.hpp"

namespace dsse {

template <typename Scalar>
struct BusVoltages {
  VectorX<Scalar> vm;
  VectorX<Scalar> va;
};

inline VectorXd flat_start(const Network& net) {
  const int half = net.bus_count() - 1;
  VectorXd x(2 * half);
  x.head(half).setZero();
  x.tail(half).setOnes();
  return x;
}

template <typename Derived>
auto angles(const Eigen::MatrixBase<Derived>& x) {
  return x.head(x.size() / 2);
}

template <typename Derived>
auto magnitudes(const Eigen::MatrixBase<Derived>& x) {
  return x.tail(x.size() / 2);
}

template <typename Scalar>
BusVoltages<Scalar> expand_state(const Network& net, const VectorX<Scalar>& x) {
  const int n = net.bus_count();
  const int half = n - 1;
  BusVoltages<Scalar> v{VectorX<Scalar>(n), VectorX<Scalar>(n)};
  for (int i = 0; i < n; ++i) {
    const int pos = net.state_position(i);
    if (pos < 0) {
      v.vm(i) = Scalar(net.buses()[i].v_setpoint);
      v.va(i) = Scalar(0);
    } else {
      v.va(i) = x(pos);
      v.vm(i) = x(half + pos);
    }
  }
  return v;
}

/// Active and reactive injections at every bus, in per-unit.
template <typename Scalar>
void bus_injections(const MatrixX<std::complex<Scalar>>& y, const BusVoltages<Scalar>& v,
                    VectorX<Scalar>& p, VectorX<Scalar>& q) {
  using std::cos;
  using std::sin;
  const Eigen::Index n = y.rows();
  p.setZero(n);
  q.setZero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar g = y(i, j).real();
      const Scalar b = y(i, j).imag();
      if (g == Scalar(0) && b == Scalar(0)) continue;
      const Scalar t = v.va(i) - v.va(j);
      const Scalar c = cos(t);
      const Scalar s = sin(t);
      p(i) += v.vm(i) * v.vm(j) * (g * c + b * s);
      q(i) += v.vm(i) * v.vm(j) * (g * s - b * c);
    }
  }
}

/// Fills rows `p_row` and `q_row` with the derivatives of P_i and Q_i with
/// respect to the state vector. `p_i`, `q_i` are the injections at bus i.
template <typename Scalar, typename RowP, typename RowQ>
void injection_derivatives(const Network& net, const MatrixX<std::complex<Scalar>>& y,
                           const BusVoltages<Scalar>& v, int i, Scalar p_i, Scalar q_i,
                           RowP&& p_row, RowQ&& q_row) {
  using std::cos;
  using std::sin;
  const int half = net.bus_count() - 1;
  p_row.setZero();
  q_row.setZero();
  for (int j = 0; j < net.bus_count(); ++j) {
    const int pos = net.state_position(j);
    if (pos < 0) continue;
    const Scalar g = y(i, j).real();
    const Scalar b = y(i, j).imag();
    if (j == i) {
      p_row(pos) = -q_i - b * v.vm(i) * v.vm(i);
      q_row(pos) = p_i - g * v.vm(i) * v.vm(i);
      p_row(half + pos) = p_i / v.vm(i) + g * v.vm(i);
      q_row(half + pos) = q_i / v.vm(i) - b * v.vm(i);
      continue;
    }
    if (g == Scalar(0) && b == Scalar(0)) continue;
    const Scalar t = v.va(i) - v.va(j);
    const Scalar c = cos(t);
    const Scalar s = sin(t);
    p_row(pos) = v.vm(i) * v.vm(j) * (g * s - b * c);
    q_row(pos) = -v.vm(i) * v.vm(j) * (g * c + b * s);
    p_row(half + pos) = v.vm(i) * (g * c + b * s);
    q_row(half + pos) = v.vm(i) * (g * s - b * c);
  }
}

/// Complex power flowing out of `near` into the branch towards `far`.
template <typename Scalar>
struct BranchFlow {
  Scalar p;
  Scalar q;
};

template <typename Scalar>
BranchFlow<Scalar> branch_flow(const BranchAdmittance& a, const BusVoltages<Scalar>& v, int near, int far) {
  using std::cos;
  using std::sin;
  const Scalar g = Scalar(a.series.real());
  const Scalar b = Scalar(a.series.imag());
  const Scalar bsh = Scalar(a.half_shunt);
  const Scalar t = v.va(near) - v.va(far);
  const Scalar c = cos(t);
  const Scalar s = sin(t);
  const Scalar vn = v.vm(near);
  const Scalar vf = v.vm(far);
  return {vn * vn * g - vn * vf * (g * c + b * s), -vn * vn * (b + bsh) - vn * vf * (g * s - b * c)};
}

template <typename Scalar, typename RowP, typename RowQ>
void branch_flow_derivatives(const Network& net, const BranchAdmittance& a, const BusVoltages<Scalar>& v,
                             int near, int far, RowP&& p_row, RowQ&& q_row) {
  using std::cos;
  using std::sin;
  const int half = net.bus_count() - 1;
  const Scalar g = Scalar(a.series.real());
  const Scalar b = Scalar(a.series.imag());
  const Scalar bsh = Scalar(a.half_shunt);
  const Scalar t = v.va(near) - v.va(far);
  const Scalar c = cos(t);
  const Scalar s = sin(t);
  const Scalar vn = v.vm(near);
  const Scalar vf = v.vm(far);
  p_row.setZero();
  q_row.setZero();
  if (const int pn = net.state_position(near); pn >= 0) {
    p_row(pn) = vn * vf * (g * s - b * c);
    q_row(pn) = -vn * vf * (g * c + b * s);
    p_row(half + pn) = Scalar(2) * vn * g - vf * (g * c + b * s);
    q_row(half + pn) = Scalar(-2) * vn * (b + bsh) - vf * (g * s - b * c);
  }
  if (const int pf = net.state_position(far); pf >= 0) {
    p_row(pf) = -vn * vf * (g * s - b * c);
    q_row(pf) = vn * vf * (g * c + b * s);
    p_row(half + pf) = -vn * (g * c + b * s);
    q_row(half + pf) = -vn * (g * s - b * c);
  }
}

}  // namespace dsse
