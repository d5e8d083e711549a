#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <algorithm>
#include <set>

#include "dsse/measurement.hpp"
#include "dsse/power_equations.hpp"
#include "dsse/rng.hpp"
#include "support.hpp"

using namespace dsse;

namespace {

using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

MeasurementDescriptor flow(MeasurementKind k, int branch, BranchEnd end) {
  MeasurementDescriptor d;
  d.kind = k;
  d.branch = branch;
  d.end = end;
  d.sigma_pct = 0.01;
  return d;
}

MeasurementDescriptor at_bus(MeasurementKind k, int bus) {
  MeasurementDescriptor d;
  d.kind = k;
  d.bus = bus;
  d.sigma_pct = 0.01;
  return d;
}

// every kind at every bus and every in-service branch end
MeasurementPlan exhaustive_plan(const Network& net) {
  MeasurementPlan plan;
  for (const Bus& b : net.buses())
    for (auto k : {MeasurementKind::v_mag, MeasurementKind::p_injection, MeasurementKind::q_injection})
      plan.descriptors.push_back(at_bus(k, b.id));
  for (int i = 0; i < static_cast<int>(net.branches().size()); ++i) {
    if (!net.branches()[i].in_service) continue;
    for (auto end : {BranchEnd::from, BranchEnd::to})
      for (auto k : {MeasurementKind::p_flow, MeasurementKind::q_flow}) plan.descriptors.push_back(flow(k, i, end));
  }
  return plan;
}

}  // namespace

TEST(Measurement, DefaultPlanComposition) {
  const MeasurementPlan& plan = test::fixture_plan();
  EXPECT_EQ(plan.count(MeasurementSource::real), 17);
  EXPECT_EQ(plan.count(MeasurementSource::pseudo), 20);
  EXPECT_EQ(plan.size(), 37);
  std::set<int> pseudo_buses;
  for (const auto& d : plan.descriptors) {
    if (d.source == MeasurementSource::pseudo) pseudo_buses.insert(d.bus);
    if (d.source == MeasurementSource::real) {
      EXPECT_EQ(d.distribution, "gaussian");
      if (d.kind == MeasurementKind::v_mag) {
        EXPECT_GE(d.sigma_pct, 0.005);
        EXPECT_LT(d.sigma_pct, 0.02);
      } else {
        EXPECT_GE(d.sigma_pct, 0.01);
        EXPECT_LT(d.sigma_pct, 0.05);
      }
    }
    if (d.source == MeasurementSource::pseudo && d.bus == 2) {
      ASSERT_TRUE(d.sigma_abs.has_value());
      EXPECT_DOUBLE_EQ(*d.sigma_abs, 0.01);
    }
  }
  EXPECT_EQ(pseudo_buses, (std::set<int>{1, 2, 4, 5, 6, 7, 9, 10, 12, 14}));
}

TEST(Measurement, PlanDependsOnlyOnSensorSeed) {
  const auto a = plan_to_json(default_plan(test::fixture(), 7));
  EXPECT_EQ(a, plan_to_json(default_plan(test::fixture(), 7)));
  EXPECT_NE(a, plan_to_json(default_plan(test::fixture(), 8)));
}

TEST(Measurement, PlanRoundTripKeepsOrder) {
  const MeasurementPlan& plan = test::fixture_plan();
  const MeasurementPlan again = parse_plan(plan_to_json(plan));
  ASSERT_EQ(again.size(), plan.size());
  EXPECT_EQ(plan_to_json(again), plan_to_json(plan));
  const VectorXd x = solve_power_flow(test::fixture(), test::fixture_ybus(), 1.0).state;
  EXPECT_EQ(evaluate_h<double>(test::fixture(), test::fixture_ybus(), again, x),
            evaluate_h<double>(test::fixture(), test::fixture_ybus(), plan, x));
}

TEST(Measurement, FlatStartRank) {
  const MatrixXd h = evaluate_jacobian<double>(test::fixture(), test::fixture_ybus(), test::fixture_plan(),
                                               flat_start(test::fixture()));
  Eigen::JacobiSVD<MatrixXd> svd(h);
  EXPECT_EQ(svd.rank(), 28);
}

TEST(Measurement, HAtPowerFlowReproducesLoads) {
  const Network& net = test::fixture();
  const PowerFlowSolution sol = solve_power_flow(net, test::fixture_ybus(), 1.2);
  const MeasurementPlan plan = exhaustive_plan(net);
  const VectorXd h = evaluate_h<double>(net, test::fixture_ybus(), plan, sol.state);
  for (int i = 0; i < plan.size(); ++i) {
    const auto& d = plan.descriptors[i];
    if (d.bus < 0 || d.bus == 0) continue;
    const Bus& b = net.buses()[net.require_index(d.bus)];
    if (d.kind == MeasurementKind::p_injection) EXPECT_NEAR(h(i), -1.2 * b.p_load_mw, 1e-8);
    if (d.kind == MeasurementKind::q_injection) EXPECT_NEAR(h(i), -1.2 * b.q_load_mvar, 1e-8);
    if (d.kind == MeasurementKind::v_mag)
      EXPECT_EQ(h(i), sol.state(net.bus_count() - 1 + net.state_position(net.require_index(d.bus))));
  }
}

// tests/oracles/two_bus_power_flow.py
TEST(Measurement, TwoBusSlackFlowIncludesLosses) {
  const Network net = test::two_bus(10.0, 5.0);
  const MatrixXcd y = build_ybus(net);
  const VectorXd x = solve_power_flow(net, y, 1.0).state;
  MeasurementPlan plan;
  plan.descriptors = {flow(MeasurementKind::p_flow, 0, BranchEnd::from), flow(MeasurementKind::q_flow, 0, BranchEnd::from),
                      flow(MeasurementKind::p_flow, 0, BranchEnd::to)};
  const VectorXd h = evaluate_h<double>(net, y, plan, x);
  EXPECT_NEAR(h(0), 12.155354594472638723, 1e-7);
  EXPECT_NEAR(h(1), 8.2330318917089580846, 1e-7);
  EXPECT_NEAR(h(0) + h(2), 2.155354594472638723, 1e-7);
}

TEST(Measurement, JacobianMatchesFiniteDifferences) {
  const Network& net = test::fixture();
  const MatrixXcd& y = test::fixture_ybus();
  const MeasurementPlan plan = exhaustive_plan(net);
  Rng rng = make_stream(99, StreamTag::load_scale, {12345});
  const int n = net.state_dimension(), half = n / 2;
  const long double step = 1e-6L;
  for (int trial = 0; trial < 10; ++trial) {
    VectorXd x = flat_start(net);
    for (int k = 0; k < half; ++k) {
      x(k) += uniform(rng, -0.2, 0.2);
      x(half + k) += uniform(rng, -0.1, 0.1);
    }
    const MatrixXd jac = evaluate_jacobian<double>(net, y, plan, x);
    const VectorXld xl = x.cast<long double>();
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
      VectorXld xp = xl, xm = xl;
      xp(k) += step;
      xm(k) -= step;
      const VectorXld fd = (evaluate_h<long double>(net, y, plan, xp) - evaluate_h<long double>(net, y, plan, xm)) /
                           (2.0L * step);
      for (int i = 0; i < plan.size(); ++i) {
        const double a = jac(i, k), b = static_cast<double>(fd(i));
        worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}));
      }
    }
    EXPECT_LT(worst, 1e-6) << "trial " << trial;
  }
}

TEST(Measurement, VoltageRowSelectsColumn) {
  const Network& net = test::fixture();
  MeasurementPlan plan;
  plan.descriptors = {at_bus(MeasurementKind::v_mag, 9)};
  const MatrixXd h = evaluate_jacobian<double>(net, test::fixture_ybus(), plan, flat_start(net));
  const int col = net.bus_count() - 1 + net.state_position(net.require_index(9));
  EXPECT_EQ(h(0, col), 1.0);
  EXPECT_EQ(h.cwiseAbs().sum(), 1.0);
}

TEST(Measurement, SigmasAndFloor) {
  const MeasurementPlan& plan = test::fixture_plan();
  VectorXd z = VectorXd::Ones(plan.size());
  z(0) = 0.0;
  const VectorXd s = measurement_sigmas(plan, z, 0.2);
  EXPECT_EQ(s(0), kSigmaFloor);
  for (int i = 1; i < plan.size(); ++i) {
    const auto& d = plan.descriptors[i];
    if (d.sigma_abs)
      EXPECT_EQ(s(i), *d.sigma_abs);
    else if (d.source == MeasurementSource::pseudo)
      EXPECT_EQ(s(i), 0.2);
    else
      EXPECT_EQ(s(i), d.sigma_pct);
  }
}

TEST(Measurement, ZeroSpreadSamplesTruth) {
  const MeasurementPlan& plan = test::fixture_plan();
  const VectorXd z_true = VectorXd::LinSpaced(plan.size(), -1.0, 1.0);
  const VectorXd sig = VectorXd::Zero(plan.size());
  const auto lib = build_noise_library(plan, z_true, sig, make_shape({Family::gaussian, 0.2}));
  EXPECT_EQ(sample_measurements(plan, lib, {1, 2}), z_true);
}

TEST(Measurement, ValidationRejectsBadPlans) {
  const Network& net = test::fixture();
  MeasurementPlan plan;
  plan.descriptors = {at_bus(MeasurementKind::v_mag, 99)};
  EXPECT_THROW(validate_plan(net, plan), ValidationError);
  plan.descriptors = {flow(MeasurementKind::p_flow, 14, BranchEnd::from)};  // open switch
  EXPECT_THROW(validate_plan(net, plan), ValidationError);
  plan.descriptors = {at_bus(MeasurementKind::v_mag, 3)};
  plan.descriptors[0].sigma_pct = 0.0;
  EXPECT_THROW(validate_plan(net, plan), ValidationError);
  EXPECT_THROW(parse_plan("[{\"kind\": \"current\"}]"), ParseError);
}
