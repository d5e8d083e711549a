#include <gtest/gtest.h>

#include <Eigen/Cholesky>

#include "dsse/experiment.hpp"
#include "dsse/wls.hpp"
#include "support.hpp"

using namespace dsse;

namespace {

struct Noisy {
  VectorXd x_star, z, w;
};

Noisy noisy_case(const Variant& v, std::uint64_t scenario) {
  const Network& net = test::fixture();
  const MeasurementPlan& plan = test::fixture_plan();
  Noisy c;
  c.x_star = solve_power_flow(net, test::fixture_ybus(), 0.9).state;
  const VectorXd z_true = evaluate_h<double>(net, test::fixture_ybus(), plan, c.x_star);
  const VectorXd sig = measurement_sigmas(plan, z_true, v.spec.sigma_pct);
  const auto lib = build_noise_library(plan, z_true, sig, make_shape(v.spec));
  c.z = sample_measurements(plan, lib, {42, scenario});
  c.w = build_weights(plan, sig);
  return c;
}

}  // namespace

// A = [1 0; 0 1; 1 1], W = diag(1, 2, 4), z = (1, 2, 4): normal equations
// [5 4; 4 6] x = [17; 20] give x = (11/7, 16/7).
TEST(Wls, LinearToyClosedForm) {
  MatrixXd a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  const VectorXd w = (VectorXd(3) << 1, 2, 4).finished();
  const VectorXd z = (VectorXd(3) << 1, 2, 4).finished();
  const auto r = solve_wls(LinearModel(a), z, w, VectorXd::Zero(2));
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.x_hat(0), 11.0 / 7.0, 1e-12);
  EXPECT_NEAR(r.x_hat(1), 16.0 / 7.0, 1e-12);
  EXPECT_NEAR(r.gain(0, 0), 5.0, 1e-15);
  EXPECT_NEAR(r.gain(0, 1), 4.0, 1e-15);
  EXPECT_NEAR(r.gain(1, 1), 6.0, 1e-15);
}

TEST(Wls, NoiseFreeRecovery) {
  const Network& net = test::fixture();
  const MeasurementPlan& plan = test::fixture_plan();
  for (double lambda : {0.5, 1.0, 1.5}) {
    const VectorXd x_star = solve_power_flow(net, test::fixture_ybus(), lambda).state;
    const VectorXd z = evaluate_h<double>(net, test::fixture_ybus(), plan, x_star);
    const VectorXd w = build_weights(plan, measurement_sigmas(plan, z, 0.2));
    const EstimationResult r = estimate(net, test::fixture_ybus(), plan, z, w, flat_start(net));
    ASSERT_TRUE(r.converged);
    EXPECT_LT((r.x_hat.cast<double>() - x_star).lpNorm<Eigen::Infinity>(), 1e-8) << lambda;
  }
}

TEST(Wls, StationarityDescentAndSpdGain) {
  const Network& net = test::fixture();
  const MeasurementPlan& plan = test::fixture_plan();
  const NetworkModel model(net, test::fixture_ybus(), plan);
  for (const Variant& v : standard_variants()) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const Noisy c = noisy_case(v, s);
      const EstimationResult r = solve_wls<long double>(model, c.z, c.w, flat_start(net));
      ASSERT_TRUE(r.converged) << v.id;
      EXPECT_LT(r.final_step_norm, 1e-8);
      EXPECT_LT(wls_stationarity(model, c.z, c.w, r.x_hat), 1e-6) << v.id;
      EXPECT_LT(r.final_gradient_norm, 1e-6);
      for (std::size_t k = 1; k < r.objective_trace.size(); ++k)
        EXPECT_LE(r.objective_trace[k], r.objective_trace[k - 1] * (1 + 1e-12)) << v.id << " iter " << k;
      const MatrixXd g = r.gain.cast<double>();
      EXPECT_LT((g - g.transpose()).cwiseAbs().maxCoeff(), 1e-9 * g.cwiseAbs().maxCoeff());
      EXPECT_EQ(Eigen::LLT<MatrixXd>(g).info(), Eigen::Success);
    }
  }
}

TEST(Wls, DoublePrecisionHitsRoundingFloor) {
  // with x stored in double the gradient cannot get below ~1e-5 on this plan
  const Network& net = test::fixture();
  const Noisy c = noisy_case(standard_variants()[0], 0);
  const NetworkModel model(net, test::fixture_ybus(), test::fixture_plan());
  WlsOptions loose;
  loose.gradient_tol = 1e-3;
  const auto d = solve_wls<double>(model, c.z, c.w, flat_start(net), loose);
  ASSERT_TRUE(d.converged);
  const auto e = solve_wls<long double>(model, c.z, c.w, flat_start(net));
  ASSERT_TRUE(e.converged);
  EXPECT_LT((d.x_hat - e.x_hat.cast<double>()).lpNorm<Eigen::Infinity>(), 1e-10);
  EXPECT_LT(e.final_gradient_norm, 1e-6);
}

TEST(Wls, DampingReachesSameEstimate) {
  const Network& net = test::fixture();
  const Noisy c = noisy_case(standard_variants()[4], 3);
  WlsOptions damped;
  damped.damping = true;
  const auto a = estimate(net, test::fixture_ybus(), test::fixture_plan(), c.z, c.w, flat_start(net));
  const auto b = estimate(net, test::fixture_ybus(), test::fixture_plan(), c.z, c.w, flat_start(net), damped);
  ASSERT_TRUE(b.converged);
  EXPECT_LT(static_cast<double>((a.x_hat - b.x_hat).lpNorm<Eigen::Infinity>()), 1e-8);
}

TEST(Wls, UnobservablePlanThrows) {
  const Network& net = test::fixture();
  MeasurementPlan plan;
  for (const Bus& b : net.buses()) {
    MeasurementDescriptor d;
    d.kind = MeasurementKind::v_mag;
    d.bus = b.id;
    d.sigma_pct = 0.01;
    plan.descriptors.push_back(d);
  }
  const VectorXd z = VectorXd::Ones(plan.size());
  const VectorXd w = VectorXd::Constant(plan.size(), 1e4);
  try {
    estimate(net, test::fixture_ybus(), plan, z, w, flat_start(net));
    FAIL() << "expected ObservabilityError";
  } catch (const ObservabilityError& e) {
    EXPECT_EQ(e.required(), 28);
    EXPECT_EQ(e.rank(), 14);
  }
  EXPECT_EQ(flat_start_rank(net, test::fixture_ybus(), plan), 14);
}

TEST(Wls, IterationLimitReportsNonConvergence) {
  const Noisy c = noisy_case(standard_variants()[1], 0);
  WlsOptions o;
  o.max_iter = 1;
  const auto r = estimate(test::fixture(), test::fixture_ybus(), test::fixture_plan(), c.z, c.w,
                          flat_start(test::fixture()), o);
  EXPECT_FALSE(r.converged);
}

TEST(Wls, RejectsBadWeights) {
  MatrixXd a = MatrixXd::Identity(2, 2);
  EXPECT_THROW(solve_wls(LinearModel(a), VectorXd::Ones(2), VectorXd::Ones(3), VectorXd::Zero(2)), ValidationError);
  EXPECT_THROW(solve_wls(LinearModel(a), VectorXd::Ones(2), VectorXd::Zero(2), VectorXd::Zero(2)), ValidationError);
}

TEST(Wls, GaussianBaselineUnbiased) {
  const Network& net = test::fixture();
  const auto scenarios = generate_scenarios(net, test::fixture_ybus(), 1000, 42);
  SweepOptions o;
  const SweepResult r = run_crb_sweep(net, test::fixture_ybus(), test::fixture_plan(),
                                      {standard_variants()[1]}, scenarios, o);
  ASSERT_EQ(r.failed_cells(), 0);
  const int half = net.bus_count() - 1;
  for (int k = 0; k < half; ++k) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      const double e = r.cell(0, s).x_hat(half + k) - scenarios[s].x_star(half + k);
      sum += e;
      sq += e * e;
    }
    const double n = static_cast<double>(scenarios.size());
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    EXPECT_LT(std::abs(mean), 3 * se) << "bus " << net.buses()[net.bus_at_state_position(k)].id;
  }
}
