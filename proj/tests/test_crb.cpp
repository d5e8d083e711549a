#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "dsse/crb.hpp"
#include "dsse/experiment.hpp"
#include "dsse/rng.hpp"
#include "support.hpp"

using namespace dsse;

namespace {

struct Prepared {
  MeasurementPlan plan;
  MatrixXd h;
  VectorXd w;
  std::vector<CalibratedNoise> lib;
};

Prepared prepare(const DistributionSpec& spec, double lambda = 1.0) {
  const Network& net = test::fixture();
  Prepared p;
  p.plan = test::fixture_plan();
  const VectorXd x = solve_power_flow(net, test::fixture_ybus(), lambda).state;
  const VectorXd z_true = evaluate_h<double>(net, test::fixture_ybus(), p.plan, x);
  const VectorXd sig = measurement_sigmas(p.plan, z_true, spec.sigma_pct);
  p.lib = build_noise_library(p.plan, z_true, sig, make_shape(spec));
  p.w = build_weights(p.plan, sig);
  p.h = evaluate_jacobian<double>(net, test::fixture_ybus(), p.plan, x);
  return p;
}

}  // namespace

TEST(Crb, GaussianRatioIsOne) {
  for (double s : {0.1, 0.2, 0.3}) {
    const Prepared p = prepare({Family::gaussian, s});
    const VectorXd wt = build_true_weights(p.plan, p.lib);
    EXPECT_EQ(wt, p.w);
    const CrbReport r = crb_ratio(p.h, p.w, wt);
    EXPECT_LT((r.rho.array() - 1.0).abs().maxCoeff(), 1e-10);
  }
}

TEST(Crb, TrueWeightEntries) {
  const Prepared p = prepare({Family::laplace, 0.2});
  const VectorXd wt = build_true_weights(p.plan, p.lib);
  for (int i = 0; i < p.plan.size(); ++i) {
    const auto& d = p.plan.descriptors[i];
    if (d.follows_variant())
      EXPECT_NEAR(wt(i) / p.w(i), 2.0, 1e-12);
    else
      EXPECT_EQ(wt(i), p.w(i));
  }
  const CalibratedNoise one = calibrate(DistributionSpec{Family::laplace, 0.2}, 1.0);
  EXPECT_NEAR(fisher_information(one), 50.0, 1e-12);
}

TEST(Crb, DoubledWeightsHalveVariance) {
  MatrixXd a(4, 2);
  a << 1, 0, 0, 1, 1, 1, 1, -1;
  const VectorXd w = (VectorXd(4) << 1, 3, 0.5, 2).finished();
  const CrbReport r = crb_ratio(a, w, 2 * w);
  EXPECT_LT((r.rho.array() - 0.5).abs().maxCoeff(), 1e-14);
}

TEST(Crb, ReorderingInvariance) {
  const Prepared p = prepare({Family::student_t, 0.2, 3.0});
  const VectorXd wt = build_true_weights(p.plan, p.lib);
  const CrbReport base = crb_ratio(p.h, p.w, wt);
  std::vector<int> perm(p.plan.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = make_stream(5, StreamTag::sensor_accuracy, {77});
  std::shuffle(perm.begin(), perm.end(), rng);
  MatrixXd h2(p.h.rows(), p.h.cols());
  VectorXd w2(p.w.size()), wt2(p.w.size());
  for (int i = 0; i < p.plan.size(); ++i) {
    h2.row(i) = p.h.row(perm[i]);
    w2(i) = p.w(perm[i]);
    wt2(i) = wt(perm[i]);
  }
  const CrbReport again = crb_ratio(h2, w2, wt2);
  EXPECT_LT(((again.rho - base.rho).array() / base.rho.array()).abs().maxCoeff(), 1e-9);
}

TEST(Crb, BiasDoesNotChangeRatio) {
  const Prepared a = prepare({Family::gaussian, 0.2});
  for (double bias : {-0.3, 0.1, 0.3}) {
    const Prepared b = prepare({Family::biased_gaussian, 0.2, 0.0, 0.0, bias});
    EXPECT_EQ(build_true_weights(b.plan, b.lib), build_true_weights(a.plan, a.lib));
    const CrbReport ra = crb_ratio(a.h, a.w, build_true_weights(a.plan, a.lib));
    const CrbReport rb = crb_ratio(b.h, b.w, build_true_weights(b.plan, b.lib));
    EXPECT_EQ(ra.rho, rb.rho);
  }
}

TEST(Crb, LoewnerMonotonicity) {
  Rng rng = make_stream(3, StreamTag::sensor_accuracy, {1});
  for (const Variant& v : standard_variants()) {
    const Prepared p = prepare(v.spec, uniform(rng, 0.5, 1.5));
    const VectorXd wt = build_true_weights(p.plan, p.lib);
    ASSERT_TRUE(((wt - p.w).array() >= 0.0).all()) << v.id;
    const CrbReport r = crb_ratio(p.h, p.w, wt);
    EXPECT_LE(r.rho.maxCoeff(), 1.0 + 1e-12) << v.id;
  }
  // random dominating weights on a random tall matrix
  for (int trial = 0; trial < 20; ++trial) {
    MatrixXd a(8, 3);
    VectorXd w(8), extra(8);
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 3; ++j) a(i, j) = uniform(rng, -1, 1);
      w(i) = uniform(rng, 0.1, 2);
      extra(i) = uniform(rng, 0, 3);
    }
    EXPECT_LE(crb_ratio(a, w, w + extra).rho.maxCoeff(), 1.0 + 1e-12);
  }
}

TEST(Crb, SymmetricPositiveInverses) {
  const Prepared p = prepare({Family::skew_normal, 0.2, 0.0, 10.0}, 0.6);
  const CrbReport r = crb_ratio(p.h, p.w, build_true_weights(p.plan, p.lib));
  EXPECT_LT((r.cov_wls - r.cov_wls.transpose()).cwiseAbs().maxCoeff(), 1e-9 * r.cov_wls.cwiseAbs().maxCoeff());
  EXPECT_LT((r.cov_true - r.cov_true.transpose()).cwiseAbs().maxCoeff(), 1e-9 * r.cov_true.cwiseAbs().maxCoeff());
  EXPECT_GT(r.assumed_var.minCoeff(), 0.0);
  EXPECT_GT(r.true_var.minCoeff(), 0.0);
  EXPECT_EQ(r.magnitude_rho().size(), 14);
}

TEST(Crb, RankDeficientThrows) {
  MatrixXd a(3, 2);
  a << 1, 1, 2, 2, 3, 3;
  EXPECT_THROW(crb_ratio(a, VectorXd::Ones(3), VectorXd::Ones(3)), ObservabilityError);
}

TEST(Crb, FimGainIdentity) {
  const Network& net = test::fixture();
  const Prepared g = prepare({Family::gaussian, 0.2});
  EstimationResult est;
  est.gain = (g.h.transpose() * g.w.asDiagonal() * g.h).cast<long double>();
  const IdentityCheck ok = fim_gain_identity_check(est, build_gain_pair(g.h, g.w, build_true_weights(g.plan, g.lib)));
  EXPECT_TRUE(ok.passed);
  EXPECT_EQ(ok.max_relative_deviation, 0.0);

  const Prepared l = prepare({Family::laplace, 0.2});
  est.gain = (l.h.transpose() * l.w.asDiagonal() * l.h).cast<long double>();
  const IdentityCheck bad = fim_gain_identity_check(est, build_gain_pair(l.h, l.w, build_true_weights(l.plan, l.lib)));
  EXPECT_FALSE(bad.passed);
  EXPECT_LE(bad.max_diagonal_ratio, 2.0 + 1e-12);
  EXPECT_GT(bad.max_diagonal_ratio, 1.9);

  // every bus measured: no pseudo rows at all
  MeasurementPlan real_only;
  for (const Bus& b : net.buses()) {
    for (auto k : {MeasurementKind::v_mag, MeasurementKind::p_injection, MeasurementKind::q_injection}) {
      MeasurementDescriptor d;
      d.kind = k;
      d.bus = b.id;
      d.sigma_pct = 0.02;
      real_only.descriptors.push_back(d);
    }
  }
  const VectorXd x = solve_power_flow(net, test::fixture_ybus(), 1.0).state;
  const VectorXd z = evaluate_h<double>(net, test::fixture_ybus(), real_only, x);
  const VectorXd sig = measurement_sigmas(real_only, z, 0.2);
  const auto lib = build_noise_library(real_only, z, sig, make_shape({Family::laplace, 0.2}));
  const VectorXd w = build_weights(real_only, sig);
  const EstimationResult r = estimate(net, test::fixture_ybus(), real_only, z, w, flat_start(net));
  EXPECT_TRUE(fim_gain_identity_check(r, build_gain_pair(r.jacobian.cast<double>(), w, build_true_weights(real_only, lib))).passed);
}
