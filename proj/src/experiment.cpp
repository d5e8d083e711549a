#include "dsse/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "dsse/rng.hpp"

namespace dsse {

std::vector<Scenario> generate_scenarios(const Network& net, const MatrixXcd& y, int n, std::uint64_t master_seed,
                                         const PowerFlowOptions& pf) {
  if (n <= 0) throw ValidationError("scenario count must be positive");
  std::vector<Scenario> out;
  out.reserve(n);
  const std::uint64_t budget = 10ULL * static_cast<std::uint64_t>(n);
  for (std::uint64_t draw = 0; static_cast<int>(out.size()) < n; ++draw) {
    if (draw >= budget)
      throw ConvergenceError("power flow failed for too many load draws (" + std::to_string(budget) + ")",
                             static_cast<double>(out.size()));
    Rng rng = make_stream(master_seed, StreamTag::load_scale, {draw});
    const double lambda = uniform(rng, 0.5, 1.5);
    const PowerFlowSolution sol = solve_power_flow(net, y, lambda, pf);
    if (!sol.converged) continue;
    out.push_back({static_cast<int>(out.size()), lambda, sol.state});
  }
  return out;
}

int SweepResult::failed_cells() const {
  return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](const Cell& c) { return !c.ok; }));
}

Cell run_cell(const Network& net, const MatrixXcd& y, const MeasurementPlan& plan, const Variant& variant,
              const NoiseShape& shape, const Scenario& scenario, const SweepOptions& opts) {
  Cell cell;
  try {
    const VectorXd z_true = evaluate_h<double>(net, y, plan, scenario.x_star);
    const VectorXd sigmas = measurement_sigmas(plan, z_true, variant.spec.sigma_pct);
    const auto library = build_noise_library(plan, z_true, sigmas, shape);
    const VectorXd z = sample_measurements(plan, library, {opts.master_seed, static_cast<std::uint64_t>(scenario.id)});
    const VectorXd w = build_weights(plan, sigmas);

    const EstimationResult est = estimate(net, y, plan, z, w, flat_start(net), opts.wls);
    cell.wls_iterations = est.iterations;
    if (!est.converged) {
      cell.error = "WLS did not converge in " + std::to_string(est.iterations) + " iterations";
      return cell;
    }
    cell.x_hat = est.x_hat.cast<double>();
    cell.report = crb_ratio(est.jacobian.cast<double>(), w, build_true_weights(plan, library));
    cell.report.variant_id = variant.id;
    cell.report.scenario_id = scenario.id;
    cell.report.lambda = scenario.lambda;
    cell.ok = true;
  } catch (const Error& e) {
    cell.error = e.what();
  }
  return cell;
}

SweepResult run_crb_sweep(const Network& net, const MatrixXcd& y, const MeasurementPlan& plan,
                          const std::vector<Variant>& variants, const std::vector<Scenario>& scenarios,
                          const SweepOptions& opts) {
  SweepResult res{variants, scenarios, {}};
  std::vector<NoiseShape> shapes;
  shapes.reserve(variants.size());
  for (const Variant& v : variants) shapes.push_back(make_shape(v.spec));

  const std::size_t total = variants.size() * scenarios.size();
  res.cells.resize(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const std::size_t vi = k / scenarios.size();
      const std::size_t si = k % scenarios.size();
      res.cells[k] = run_cell(net, y, plan, variants[vi], shapes[vi], scenarios[si], opts);
      if (!res.cells[k].ok)
        res.cells[k].error = variants[vi].id + " / scenario " + std::to_string(scenarios[si].id) + ": " +
                             res.cells[k].error;
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n_threads = std::min<std::size_t>(opts.threads > 0 ? opts.threads : hw, std::max<std::size_t>(total, 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  return res;
}

double coverage_quantile(double level) {
  if (level == 0.68) return 1.0;
  if (level == 0.95) return 1.96;
  throw ValidationError("coverage level must be 0.68 or 0.95");
}

std::vector<CoverageRow> empirical_coverage(const SweepResult& sweep, const std::vector<double>& levels) {
  std::vector<CoverageRow> rows;
  for (std::size_t vi = 0; vi < sweep.variants.size(); ++vi) {
    for (double level : levels) {
      const double zq = coverage_quantile(level);
      CoverageRow row{sweep.variants[vi].id, level};
      long hits_wls = 0, hits_true = 0, pairs = 0;
      for (std::size_t si = 0; si < sweep.scenarios.size(); ++si) {
        const Cell& c = sweep.cell(vi, si);
        if (!c.ok) continue;
        ++row.n_scenarios;
        const auto truth = magnitudes(sweep.scenarios[si].x_star);
        const auto est = magnitudes(c.x_hat);
        const Eigen::Index half = truth.size();
        for (Eigen::Index k = 0; k < half; ++k) {
          const double err = std::abs(truth(k) - est(k));
          hits_wls += err < zq * std::sqrt(c.report.assumed_var(half + k)) ? 1 : 0;
          hits_true += err < zq * std::sqrt(c.report.true_var(half + k)) ? 1 : 0;
          ++pairs;
        }
      }
      if (pairs > 0) {
        row.cov_wls = static_cast<double>(hits_wls) / static_cast<double>(pairs);
        row.cov_true = static_cast<double>(hits_true) / static_cast<double>(pairs);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

double rmse_vmag(const VectorXd& x_hat, const VectorXd& x_star) {
  const VectorXd d = magnitudes(x_hat) - magnitudes(x_star);
  return std::sqrt(d.squaredNorm() / static_cast<double>(d.size()));
}

std::vector<RmseRow> rmse_summary(const SweepResult& sweep) {
  std::vector<RmseRow> rows;
  for (std::size_t vi = 0; vi < sweep.variants.size(); ++vi) {
    for (std::size_t si = 0; si < sweep.scenarios.size(); ++si) {
      const Cell& c = sweep.cell(vi, si);
      if (!c.ok) continue;
      const Scenario& s = sweep.scenarios[si];
      rows.push_back({sweep.variants[vi].id, s.id, s.lambda, rmse_vmag(c.x_hat, s.x_star)});
    }
  }
  return rows;
}

}  // namespace dsse
