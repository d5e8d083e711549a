// dsse-crb: pseudo-measurement distribution sensitivity of WLS state
// estimation bounds.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dsse/noise.hpp"
#include "dsse/pipeline.hpp"
#include "dsse/power_flow.hpp"
#include "dsse/report.hpp"

#ifndef DSSE_DEFAULT_NETWORK
#define DSSE_DEFAULT_NETWORK "data/cigre_mv.json"
#endif

namespace {

using namespace dsse;

constexpr int kExitFailedCells = 1;
constexpr int kExitUsage = 2;

std::string default_output_dir() {
  if (const char* env = std::getenv("DSSE_OUT_DIR"); env && *env) return env;
  return ".";
}

struct SweepArgs {
  std::string config;
  std::string network;
  std::string plan;
  std::string variants;
  int scenarios = 0;
  int coverage_scenarios = 0;
  std::uint64_t seed = 0;
  std::uint64_t sensor_seed = 0;
  double pf_tol = 0.0;
  int pf_max_iter = 0;
  double wls_tol = 0.0;
  int wls_max_iter = 0;
  bool damping = false;
  double slack_setpoint = 0.0;
  std::string out;
  int threads = 0;
};

struct FisherArgs {
  std::string family = "gaussian";
  double sigma = 1.0;
  double nu = 0.0;
  double alpha = 0.0;
  double bias = 0.0;
  double mu = 1.0;
  std::string variants;
};

int cmd_sweep(const SweepArgs& a, const CLI::App& sub) {
  RunConfig cfg;
  cfg.network = DSSE_DEFAULT_NETWORK;
  cfg.output_dir = default_output_dir();
  if (!a.config.empty()) cfg = load_run_config(a.config, cfg);
  auto given = [&](const char* name) { return sub.get_option(name)->count() > 0; };
  if (given("--network")) cfg.network = a.network;
  if (given("--plan")) cfg.plan = a.plan;
  if (given("--variants")) cfg.variants = a.variants;
  if (given("--scenarios")) cfg.n_scenarios_crb = a.scenarios;
  if (given("--coverage-scenarios")) cfg.n_scenarios_coverage = a.coverage_scenarios;
  if (given("--seed")) cfg.master_seed = a.seed;
  if (given("--sensor-seed")) cfg.sensor_seed = a.sensor_seed;
  if (given("--pf-tol")) cfg.pf_tol_mva = a.pf_tol;
  if (given("--pf-max-iter")) cfg.pf_max_iter = a.pf_max_iter;
  if (given("--wls-tol")) cfg.wls_tol = a.wls_tol;
  if (given("--wls-max-iter")) cfg.wls_max_iter = a.wls_max_iter;
  if (given("--damping")) cfg.wls_damping = a.damping;
  if (given("--slack-setpoint")) cfg.slack_setpoint = a.slack_setpoint;
  if (given("--out")) cfg.output_dir = a.out;
  if (given("--threads")) cfg.threads = a.threads;

  const SweepOutcome res = run_sweep(cfg);
  std::cout << "wrote " << res.crb_csv.string() << ", " << res.rmse_csv.string() << ", "
            << res.coverage_csv.string() << ", " << res.manifest.string() << '\n';
  if (!res.ok()) {
    std::cerr << "failed cells: crb " << res.failed_crb_cells << ", coverage " << res.failed_coverage_cells << '\n';
    for (const auto& e : res.errors) std::cerr << "  " << e << '\n';
    return kExitFailedCells;
  }
  return 0;
}

void print_fisher_row(const std::string& label, const DistributionSpec& spec, double mu, double sigma) {
  const CalibratedNoise cn = calibrate(spec, mu, sigma);
  const double f = fisher_information(cn);
  const double fq = fisher_information_quadrature(cn);
  std::string params;
  char buf[160];
  switch (spec.family) {
    case Family::gaussian:
    case Family::biased_gaussian:
      std::snprintf(buf, sizeof buf, "mean=%.6g std=%.6g", cn.mean, cn.sigma);
      break;
    case Family::student_t:
      std::snprintf(buf, sizeof buf, "nu=%.6g s=%.6g", spec.nu, cn.t_scale);
      break;
    case Family::laplace:
      std::snprintf(buf, sizeof buf, "b=%.6g", cn.laplace_b);
      break;
    case Family::skew_normal:
      std::snprintf(buf, sizeof buf, "alpha=%.6g xi=%.6g omega=%.6g mean=%.6g", spec.alpha, cn.sn_xi, cn.sn_omega,
                    cn.mean);
      break;
  }
  params = buf;
  const bool closed = spec.family != Family::skew_normal;
  std::printf("%-24s %-48s sigma=%-10.6g F_closed=%-12s F_quad=%-14.10g F*sigma^2=%.10g\n", label.c_str(),
              params.c_str(), sigma, closed ? format_double(f).c_str() : "n/a", fq, f * sigma * sigma);
}

int cmd_fisher(const FisherArgs& a) {
  if (!a.variants.empty()) {
    const auto variants = a.variants == "standard"          ? standard_variants()
                          : a.variants == "gaussian-only" ? gaussian_only_variants()
                                                          : load_variants(a.variants);
    for (const Variant& v : variants) print_fisher_row(v.id, v.spec, a.mu, v.spec.sigma_pct * std::abs(a.mu));
    return 0;
  }
  if (!(a.sigma > 0.0)) throw ValidationError("--sigma must be positive");
  DistributionSpec spec;
  spec.family = parse_family(a.family);
  spec.sigma_pct = a.mu != 0.0 ? a.sigma / std::abs(a.mu) : 1.0;
  spec.nu = a.nu;
  spec.alpha = a.alpha;
  spec.bias_pct = a.bias;
  print_fisher_row(std::string(to_string(spec.family)), spec, a.mu, a.sigma);
  return 0;
}

int cmd_plan(const std::string& network, std::uint64_t sensor_seed, const std::string& out) {
  const Network net = load_network(network);
  const std::string text = plan_to_json(default_plan(net, sensor_seed)) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) throw Error("cannot write " + out);
    f << text;
  }
  return 0;
}

int cmd_powerflow(const std::string& network, double lambda, double tol, int max_iter) {
  const Network net = load_network(network);
  const PowerFlowSolution sol = solve_power_flow(net, build_ybus(net), lambda, {tol, max_iter});
  std::printf("converged=%s iterations=%d max_mismatch_mva=%.3e\n", sol.converged ? "true" : "false",
              sol.iterations, sol.max_mismatch_mva);
  std::printf("%6s %14s %14s\n", "bus", "vmag_pu", "theta_deg");
  const int half = net.bus_count() - 1;
  for (int i = 0; i < net.bus_count(); ++i) {
    const int pos = net.state_position(i);
    const double vm = pos < 0 ? net.buses()[i].v_setpoint : sol.state(half + pos);
    const double va = pos < 0 ? 0.0 : sol.state(pos);
    std::printf("%6d %14.10f %14.8f\n", net.buses()[i].id, vm, va * 180.0 / M_PI);
  }
  return sol.converged ? 0 : kExitFailedCells;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensitivity of WLS state-estimation uncertainty bounds to pseudo-measurement distributions",
               "dsse-crb"};
  app.require_subcommand(1);

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Run the CRB-ratio, coverage and RMSE study and write CSV reports");
  sweep->add_option("--config", sw.config, "JSON run configuration; flags override its values");
  sweep->add_option("--network", sw.network, "Network file (default: bundled CIGRE MV fixture)");
  sweep->add_option("--plan", sw.plan, "'default' or a measurement plan file");
  sweep->add_option("--variants", sw.variants, "'standard', 'gaussian-only' or a variant grid file");
  sweep->add_option("--scenarios", sw.scenarios, "Scenarios for the CRB and RMSE sweep (default 100)");
  sweep->add_option("--coverage-scenarios", sw.coverage_scenarios, "Scenarios for empirical coverage (default 1000)");
  sweep->add_option("--seed", sw.seed, "Master seed (default 42)");
  sweep->add_option("--sensor-seed", sw.sensor_seed, "Seed of the real-sensor accuracy draw (default 7)");
  sweep->add_option("--pf-tol", sw.pf_tol, "Power-flow mismatch tolerance in MVA (default 1e-8)");
  sweep->add_option("--pf-max-iter", sw.pf_max_iter, "Power-flow iteration limit (default 30)");
  sweep->add_option("--wls-tol", sw.wls_tol, "WLS step tolerance, infinity norm (default 1e-8)");
  sweep->add_option("--wls-max-iter", sw.wls_max_iter, "WLS iteration limit (default 50)");
  sweep->add_flag("--damping", sw.damping, "Halve WLS steps that increase the objective");
  sweep->add_option("--slack-setpoint", sw.slack_setpoint, "Override the slack voltage setpoint in p.u.");
  sweep->add_option("--out", sw.out, "Output directory (default: $DSSE_OUT_DIR or .)");
  sweep->add_option("--threads", sw.threads, "Worker threads (default: hardware concurrency)");

  FisherArgs fa;
  auto* fisher = app.add_subcommand("fisher", "Print calibrated parameters and Fisher information of a noise law");
  fisher->add_option("--family", fa.family, "gaussian, student-t, laplace, skew-normal or biased-gaussian");
  fisher->add_option("--sigma", fa.sigma, "Absolute spread (standard deviation)");
  fisher->add_option("--nu", fa.nu, "Student-t degrees of freedom (> 2)");
  fisher->add_option("--alpha", fa.alpha, "Skew-normal shape");
  fisher->add_option("--bias", fa.bias, "Biased-Gaussian mean shift as a fraction of mu");
  fisher->add_option("--mu", fa.mu, "True value the law is centred on (default 1)");
  fisher->add_option("--variants", fa.variants, "Print every row of a grid: 'standard', 'gaussian-only' or a file");

  std::string plan_network = DSSE_DEFAULT_NETWORK, plan_out;
  std::uint64_t plan_seed = 7;
  auto* plan = app.add_subcommand("plan", "Dump the default measurement plan as JSON");
  plan->add_option("--network", plan_network, "Network file (default: bundled CIGRE MV fixture)");
  plan->add_option("--sensor-seed", plan_seed, "Seed of the real-sensor accuracy draw (default 7)");
  plan->add_option("--out", plan_out, "Output file (default: stdout)");

  std::string pf_network = DSSE_DEFAULT_NETWORK;
  double pf_lambda = 1.0, pf_tol = 1e-8;
  int pf_iter = 30;
  auto* pf = app.add_subcommand("powerflow", "Solve one power flow and print bus voltages");
  pf->add_option("--network", pf_network, "Network file (default: bundled CIGRE MV fixture)");
  pf->add_option("--lambda", pf_lambda, "Load scaling factor (default 1)");
  pf->add_option("--pf-tol", pf_tol, "Mismatch tolerance in MVA (default 1e-8)");
  pf->add_option("--pf-max-iter", pf_iter, "Iteration limit (default 30)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) return cmd_sweep(sw, *sweep);
    if (*fisher) return cmd_fisher(fa);
    if (*plan) return cmd_plan(plan_network, plan_seed, plan_out);
    if (*pf) return cmd_powerflow(pf_network, pf_lambda, pf_tol, pf_iter);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
