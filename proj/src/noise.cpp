#include "dsse/noise.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace dsse {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWindow = 40.0;  // core quadrature window, in standard deviations

double log_std_normal_pdf(double x) { return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// log Phi(x), accurate in the far left tail.
double log_std_normal_cdf(double x) {
  if (x > -30.0) return std::log(std_normal_cdf(x));
  return log_std_normal_pdf(x) - std::log(inverse_mills_ratio(x));
}

double standard_normal(Rng& rng) {
  // Box-Muller; one variate per call keeps every draw a pure function of the
  // stream position.
  const double u1 = 1.0 - uniform(rng, 0.0, 1.0);  // (0, 1]
  const double u2 = uniform(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// d/dw log(2 phi(w) Phi(alpha w)) for the unit skew-normal.
double sn_unit_score(double alpha, double w) { return -w + alpha * inverse_mills_ratio(alpha * w); }

double sn_unit_score_slope(double alpha, double w) {
  const double x = alpha * w;
  const double m = inverse_mills_ratio(x);
  return -1.0 - alpha * alpha * m * (x + m);
}

// Mode of the unit skew-normal: root of the score, bracketed bisection then
// Newton polish.
double sn_unit_mode(double alpha) {
  if (alpha == 0.0) return 0.0;
  double lo = alpha > 0.0 ? 0.0 : -1.0;
  double hi = alpha > 0.0 ? 1.0 : 0.0;
  if (!(sn_unit_score(alpha, lo) > 0.0 && sn_unit_score(alpha, hi) < 0.0))
    throw ConvergenceError("skew-normal mode is not bracketed for alpha=" + std::to_string(alpha), 0.5 * (lo + hi));
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (sn_unit_score(alpha, mid) > 0.0 ? lo : hi) = mid;
  }
  double w = 0.5 * (lo + hi);
  for (int i = 0; i < 5; ++i) {
    const double step = sn_unit_score(alpha, w) / sn_unit_score_slope(alpha, w);
    w -= step;
    if (std::abs(step) < 1e-16) break;
  }
  if (!(std::abs(sn_unit_score(alpha, w)) < 1e-12))
    throw ConvergenceError("skew-normal mode solve did not converge for alpha=" + std::to_string(alpha), w);
  return w;
}

double sn_delta(double alpha) { return alpha / std::sqrt(1.0 + alpha * alpha); }

double sn_unit_std(double alpha) {
  const double d = sn_delta(alpha);
  return std::sqrt(1.0 - 2.0 * d * d / std::numbers::pi);
}

// Standardized density and score with unit spread and centre at zero.
struct Standardized {
  std::function<double(double)> log_pdf;
  std::function<double(double)> score;
};

Standardized standardized(const CalibratedNoise& cn) {
  const DistributionSpec& s = cn.spec;
  switch (s.family) {
    case Family::gaussian:
    case Family::biased_gaussian:
      return {[](double u) { return log_std_normal_pdf(u); }, [](double u) { return -u; }};
    case Family::student_t: {
      const double nu = s.nu;
      const double scale = 1.0 / std::sqrt(nu / (nu - 2.0));
      const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                              0.5 * std::log(nu * std::numbers::pi) - std::log(scale);
      return {[=](double u) { return log_norm - 0.5 * (nu + 1.0) * std::log1p(u * u / (nu * scale * scale)); },
              [=](double u) { return -(nu + 1.0) * u / (nu * scale * scale + u * u); }};
    }
    case Family::laplace: {
      const double b = 1.0 / std::numbers::sqrt2;
      return {[=](double u) { return -std::abs(u) / b - std::log(2.0 * b); },
              [=](double u) { return u > 0.0 ? -1.0 / b : (u < 0.0 ? 1.0 / b : 0.0); }};
    }
    case Family::skew_normal: {
      const double alpha = s.alpha;
      const double omega = cn.sn_omega / cn.sigma;
      const double xi = (cn.sn_xi - cn.center()) / cn.sigma;
      return {[=](double u) {
                const double w = (u - xi) / omega;
                return std::log(2.0 / omega) + log_std_normal_pdf(w) + log_std_normal_cdf(alpha * w);
              },
              [=](double u) { return sn_unit_score(alpha, (u - xi) / omega) / omega; }};
    }
  }
  throw ValidationError("unknown family");
}

// F * sigma^2 by quadrature of E[score^2] in standardized coordinates.
QuadratureResult fisher_sigma2_quadrature(const CalibratedNoise& cn, const QuadratureOptions& opts) {
  const Standardized st = standardized(cn);
  auto integrand = [&](double u) {
    const double lp = st.log_pdf(u);
    if (!std::isfinite(lp)) return 0.0;
    const double sc = st.score(u);
    return sc * sc * std::exp(lp);
  };
  // The centre is a breakpoint so the Laplace kink sits on a panel edge.
  const std::array<double, 5> breaks = {-kInf, -kWindow, 0.0, kWindow, kInf};
  return integrate_piecewise(integrand, breaks, opts);
}

}  // namespace

double inverse_mills_ratio(double x) {
  if (x > -30.0) return std::exp(log_std_normal_pdf(x)) / std_normal_cdf(x);
  // Phi(x) ~ phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - 945/x^10)
  const double r = 1.0 / (x * x);
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r * (1.0 - 9.0 * r))));
  return -x / series;
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::student_t: return "student_t";
    case Family::laplace: return "laplace";
    case Family::skew_normal: return "skew_normal";
    case Family::biased_gaussian: return "biased_gaussian";
  }
  return "?";
}

Family parse_family(std::string_view s) {
  if (s == "gaussian") return Family::gaussian;
  if (s == "student_t" || s == "student-t") return Family::student_t;
  if (s == "laplace") return Family::laplace;
  if (s == "skew_normal" || s == "skew-normal") return Family::skew_normal;
  if (s == "biased_gaussian" || s == "biased-gaussian") return Family::biased_gaussian;
  throw ParseError("unknown distribution family '" + std::string(s) + "'");
}

void DistributionSpec::validate() const {
  const std::string name(to_string(family));
  if (!(sigma_pct > 0.0) || !std::isfinite(sigma_pct)) throw ValidationError(name + ": sigma_pct must be positive");
  if (family == Family::student_t) {
    if (!(nu > 2.0)) throw ValidationError("student_t: nu must exceed 2 for the variance to exist");
  } else if (nu != 0.0) {
    throw ValidationError(name + ": nu applies to student_t only");
  }
  if (family == Family::skew_normal) {
    if (!std::isfinite(alpha)) throw ValidationError("skew_normal: alpha must be finite");
  } else if (alpha != 0.0) {
    throw ValidationError(name + ": alpha applies to skew_normal only");
  }
  if (family == Family::biased_gaussian) {
    if (!std::isfinite(bias_pct)) throw ValidationError("biased_gaussian: bias_pct must be finite");
  } else if (bias_pct != 0.0) {
    throw ValidationError(name + ": bias_pct applies to biased_gaussian only");
  }
}

NoiseShape make_shape(const DistributionSpec& spec) {
  spec.validate();
  NoiseShape shape{spec};
  switch (spec.family) {
    case Family::gaussian:
    case Family::biased_gaussian:
      shape.fisher_sigma2 = 1.0;
      break;
    case Family::student_t: {
      // F = (nu + 1) / ((nu + 3) s^2) with s^2 = sigma^2 (nu - 2) / nu
      const double nu = spec.nu;
      shape.fisher_sigma2 = (nu + 1.0) * nu / ((nu + 3.0) * (nu - 2.0));
      break;
    }
    case Family::laplace:
      shape.fisher_sigma2 = 2.0;  // 1 / b^2 with b = sigma / sqrt(2)
      break;
    case Family::skew_normal: {
      shape.sn_mode = sn_unit_mode(spec.alpha);
      shape.sn_std = sn_unit_std(spec.alpha);
      // No closed form: integrate at unit spread.
      NoiseShape provisional = shape;
      provisional.fisher_sigma2 = 1.0;
      const CalibratedNoise unit = calibrate(provisional, 0.0, 1.0);
      const QuadratureResult q = fisher_sigma2_quadrature(unit, {});
      if (!q.converged)
        throw ConvergenceError("skew-normal Fisher information quadrature did not converge", q.value);
      shape.fisher_sigma2 = q.value;
      break;
    }
  }
  return shape;
}

double CalibratedNoise::center() const {
  return spec.family == Family::biased_gaussian ? mean : mu_star;
}

CalibratedNoise calibrate(const NoiseShape& shape, double mu_star, double sigma) {
  if (!std::isfinite(mu_star)) throw ValidationError("calibrate: mu* must be finite");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("calibrate: sigma must be finite and >= 0");
  CalibratedNoise cn;
  cn.spec = shape.spec;
  cn.mu_star = mu_star;
  cn.sigma = sigma;
  cn.fisher_sigma2 = shape.fisher_sigma2;
  cn.mean = mu_star;
  switch (shape.spec.family) {
    case Family::gaussian:
      break;
    case Family::biased_gaussian:
      cn.mean = mu_star * (1.0 + shape.spec.bias_pct);
      break;
    case Family::student_t:
      cn.t_scale = sigma / std::sqrt(shape.spec.nu / (shape.spec.nu - 2.0));
      break;
    case Family::laplace:
      cn.laplace_b = sigma / std::numbers::sqrt2;
      break;
    case Family::skew_normal:
      cn.sn_delta = sn_delta(shape.spec.alpha);
      cn.sn_omega = sigma / shape.sn_std;
      cn.sn_xi = mu_star - shape.sn_mode * cn.sn_omega;
      // Mean of the skew-normal; above mu* for alpha > 0.
      cn.mean = cn.sn_xi + cn.sn_omega * cn.sn_delta * std::sqrt(2.0 / std::numbers::pi);
      break;
  }
  return cn;
}

CalibratedNoise calibrate(const DistributionSpec& spec, double mu_star, double sigma) {
  return calibrate(make_shape(spec), mu_star, sigma);
}

CalibratedNoise calibrate(const DistributionSpec& spec, double mu_star) {
  if (mu_star == 0.0) throw ValidationError("calibrate: relative spread needs mu* != 0; pass sigma explicitly");
  return calibrate(spec, mu_star, spec.sigma_pct * std::abs(mu_star));
}

double sample(const CalibratedNoise& cn, Rng& rng) {
  switch (cn.spec.family) {
    case Family::gaussian:
    case Family::biased_gaussian:
      return cn.mean + cn.sigma * standard_normal(rng);
    case Family::student_t: {
      const double z = standard_normal(rng);
      std::gamma_distribution<double> chi2(0.5 * cn.spec.nu, 2.0);
      return cn.mu_star + cn.t_scale * z / std::sqrt(chi2(rng) / cn.spec.nu);
    }
    case Family::laplace: {
      double u = uniform(rng, -0.5, 0.5);
      while (u == -0.5) u = uniform(rng, -0.5, 0.5);
      const double mag = -cn.laplace_b * std::log1p(-2.0 * std::abs(u));
      return cn.mu_star + (u < 0.0 ? -mag : mag);
    }
    case Family::skew_normal: {
      const double u0 = standard_normal(rng);
      const double u1 = standard_normal(rng);
      const double d = cn.sn_delta;
      return cn.sn_xi + cn.sn_omega * (d * std::abs(u0) + std::sqrt(1.0 - d * d) * u1);
    }
  }
  return cn.mu_star;
}

double log_density(const CalibratedNoise& cn, double z) {
  return standardized(cn).log_pdf((z - cn.center()) / cn.sigma) - std::log(cn.sigma);
}

double score(const CalibratedNoise& cn, double z) {
  return standardized(cn).score((z - cn.center()) / cn.sigma) / cn.sigma;
}

double fisher_information(const CalibratedNoise& cn) {
  if (!(cn.sigma > 0.0)) throw ValidationError("fisher_information: sigma must be positive");
  return cn.fisher_sigma2 / (cn.sigma * cn.sigma);
}

double fisher_information_quadrature(const CalibratedNoise& cn, const QuadratureOptions& opts) {
  if (!(cn.sigma > 0.0)) throw ValidationError("fisher_information_quadrature: sigma must be positive");
  const QuadratureResult q = fisher_sigma2_quadrature(cn, opts);
  const double f = q.value / (cn.sigma * cn.sigma);
  if (!q.converged) throw ConvergenceError("Fisher information quadrature did not meet tolerance", f);
  return f;
}

std::vector<Variant> standard_variants() {
  std::vector<Variant> v;
  for (int s : {10, 20, 30})
    v.push_back({"gaussian_" + std::to_string(s), {Family::gaussian, s / 100.0}});
  for (int s : {10, 20, 30})
    for (int nu : {3, 4})
      v.push_back({"student_t_" + std::to_string(s) + "_" + std::to_string(nu),
                   {Family::student_t, s / 100.0, static_cast<double>(nu)}});
  for (int s : {10, 20, 30})
    v.push_back({"laplace_" + std::to_string(s), {Family::laplace, s / 100.0}});
  for (int a : {2, 5, 7, 10})
    v.push_back({"skew_normal_" + std::to_string(a), {Family::skew_normal, 0.2, 0.0, static_cast<double>(a)}});
  for (int b : {-30, -20, -10, 10, 20, 30})
    v.push_back({"biased_gaussian_" + std::string(b < 0 ? "m" : "p") + std::to_string(std::abs(b)),
                 {Family::biased_gaussian, 0.2, 0.0, 0.0, b / 100.0}});
  return v;
}

std::vector<Variant> gaussian_only_variants() {
  auto all = standard_variants();
  all.resize(3);
  return all;
}

std::vector<Variant> parse_variants(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("variant grid: ") + e.what());
  }
  if (!j.is_array()) throw ParseError("variant grid: top level must be an array");
  std::vector<Variant> out;
  try {
    for (const json& row : j) {
      Variant v;
      v.id = row.at("id").get<std::string>();
      v.spec.family = parse_family(row.at("family").get<std::string>());
      v.spec.sigma_pct = row.at("sigma_pct").get<double>();
      v.spec.nu = row.value("nu", 0.0);
      v.spec.alpha = row.value("alpha", 0.0);
      v.spec.bias_pct = row.value("bias_pct", 0.0);
      v.spec.validate();
      out.push_back(std::move(v));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("variant grid: ") + e.what());
  }
  return out;
}

std::vector<Variant> load_variants(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open variant grid " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_variants(ss.str());
}

std::string variants_to_json(const std::vector<Variant>& variants) {
  json j = json::array();
  for (const Variant& v : variants) {
    json row{{"id", v.id}, {"family", std::string(to_string(v.spec.family))}, {"sigma_pct", v.spec.sigma_pct}};
    if (v.spec.family == Family::student_t) row["nu"] = v.spec.nu;
    if (v.spec.family == Family::skew_normal) row["alpha"] = v.spec.alpha;
    if (v.spec.family == Family::biased_gaussian) row["bias_pct"] = v.spec.bias_pct;
    j.push_back(row);
  }
  return j.dump(2);
}

}  // namespace dsse
