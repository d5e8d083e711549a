#pragma once

// Pseudo-measurement noise families matched at equal spread, with their
// location Fisher information.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dsse/common.hpp"
#include "dsse/quadrature.hpp"
#include "dsse/rng.hpp"

namespace dsse {

enum class Family { gaussian, student_t, laplace, skew_normal, biased_gaussian };

std::string_view to_string(Family f);
Family parse_family(std::string_view s);

struct DistributionSpec {
  Family family = Family::gaussian;
  double sigma_pct = 0.2;  // relative spread as a fraction of |mu*|
  double nu = 0.0;         // student_t only
  double alpha = 0.0;      // skew_normal only
  double bias_pct = 0.0;   // biased_gaussian only, fraction of mu*

  /// Throws ValidationError when a parameter is out of range or set for the
  /// wrong family.
  void validate() const;
};

/// A named row of the variant grid.
struct Variant {
  std::string id;
  DistributionSpec spec;
};

/// Scale-free constants of a family: everything calibration needs that does
/// not depend on mu* or sigma. Building one for a skew-normal solves the mode
/// equation and integrates the Fisher information numerically, so build it
/// once per variant.
struct NoiseShape {
  DistributionSpec spec;
  /// F * sigma^2 for the spread-matched family.
  double fisher_sigma2 = 1.0;
  /// Skew-normal with xi = 0, omega = 1: mode position and standard deviation.
  double sn_mode = 0.0;
  double sn_std = 1.0;
};

NoiseShape make_shape(const DistributionSpec& spec);

/// A noise law pinned to a true value mu* and an absolute spread sigma.
struct CalibratedNoise {
  DistributionSpec spec;
  double mu_star = 0.0;
  double sigma = 0.0;
  double fisher_sigma2 = 1.0;
  double mean = 0.0;       // Gaussian families: centre of the draw
  double t_scale = 0.0;    // student_t: s = sigma / sqrt(nu / (nu - 2))
  double laplace_b = 0.0;  // laplace: b = sigma / sqrt(2)
  double sn_xi = 0.0;      // skew_normal location
  double sn_omega = 0.0;   // skew_normal scale
  double sn_delta = 0.0;   // alpha / sqrt(1 + alpha^2)

  /// Point the density is centred on: the mode for skew-normal, the mean
  /// otherwise.
  double center() const;
};

/// sigma = sigma_pct * |mu*|; throws ValidationError when mu* is zero.
CalibratedNoise calibrate(const DistributionSpec& spec, double mu_star);
CalibratedNoise calibrate(const DistributionSpec& spec, double mu_star, double sigma);
CalibratedNoise calibrate(const NoiseShape& shape, double mu_star, double sigma);

double sample(const CalibratedNoise& cn, Rng& rng);

double log_density(const CalibratedNoise& cn, double z);
/// d/dz log p(z).
double score(const CalibratedNoise& cn, double z);

/// Location Fisher information F = E[score^2]. Closed form for the Gaussian,
/// Student-t and Laplace families; the skew-normal value comes from the
/// quadrature done in make_shape().
double fisher_information(const CalibratedNoise& cn);

/// Numerical F by adaptive quadrature over the density in standardized
/// coordinates. Throws ConvergenceError carrying the achieved estimate if
/// the tolerance is not met.
double fisher_information_quadrature(const CalibratedNoise& cn, const QuadratureOptions& opts = {});

/// phi(x) / Phi(x), stable far into the left tail.
double inverse_mills_ratio(double x);

std::vector<Variant> standard_variants();
std::vector<Variant> gaussian_only_variants();
std::vector<Variant> parse_variants(std::string_view json_text);
std::vector<Variant> load_variants(const std::filesystem::path& path);
std::string variants_to_json(const std::vector<Variant>& variants);

}  // namespace dsse
