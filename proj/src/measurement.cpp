#include "dsse/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/QR>
#include <json.hpp>

#include "dsse/rng.hpp"

namespace dsse {

using nlohmann::json;

namespace {

constexpr int kMeasuredVoltageBuses[] = {0, 3, 8, 11, 13};
constexpr int kMeasuredInjectionBuses[] = {3, 8, 11, 13};

MeasurementKind parse_kind(const std::string& s) {
  if (s == "v_mag") return MeasurementKind::v_mag;
  if (s == "p_injection") return MeasurementKind::p_injection;
  if (s == "q_injection") return MeasurementKind::q_injection;
  if (s == "p_flow") return MeasurementKind::p_flow;
  if (s == "q_flow") return MeasurementKind::q_flow;
  throw ParseError("unknown measurement kind '" + s + "'");
}

MeasurementSource parse_source(const std::string& s) {
  if (s == "real") return MeasurementSource::real;
  if (s == "pseudo") return MeasurementSource::pseudo;
  throw ParseError("unknown measurement source '" + s + "'");
}

double draw_accuracy(std::uint64_t seed, std::uint64_t what, std::uint64_t id, double lo, double hi) {
  Rng rng = make_stream(seed, StreamTag::sensor_accuracy, {what, id});
  return uniform(rng, lo, hi);
}

}  // namespace

int MeasurementPlan::count(MeasurementSource source) const {
  return static_cast<int>(std::count_if(descriptors.begin(), descriptors.end(),
                                        [&](const MeasurementDescriptor& d) { return d.source == source; }));
}

std::string_view to_string(MeasurementKind k) {
  switch (k) {
    case MeasurementKind::v_mag: return "v_mag";
    case MeasurementKind::p_injection: return "p_injection";
    case MeasurementKind::q_injection: return "q_injection";
    case MeasurementKind::p_flow: return "p_flow";
    case MeasurementKind::q_flow: return "q_flow";
  }
  return "?";
}

std::string_view to_string(MeasurementSource s) { return s == MeasurementSource::real ? "real" : "pseudo"; }

MeasurementPlan default_plan(const Network& net, std::uint64_t sensor_seed) {
  for (int id : kMeasuredVoltageBuses)
    if (!net.index_of(id))
      throw ValidationError("default plan needs bus " + std::to_string(id) + ", absent from this network");
  const int slack = net.slack_index();
  if (net.buses()[slack].id != 0) throw ValidationError("default plan expects the slack to be bus 0");

  MeasurementPlan plan;
  auto real = [](MeasurementKind kind, double pct) {
    MeasurementDescriptor d;
    d.kind = kind;
    d.source = MeasurementSource::real;
    d.sigma_pct = pct;
    return d;
  };

  for (int id : kMeasuredVoltageBuses) {
    auto d = real(MeasurementKind::v_mag, draw_accuracy(sensor_seed, 0, id, 0.005, 0.02));
    d.bus = id;
    plan.descriptors.push_back(d);
  }
  for (int id : kMeasuredInjectionBuses) {
    const double pct = draw_accuracy(sensor_seed, 1, id, 0.01, 0.05);
    for (auto kind : {MeasurementKind::p_injection, MeasurementKind::q_injection}) {
      auto d = real(kind, pct);
      d.bus = id;
      plan.descriptors.push_back(d);
    }
  }
  const int slack_id = net.buses()[slack].id;
  for (int k = 0; k < static_cast<int>(net.branches().size()); ++k) {
    const Branch& br = net.branches()[k];
    if (!br.in_service || (br.from_bus != slack_id && br.to_bus != slack_id)) continue;
    const double pct = draw_accuracy(sensor_seed, 2, k, 0.01, 0.05);
    for (auto kind : {MeasurementKind::p_flow, MeasurementKind::q_flow}) {
      auto d = real(kind, pct);
      d.branch = k;
      d.end = br.from_bus == slack_id ? BranchEnd::from : BranchEnd::to;
      plan.descriptors.push_back(d);
    }
  }

  for (const Bus& b : net.buses()) {
    if (b.kind == BusKind::slack) continue;
    if (std::find(std::begin(kMeasuredInjectionBuses), std::end(kMeasuredInjectionBuses), b.id) !=
        std::end(kMeasuredInjectionBuses))
      continue;
    for (auto kind : {MeasurementKind::p_injection, MeasurementKind::q_injection}) {
      MeasurementDescriptor d;
      d.kind = kind;
      d.bus = b.id;
      d.source = MeasurementSource::pseudo;
      if (b.kind == BusKind::zero_injection) {
        d.sigma_abs = kZeroInjectionSigma;
        d.distribution = "gaussian";
      } else {
        d.distribution = "variant";
      }
      plan.descriptors.push_back(d);
    }
  }
  validate_plan(net, plan);
  return plan;
}

void validate_plan(const Network& net, const MeasurementPlan& plan) {
  for (int i = 0; i < plan.size(); ++i) {
    const MeasurementDescriptor& d = plan.descriptors[i];
    const std::string where = "measurement " + std::to_string(i) + ": ";
    if (d.is_flow()) {
      if (d.branch < 0 || d.branch >= static_cast<int>(net.branches().size()))
        throw ValidationError(where + "branch index out of range");
      if (!net.branches()[d.branch].in_service) throw ValidationError(where + "flow on an out-of-service branch");
    } else if (!net.index_of(d.bus)) {
      throw ValidationError(where + "unknown bus " + std::to_string(d.bus));
    }
    if (d.sigma_abs && !(*d.sigma_abs > 0.0)) throw ValidationError(where + "sigma_abs must be positive");
    if (d.source == MeasurementSource::real && !d.sigma_abs && !(d.sigma_pct > 0.0))
      throw ValidationError(where + "real measurement needs a positive sigma_pct or sigma_abs");
    if (d.distribution != "gaussian" && d.distribution != "variant")
      throw ValidationError(where + "distribution must be 'gaussian' or 'variant'");
    if (d.source == MeasurementSource::real && d.follows_variant())
      throw ValidationError(where + "real measurements are always Gaussian");
  }
}

int flat_start_rank(const Network& net, const MatrixXcd& y, const MeasurementPlan& plan) {
  const MatrixXd h = evaluate_jacobian<double>(net, y, plan, flat_start(net));
  return static_cast<int>(Eigen::ColPivHouseholderQR<MatrixXd>(h).rank());
}

std::string plan_to_json(const MeasurementPlan& plan) {
  json j = json::array();
  for (const MeasurementDescriptor& d : plan.descriptors) {
    json row{{"kind", std::string(to_string(d.kind))}, {"source", std::string(to_string(d.source))}};
    if (d.is_flow()) {
      row["branch"] = d.branch;
      row["end"] = d.end == BranchEnd::from ? "from" : "to";
    } else {
      row["bus"] = d.bus;
    }
    row["sigma_pct"] = d.sigma_pct;
    row["sigma_abs"] = d.sigma_abs ? json(*d.sigma_abs) : json(nullptr);
    row["distribution"] = d.distribution;
    j.push_back(row);
  }
  return j.dump(2);
}

MeasurementPlan parse_plan(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("plan: ") + e.what());
  }
  if (!j.is_array()) throw ParseError("plan: top level must be an array of descriptors");
  MeasurementPlan plan;
  try {
    for (const json& row : j) {
      MeasurementDescriptor d;
      d.kind = parse_kind(row.at("kind").get<std::string>());
      d.source = parse_source(row.at("source").get<std::string>());
      if (d.is_flow()) {
        d.branch = row.at("branch").get<int>();
        const std::string end = row.value("end", "from");
        if (end != "from" && end != "to") throw ParseError("plan: end must be 'from' or 'to'");
        d.end = end == "from" ? BranchEnd::from : BranchEnd::to;
      } else {
        d.bus = row.at("bus").get<int>();
      }
      d.sigma_pct = row.value("sigma_pct", 0.0);
      if (row.contains("sigma_abs") && !row["sigma_abs"].is_null()) d.sigma_abs = row["sigma_abs"].get<double>();
      d.distribution = row.value("distribution", d.source == MeasurementSource::real ? "gaussian" : "variant");
      plan.descriptors.push_back(d);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("plan: ") + e.what());
  }
  return plan;
}

MeasurementPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open plan file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_plan(ss.str());
}

VectorXd measurement_sigmas(const MeasurementPlan& plan, const VectorXd& z_true, double pseudo_sigma_pct) {
  VectorXd sigma(plan.size());
  for (int i = 0; i < plan.size(); ++i) {
    const MeasurementDescriptor& d = plan.descriptors[i];
    if (d.sigma_abs) {
      sigma(i) = *d.sigma_abs;
      continue;
    }
    const double pct = d.follows_variant() ? pseudo_sigma_pct : d.sigma_pct;
    sigma(i) = std::max(pct * std::abs(z_true(i)), kSigmaFloor);
  }
  return sigma;
}

std::vector<CalibratedNoise> build_noise_library(const MeasurementPlan& plan, const VectorXd& z_true,
                                                 const VectorXd& sigmas, const NoiseShape& variant_shape) {
  static const NoiseShape gaussian = make_shape(DistributionSpec{Family::gaussian, 1.0});
  std::vector<CalibratedNoise> lib;
  lib.reserve(plan.size());
  for (int i = 0; i < plan.size(); ++i) {
    const NoiseShape& shape = plan.descriptors[i].follows_variant() ? variant_shape : gaussian;
    lib.push_back(calibrate(shape, z_true(i), sigmas(i)));
  }
  return lib;
}

VectorXd sample_measurements(const MeasurementPlan& plan, const std::vector<CalibratedNoise>& library,
                             const ScenarioStream& stream) {
  if (static_cast<int>(library.size()) != plan.size())
    throw ValidationError("noise library size does not match the plan");
  VectorXd z(plan.size());
  for (int i = 0; i < plan.size(); ++i) {
    Rng rng = make_stream(stream.seed, StreamTag::measurement_noise, {stream.scenario, static_cast<std::uint64_t>(i)});
    z(i) = sample(library[i], rng);
  }
  return z;
}

}  // namespace dsse
