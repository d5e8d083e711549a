#include "dsse/network.hpp"

#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace dsse {

using nlohmann::json;

namespace {

BusKind parse_kind(const std::string& s) {
  if (s == "slack") return BusKind::slack;
  if (s == "load") return BusKind::load;
  if (s == "zero_injection") return BusKind::zero_injection;
  throw ParseError("unknown bus kind '" + s + "'");
}

template <typename T>
T required(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) throw ParseError(std::string(where) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string(where) + ": field '" + key + "': " + e.what());
  }
}

// Union-find over bus positions.
int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

std::string_view to_string(BusKind kind) {
  switch (kind) {
    case BusKind::slack: return "slack";
    case BusKind::load: return "load";
    case BusKind::zero_injection: return "zero_injection";
  }
  return "?";
}

Network::Network(std::vector<Bus> buses, std::vector<Branch> branches, double s_base_mva)
    : buses_(std::move(buses)), branches_(std::move(branches)), s_base_(s_base_mva) {
  validate();
}

void Network::validate() {
  if (!(s_base_ > 0.0)) throw ValidationError("s_base_mva must be positive");
  if (buses_.size() < 2) throw ValidationError("network needs at least two buses");

  std::unordered_map<int, int> seen;
  int slack_count = 0;
  for (int i = 0; i < bus_count(); ++i) {
    const Bus& b = buses_[i];
    if (!seen.emplace(b.id, i).second)
      throw ValidationError("duplicate bus id " + std::to_string(b.id));
    if (!(b.base_kv > 0.0)) throw ValidationError("bus " + std::to_string(b.id) + ": base_kv must be positive");
    if (b.kind == BusKind::slack) {
      ++slack_count;
      slack_ = i;
      if (!(b.v_setpoint > 0.0)) throw ValidationError("slack v_setpoint must be positive");
    }
    if (b.kind == BusKind::zero_injection && (b.p_load_mw != 0.0 || b.q_load_mvar != 0.0))
      throw ValidationError("zero-injection bus " + std::to_string(b.id) + " carries load");
  }
  if (slack_count != 1)
    throw ValidationError("network must have exactly one slack bus (found " + std::to_string(slack_count) + ")");

  std::vector<int> parent(buses_.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (const Branch& br : branches_) {
    auto f = seen.find(br.from_bus);
    auto t = seen.find(br.to_bus);
    if (f == seen.end() || t == seen.end())
      throw ValidationError("branch " + std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus) +
                            " references an unknown bus");
    if (br.from_bus == br.to_bus) throw ValidationError("branch endpoints must differ");
    if (br.r_ohm == 0.0 && br.x_ohm == 0.0) throw ValidationError("branch with zero impedance");
    if (buses_[f->second].base_kv != buses_[t->second].base_kv)
      throw ValidationError("branch " + std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus) +
                            " joins buses with different base_kv");
    if (br.in_service) parent[find_root(parent, f->second)] = find_root(parent, t->second);
  }
  const int root = find_root(parent, 0);
  for (int i = 1; i < bus_count(); ++i)
    if (find_root(parent, i) != root)
      throw ValidationError("in-service network is disconnected at bus " + std::to_string(buses_[i].id));

  state_pos_.assign(buses_.size(), -1);
  non_slack_.clear();
  for (int i = 0; i < bus_count(); ++i) {
    if (i == slack_) continue;
    state_pos_[i] = static_cast<int>(non_slack_.size());
    non_slack_.push_back(i);
  }
}

std::optional<int> Network::index_of(int bus_id) const {
  for (int i = 0; i < bus_count(); ++i)
    if (buses_[i].id == bus_id) return i;
  return std::nullopt;
}

int Network::require_index(int bus_id) const {
  if (auto i = index_of(bus_id)) return *i;
  throw ValidationError("no bus with id " + std::to_string(bus_id));
}

BranchAdmittance Network::branch_admittance(int branch_index) const {
  const Branch& br = branches_.at(branch_index);
  const double kv = buses_[require_index(br.from_bus)].base_kv;
  const double z_base = kv * kv / s_base_;
  const std::complex<double> z(br.r_ohm / z_base, br.x_ohm / z_base);
  return {1.0 / z, 0.5 * br.b_us * 1e-6 * z_base};
}

int Network::in_service_branch_count() const {
  int n = 0;
  for (const Branch& br : branches_) n += br.in_service ? 1 : 0;
  return n;
}

Network Network::with_slack_setpoint(double v_pu) const {
  auto buses = buses_;
  buses[slack_].v_setpoint = v_pu;
  return Network(std::move(buses), branches_, s_base_);
}

Network parse_network(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("network file: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("network file: top level must be an object");
  const double s_base = j.value("s_base_mva", 1.0);

  std::vector<Bus> buses;
  for (const json& jb : required<json>(j, "buses", "network")) {
    Bus b;
    b.id = required<int>(jb, "id", "bus");
    b.kind = parse_kind(required<std::string>(jb, "kind", "bus"));
    b.base_kv = required<double>(jb, "base_kv", "bus");
    b.p_load_mw = jb.value("p_load_mw", 0.0);
    b.q_load_mvar = jb.value("q_load_mvar", 0.0);
    if (jb.contains("v_setpoint")) b.v_setpoint = required<double>(jb, "v_setpoint", "bus");
    buses.push_back(b);
  }
  std::vector<Branch> branches;
  for (const json& jl : required<json>(j, "branches", "network")) {
    Branch br;
    br.from_bus = required<int>(jl, "from", "branch");
    br.to_bus = required<int>(jl, "to", "branch");
    br.r_ohm = required<double>(jl, "r_ohm", "branch");
    br.x_ohm = required<double>(jl, "x_ohm", "branch");
    br.b_us = jl.value("b_us", 0.0);
    br.in_service = jl.value("in_service", true);
    branches.push_back(br);
  }
  return Network(std::move(buses), std::move(branches), s_base);
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_network(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string network_to_json(const Network& net) {
  json j;
  j["s_base_mva"] = net.s_base_mva();
  j["buses"] = json::array();
  for (const Bus& b : net.buses()) {
    json jb{{"id", b.id}, {"kind", std::string(to_string(b.kind))}, {"base_kv", b.base_kv},
            {"p_load_mw", b.p_load_mw}, {"q_load_mvar", b.q_load_mvar}};
    if (b.kind == BusKind::slack) jb["v_setpoint"] = b.v_setpoint;
    j["buses"].push_back(jb);
  }
  j["branches"] = json::array();
  for (const Branch& br : net.branches())
    j["branches"].push_back({{"from", br.from_bus}, {"to", br.to_bus}, {"r_ohm", br.r_ohm},
                             {"x_ohm", br.x_ohm}, {"b_us", br.b_us}, {"in_service", br.in_service}});
  return j.dump(2);
}

MatrixXcd build_ybus(const Network& net) {
  const int n = net.bus_count();
  MatrixXcd y = MatrixXcd::Zero(n, n);
  for (int k = 0; k < static_cast<int>(net.branches().size()); ++k) {
    const Branch& br = net.branches()[k];
    if (!br.in_service) continue;
    const int f = net.require_index(br.from_bus);
    const int t = net.require_index(br.to_bus);
    const BranchAdmittance a = net.branch_admittance(k);
    const std::complex<double> shunt(0.0, a.half_shunt);
    y(f, f) += a.series + shunt;
    y(t, t) += a.series + shunt;
    y(f, t) -= a.series;
    y(t, f) -= a.series;
  }
  return y;
}

}  // namespace dsse
