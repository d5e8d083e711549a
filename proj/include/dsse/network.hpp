#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsse/common.hpp"

namespace dsse {

enum class BusKind { slack, load, zero_injection };

struct Bus {
  int id = 0;
  BusKind kind = BusKind::load;
  double base_kv = 0.0;
  double v_setpoint = 1.0;  // p.u., meaningful for the slack bus only
  double p_load_mw = 0.0;
  double q_load_mvar = 0.0;
};

struct Branch {
  int from_bus = 0;
  int to_bus = 0;
  double r_ohm = 0.0;
  double x_ohm = 0.0;
  double b_us = 0.0;  // total line charging, microsiemens
  bool in_service = true;
};

/// Series and half-shunt admittance of one branch in per-unit.
struct BranchAdmittance {
  std::complex<double> series;
  double half_shunt = 0.0;
};

/// Validated distribution network. Bus ids are arbitrary unique integers;
/// internally buses are addressed by their position in `buses`.
class Network {
 public:
  Network(std::vector<Bus> buses, std::vector<Branch> branches, double s_base_mva = 1.0);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Branch>& branches() const { return branches_; }
  double s_base_mva() const { return s_base_; }

  int bus_count() const { return static_cast<int>(buses_.size()); }
  int state_dimension() const { return 2 * (bus_count() - 1); }

  /// Position of the slack bus in `buses()`.
  int slack_index() const { return slack_; }
  /// Position in `buses()` of the bus with the given id, or nullopt.
  std::optional<int> index_of(int bus_id) const;
  int require_index(int bus_id) const;

  /// Position of a bus among the non-slack buses (its column in the state
  /// vector blocks), or -1 for the slack bus.
  int state_position(int bus_index) const { return state_pos_[bus_index]; }
  /// Bus index for a given non-slack position.
  int bus_at_state_position(int pos) const { return non_slack_[pos]; }

  BranchAdmittance branch_admittance(int branch_index) const;
  int in_service_branch_count() const;

  /// Copy with the slack voltage setpoint replaced.
  Network with_slack_setpoint(double v_pu) const;

 private:
  void validate();

  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  double s_base_;
  int slack_ = -1;
  std::vector<int> state_pos_;
  std::vector<int> non_slack_;
};

std::string_view to_string(BusKind kind);

Network parse_network(std::string_view json_text);
Network load_network(const std::filesystem::path& path);
std::string network_to_json(const Network& net);

/// Dense complex bus admittance matrix in per-unit.
MatrixXcd build_ybus(const Network& net);

}  // namespace dsse
