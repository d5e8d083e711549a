#pragma once

#include <string>

#include "dsse/measurement.hpp"
#include "dsse/network.hpp"
#include "dsse/power_flow.hpp"

#ifndef DSSE_TEST_DATA_DIR
#error "DSSE_TEST_DATA_DIR must point at the data directory"
#endif

namespace dsse::test {

inline std::string data_path(const std::string& name) { return std::string(DSSE_TEST_DATA_DIR) + "/" + name; }

inline const Network& fixture() {
  static const Network net = load_network(data_path("cigre_mv.json"));
  return net;
}

inline const MatrixXcd& fixture_ybus() {
  static const MatrixXcd y = build_ybus(fixture());
  return y;
}

inline const MeasurementPlan& fixture_plan() {
  static const MeasurementPlan plan = default_plan(fixture(), 7);
  return plan;
}

// 20 kV, 1 MVA: slack plus one load behind 4 + j6 ohm.
inline Network two_bus(double p_mw, double q_mvar) {
  std::vector<Bus> buses(2);
  buses[0] = {0, BusKind::slack, 20.0, 1.0, 0.0, 0.0};
  buses[1] = {1, BusKind::load, 20.0, 1.0, p_mw, q_mvar};
  return Network(buses, {{0, 1, 4.0, 6.0, 0.0, true}}, 1.0);
}

}  // namespace dsse::test
