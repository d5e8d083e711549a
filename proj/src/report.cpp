#include "dsse/report.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>

namespace dsse {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_crb_csv(std::ostream& out, const SweepResult& sweep, const Network& net) {
  out << "# " << kCrbSchema << '\n';
  out << "variant_id,scenario_id,lambda,bus_id,state_kind,assumed_var,true_var,rho\n";
  const int half = net.bus_count() - 1;
  for (std::size_t vi = 0; vi < sweep.variants.size(); ++vi) {
    for (std::size_t si = 0; si < sweep.scenarios.size(); ++si) {
      const Cell& c = sweep.cell(vi, si);
      if (!c.ok) continue;
      const CrbReport& r = c.report;
      for (int kind = 0; kind < 2; ++kind) {
        for (int pos = 0; pos < half; ++pos) {
          const int k = kind * half + pos;
          out << r.variant_id << ',' << r.scenario_id << ',' << format_double(r.lambda) << ','
              << net.buses()[net.bus_at_state_position(pos)].id << ',' << (kind == 0 ? "theta" : "vmag") << ','
              << format_double(r.assumed_var(k)) << ',' << format_double(r.true_var(k)) << ','
              << format_double(r.rho(k)) << '\n';
        }
      }
    }
  }
}

void write_coverage_csv(std::ostream& out, const std::vector<CoverageRow>& rows, int failed_cells) {
  out << "# " << kCoverageSchema << '\n';
  out << "variant_id,level,cov_wls,cov_true,n_scenarios\n";
  for (const CoverageRow& r : rows)
    out << r.variant_id << ',' << format_double(r.level) << ',' << format_double(r.cov_wls) << ','
        << format_double(r.cov_true) << ',' << r.n_scenarios << '\n';
  out << "# failed_cells: " << failed_cells << '\n';
}

void write_rmse_csv(std::ostream& out, const std::vector<RmseRow>& rows) {
  out << "# " << kRmseSchema << '\n';
  out << "variant_id,scenario_id,lambda,rmse_vmag\n";
  for (const RmseRow& r : rows)
    out << r.variant_id << ',' << r.scenario_id << ',' << format_double(r.lambda) << ','
        << format_double(r.rmse_vmag) << '\n';
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dsse
