#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace topoctl {

// All electrical quantities are per unit on Network::base_mva. Costs are in
// $ per p.u. of power (i.e. $/MWh scaled by base_mva).
struct Bus {
  int id = 0;
  double demand = 0.0;
  double gen_lower = 0.0;
  double gen_upper = 0.0;
  double gen_cost = 0.0;
  double ramp_cost = 0.0;
  double voll = 0.0;
  bool is_reference = false;

  bool operator==(const Bus&) const = default;
};

// Identifies a line; circuit separates parallel lines between the same pair.
struct LineKey {
  int from = 0;
  int to = 0;
  int circuit = 1;

  auto operator<=>(const LineKey&) const = default;
  std::string str() const;
};

struct Line {
  int from = 0;
  int to = 0;
  int circuit = 1;
  double susceptance = 0.0;  // b, flow = -b * (theta_from - theta_to)
  double conductance = 0.0;  // g, carried for completeness; unused by the DC model
  double thermal = 0.0;
  double angle_limit = 0.0;  // radians
  bool initially_on = true;

  LineKey key() const { return {from, to, circuit}; }
  bool operator==(const Line&) const = default;
};

class Network {
public:
  Network() = default;
  // Validates invariants and builds lookup tables; throws ValidationError.
  Network(std::vector<Bus> buses, std::vector<Line> lines, double base_mva);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  double base_mva() const { return base_mva_; }

  std::size_t num_buses() const { return buses_.size(); }
  std::size_t num_lines() const { return lines_.size(); }

  std::size_t bus_index(int id) const;  // throws ValidationError for unknown ids
  std::optional<std::size_t> find_line(const LineKey& key) const;
  std::size_t reference_index() const { return reference_; }

  double total_demand() const;

  // True when the subgraph of initially-on lines spans every bus.
  bool initially_connected() const;
  // Human-readable warnings for soft invariant violations (disconnection).
  std::vector<std::string> warnings() const;

  bool operator==(const Network& other) const {
    return buses_ == other.buses_ && lines_ == other.lines_ && base_mva_ == other.base_mva_;
  }

private:
  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  double base_mva_ = 100.0;
  std::map<int, std::size_t> bus_lookup_;
  std::map<LineKey, std::size_t> line_lookup_;
  std::size_t reference_ = 0;
};

struct CaseOptions {
  // Replace every aggregated generator lower bound by zero. Guarantees
  // recourse feasibility when outages island generator buses.
  bool zero_gen_lower = false;
};

// Parses the MATPOWER text layout (baseMVA, bus, gen, branch, gencost).
Network parse_case(std::string_view text, const CaseOptions& options = {});

// Native JSON network format with the same fields as Bus/Line.
Network parse_network_json(std::string_view text);
std::string network_to_json(const Network& net);

// Dispatches on content: MATPOWER if it contains "mpc.", JSON otherwise.
Network load_network_file(const std::string& path, const CaseOptions& options = {});

Network scale_loads(const Network& net, double factor);

// ramp cost = 10% of generation cost; VoLL = 10 x the largest generation cost,
// identical at every bus.
Network default_costs(const Network& net);
// default_costs when no bus has a VoLL (MATPOWER input), the network unchanged otherwise.
Network fill_default_costs(const Network& net);

// Big-M for angle differences: max line angle limit times the line count.
double big_m_theta(const Network& net);

}  // namespace topoctl
