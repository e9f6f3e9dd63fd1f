#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "netmodel/network.hpp"
#include "scenariogen/scenarios.hpp"

namespace fixtures {

inline std::string read(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string data(const std::string& name) { return std::string(TOPOCTL_TEST_DATA) + "/" + name; }

inline topoctl::Network fivebus() { return topoctl::default_costs(topoctl::parse_case(read(data("fivebus.m")))); }
inline topoctl::RiskMap fivebus_risk() { return topoctl::load_risk(read(data("fivebus_risk.csv"))); }

// Generator at bus 1, 1.5 p.u. load at bus 2, two parallel lines of 1 p.u.
inline topoctl::Network twobus(double voll = 1000.0) {
  using namespace topoctl;
  std::vector<Bus> buses(2);
  buses[0] = {1, 0.0, 0.0, 3.0, 10.0, 1.0, voll, true};
  buses[1] = {2, 1.5, 0.0, 0.0, 0.0, 0.0, voll, false};
  std::vector<Line> lines{{1, 2, 1, -10.0, 0.0, 1.0, 0.5, true}, {1, 2, 2, -10.0, 0.0, 1.0, 0.5, true}};
  return Network(buses, lines, 100.0);
}

}  // namespace fixtures
