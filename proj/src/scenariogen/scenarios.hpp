#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "netmodel/network.hpp"

namespace topoctl {

// Per-line wildfire risk; lines absent from the map have zero risk.
class RiskMap {
public:
  RiskMap() = default;
  explicit RiskMap(std::map<LineKey, double> risks);

  const std::map<LineKey, double>& risks() const { return risks_; }
  std::size_t size() const { return risks_.size(); }
  double risk(const LineKey& key) const;

  // Throws ValidationError if a key does not name a line of `net`.
  void check_against(const Network& net) const;

private:
  std::map<LineKey, double> risks_;
};

// Rows "from_bus,to_bus,circuit,risk". A header row and blank lines are skipped.
RiskMap load_risk(std::string_view csv);

// A damaged-line set. The in-service indicator of a line is 0 when the line
// is in out_lines and 1 otherwise.
struct OutageScenario {
  int id = 0;
  std::vector<LineKey> out_lines;  // sorted, unique

  bool in_service(const LineKey& key) const;
  bool operator==(const OutageScenario&) const = default;
};

struct ScenarioSet {
  std::vector<OutageScenario> scenarios;
  std::vector<double> probabilities;
  std::uint64_t seed = 0;
  double threshold = 0.0;
  int max_outages = 0;

  std::size_t size() const { return scenarios.size(); }
  bool empty() const { return scenarios.empty(); }

  // Equiprobable set from explicit outage lists; ids are 0..n-1.
  static ScenarioSet from_outages(std::vector<std::vector<LineKey>> outages);
};

// Monte Carlo outage sampler: lines with risk below `threshold` are dropped,
// the rest are normalized into weights, and each scenario draws `max_outages`
// weighted samples with replacement (duplicates collapse).
ScenarioSet generate(const RiskMap& risk, double threshold, int count, int max_outages, std::uint64_t seed);

// Smallest R on the grid {0.1, 0.2, ...} leaving exactly k lines with risk >= R.
double threshold_for_k_lines(const RiskMap& risk, int k);

// counts[k-1] = number of distinct lines outaged in at least k scenarios, k = 1..|S|.
std::vector<int> concentration_histogram(const ScenarioSet& set);

// JSON lines, one scenario per line: {"id":0,"out":[["101","102",1],...]}.
std::string scenarios_to_jsonl(const ScenarioSet& set);
ScenarioSet scenarios_from_jsonl(std::string_view text);

// FNV-1a of the JSONL serialization; identifies a scenario set in result rows.
std::string scenario_hash(const ScenarioSet& set);

}  // namespace topoctl
