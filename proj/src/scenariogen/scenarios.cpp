#include "scenariogen/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "common/errors.hpp"
#include "json.hpp"

namespace topoctl {

RiskMap::RiskMap(std::map<LineKey, double> risks) : risks_(std::move(risks)) {
  for (const auto& [key, r] : risks_) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ValidationError("line " + key.str() + ": risk must be a nonnegative number");
  }
}

double RiskMap::risk(const LineKey& key) const {
  auto it = risks_.find(key);
  return it == risks_.end() ? 0.0 : it->second;
}

void RiskMap::check_against(const Network& net) const {
  for (const auto& [key, r] : risks_) {
    if (!net.find_line(key)) throw ValidationError("risk map names unknown line " + key.str());
  }
}

RiskMap load_risk(std::string_view csv) {
  std::map<LineKey, double> risks;
  std::istringstream in{std::string(csv)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4) throw ParseError("risk csv: expected 4 columns", lineno);
    if (lineno == 1 && cells[0].find_first_not_of(" 0123456789-") != std::string::npos) continue;  // header
    try {
      LineKey key{std::stoi(cells[0]), std::stoi(cells[1]), std::stoi(cells[2])};
      double r = std::stod(cells[3]);
      if (r < 0.0) throw ValidationError("line " + std::to_string(lineno) + ": negative risk for " + key.str());
      risks[key] = r;
    } catch (const std::invalid_argument&) {
      throw ParseError("risk csv: malformed row", lineno);
    } catch (const std::out_of_range&) {
      throw ParseError("risk csv: value out of range", lineno);
    }
  }
  return RiskMap(std::move(risks));
}

bool OutageScenario::in_service(const LineKey& key) const {
  return !std::binary_search(out_lines.begin(), out_lines.end(), key);
}

ScenarioSet ScenarioSet::from_outages(std::vector<std::vector<LineKey>> outages) {
  ScenarioSet set;
  const double p = outages.empty() ? 0.0 : 1.0 / static_cast<double>(outages.size());
  for (std::size_t s = 0; s < outages.size(); ++s) {
    OutageScenario sc;
    sc.id = static_cast<int>(s);
    sc.out_lines = std::move(outages[s]);
    std::sort(sc.out_lines.begin(), sc.out_lines.end());
    sc.out_lines.erase(std::unique(sc.out_lines.begin(), sc.out_lines.end()), sc.out_lines.end());
    set.scenarios.push_back(std::move(sc));
    set.probabilities.push_back(p);
  }
  return set;
}

namespace {

// Uniform double in [0, 1) from the top 53 bits of a 64-bit Mersenne Twister
// draw. std::mt19937_64's output sequence is fixed by the standard, and this
// mapping avoids the implementation-defined std::uniform_real_distribution.
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

ScenarioSet generate(const RiskMap& risk, double threshold, int count, int max_outages, std::uint64_t seed) {
  if (count < 1) throw ArgumentError("scenario count must be at least 1");
  if (max_outages < 1) throw ArgumentError("max outages must be at least 1");

  std::vector<LineKey> keys;
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& [key, r] : risk.risks()) {
    if (r < threshold || r <= 0.0) continue;
    total += r;
    keys.push_back(key);
    cumulative.push_back(total);
  }

  ScenarioSet set;
  set.seed = seed;
  set.threshold = threshold;
  set.max_outages = max_outages;
  std::mt19937_64 rng(seed);
  for (int s = 0; s < count; ++s) {
    OutageScenario sc;
    sc.id = s;
    if (!keys.empty()) {
      for (int d = 0; d < max_outages; ++d) {
        const double target = unit_draw(rng) * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
        std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), keys.size() - 1);
        sc.out_lines.push_back(keys[idx]);
      }
      std::sort(sc.out_lines.begin(), sc.out_lines.end());
      sc.out_lines.erase(std::unique(sc.out_lines.begin(), sc.out_lines.end()), sc.out_lines.end());
    }
    set.scenarios.push_back(std::move(sc));
  }
  set.probabilities.assign(static_cast<std::size_t>(count), 1.0 / static_cast<double>(count));
  return set;
}

double threshold_for_k_lines(const RiskMap& risk, int k) {
  if (k < 1) throw ArgumentError("k must be at least 1");
  double max_risk = 0.0;
  int positive = 0;
  for (const auto& [key, r] : risk.risks()) {
    max_risk = std::max(max_risk, r);
    if (r > 0.0) ++positive;
  }
  if (k > positive)
    throw ArgumentError("cannot restrict risk to " + std::to_string(k) + " lines: only " + std::to_string(positive) +
                        " lines have positive risk");
  std::set<int> achievable;
  const int last = static_cast<int>(std::ceil(max_risk * 10.0)) + 1;
  for (int g = 1; g <= last; ++g) {
    const double r_grid = g / 10.0;
    int n = 0;
    for (const auto& [key, r] : risk.risks())
      if (r >= r_grid) ++n;
    if (n == k) return r_grid;
    achievable.insert(n);
  }
  std::string list;
  for (int n : achievable) list += (list.empty() ? "" : ", ") + std::to_string(n);
  throw ArgumentError("no threshold on the 0.1 grid leaves exactly " + std::to_string(k) +
                      " lines; achievable counts: " + list);
}

std::vector<int> concentration_histogram(const ScenarioSet& set) {
  std::map<LineKey, int> appearances;
  for (const auto& sc : set.scenarios)
    for (const auto& key : sc.out_lines) ++appearances[key];
  std::vector<int> counts(set.size(), 0);
  for (const auto& [key, n] : appearances)
    for (int k = 1; k <= n && k <= static_cast<int>(counts.size()); ++k) ++counts[static_cast<std::size_t>(k - 1)];
  return counts;
}

using nlohmann::json;

std::string scenarios_to_jsonl(const ScenarioSet& set) {
  std::string out;
  for (const auto& sc : set.scenarios) {
    json row;
    row["id"] = sc.id;
    json lines = json::array();
    for (const auto& key : sc.out_lines)
      lines.push_back(json::array({std::to_string(key.from), std::to_string(key.to), key.circuit}));
    row["out"] = std::move(lines);
    out += row.dump();
    out += '\n';
  }
  return out;
}

namespace {
int bus_from_json(const json& v) {
  if (v.is_string()) return std::stoi(v.get<std::string>());
  return v.get<int>();
}
}  // namespace

ScenarioSet scenarios_from_jsonl(std::string_view text) {
  std::vector<std::vector<LineKey>> outages;
  std::vector<int> ids;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json row = json::parse(line);
      std::vector<LineKey> out;
      for (const auto& l : row.at("out")) {
        if (l.size() != 3) throw ParseError("scenario line key must have 3 entries", lineno);
        out.push_back({bus_from_json(l[0]), bus_from_json(l[1]), l[2].get<int>()});
      }
      ids.push_back(row.at("id").get<int>());
      outages.push_back(std::move(out));
    } catch (const json::exception& e) {
      throw ParseError(std::string("scenario jsonl: ") + e.what(), lineno);
    } catch (const std::invalid_argument&) {
      throw ParseError("scenario jsonl: malformed bus id", lineno);
    }
  }
  ScenarioSet set = ScenarioSet::from_outages(std::move(outages));
  for (std::size_t s = 0; s < ids.size(); ++s) set.scenarios[s].id = ids[s];
  return set;
}

std::string scenario_hash(const ScenarioSet& set) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : scenarios_to_jsonl(set)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace topoctl
