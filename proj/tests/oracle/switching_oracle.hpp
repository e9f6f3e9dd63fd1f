#pragma once
// Fixed-topology reference models written straight from the network data:
// no big-M, no binaries. Enumerating topologies over these gives exhaustive
// optima for small cases.

#include <functional>
#include <set>
#include <vector>

#include "dense_lp.hpp"
#include "netmodel/network.hpp"
#include "scenariogen/scenarios.hpp"

namespace oracle {

using topoctl::LineKey;
using topoctl::Network;

struct Outages {
  std::vector<std::set<LineKey>> out;
  std::vector<double> prob;
};

inline Outages outages_of(const topoctl::ScenarioSet& set) {
  Outages o;
  for (std::size_t s = 0; s < set.size(); ++s) {
    o.out.emplace_back(set.scenarios[s].out_lines.begin(), set.scenarios[s].out_lines.end());
    o.prob.push_back(set.probabilities[s]);
  }
  return o;
}

// One DC network block: angles, flows on closed lines, nodal balance.
// injections[i] holds the generation and shed terms at bus index i.
inline void add_network(Lp& lp, const Network& net, const std::function<bool(std::size_t)>& closed,
                        const std::vector<std::vector<std::pair<int, double>>>& injections) {
  const auto& buses = net.buses();
  std::vector<int> th(buses.size());
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const bool ref = buses[i].is_reference;
    th[i] = lp.add_var(ref ? 0.0 : -kInf, ref ? 0.0 : kInf, 0.0);
  }
  std::vector<std::vector<std::pair<int, double>>> bal = injections;
  for (std::size_t l = 0; l < net.lines().size(); ++l) {
    if (!closed(l)) continue;
    const auto& ln = net.lines()[l];
    const std::size_t i = net.bus_index(ln.from), j = net.bus_index(ln.to);
    const int p = lp.add_var(-ln.thermal, ln.thermal, 0.0);
    // p = -b (th_i - th_j)
    lp.add_row({{p, 1.0}, {th[i], ln.susceptance}, {th[j], -ln.susceptance}}, '=', 0.0);
    bal[i].push_back({p, -1.0});
    bal[j].push_back({p, 1.0});
  }
  for (std::size_t i = 0; i < buses.size(); ++i) lp.add_row(bal[i], '=', buses[i].demand);
}

inline bool has_gen(const topoctl::Bus& b) { return b.gen_upper > 0.0 || b.gen_lower != 0.0; }

// Deterministic DC-OPF with the given lines closed; no shedding.
inline LpResult dispatch(const Network& net, const std::vector<bool>& closed) {
  Lp lp;
  std::vector<std::vector<std::pair<int, double>>> inj(net.num_buses());
  for (std::size_t i = 0; i < net.num_buses(); ++i) {
    const auto& b = net.buses()[i];
    if (has_gen(b)) inj[i].push_back({lp.add_var(b.gen_lower, b.gen_upper, b.gen_cost), 1.0});
  }
  add_network(lp, net, [&](std::size_t l) { return closed[l]; }, inj);
  return solve(lp);
}

// Two-stage model with every switch fixed: line l is energized in scenario s
// when closed[s][l] and it is not damaged in s.
inline LpResult two_stage(const Network& net, const Outages& sc, const std::vector<std::vector<bool>>& closed) {
  Lp lp;
  const auto& buses = net.buses();
  std::vector<int> pg(buses.size(), -1);
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (has_gen(buses[i])) pg[i] = lp.add_var(buses[i].gen_lower, buses[i].gen_upper, buses[i].gen_cost);
  for (std::size_t s = 0; s < sc.out.size(); ++s) {
    const double pi = sc.prob[s];
    std::vector<std::vector<std::pair<int, double>>> inj(buses.size());
    for (std::size_t i = 0; i < buses.size(); ++i) {
      const auto& b = buses[i];
      if (pg[i] >= 0) {
        const double span = b.gen_upper - b.gen_lower;
        const int up = lp.add_var(0.0, span, pi * (b.ramp_cost + b.gen_cost));
        const int dn = lp.add_var(0.0, span, pi * b.ramp_cost);
        lp.add_row({{pg[i], 1.0}, {up, 1.0}, {dn, -1.0}}, '>', b.gen_lower);
        lp.add_row({{pg[i], 1.0}, {up, 1.0}, {dn, -1.0}}, '<', b.gen_upper);
        inj[i] = {{pg[i], 1.0}, {up, 1.0}, {dn, -1.0}};
      }
      if (b.demand > 0.0) inj[i].push_back({lp.add_var(0.0, b.demand, pi * b.voll), 1.0});
    }
    add_network(
        lp, net, [&](std::size_t l) { return closed[s][l] && !sc.out[s].count(net.lines()[l].key()); }, inj);
  }
  return solve(lp);
}

// Preventive: one topology shared by every scenario.
inline LpResult two_stage(const Network& net, const Outages& sc, const std::vector<bool>& closed) {
  return two_stage(net, sc, std::vector<std::vector<bool>>(sc.out.size(), closed));
}

// Calls f(closed) for every first-stage topology reachable with at most
// `budget` actions (open an on-line or close an off-line).
inline void for_each_topology(const Network& net, int budget, const std::function<void(const std::vector<bool>&)>& f) {
  const std::size_t n = net.num_lines();
  std::vector<bool> closed(n);
  std::function<void(std::size_t, int)> rec = [&](std::size_t l, int left) {
    if (l == n) {
      f(closed);
      return;
    }
    const bool init = net.lines()[l].initially_on;
    closed[l] = init;
    rec(l + 1, left);
    if (left > 0) {
      closed[l] = !init;
      rec(l + 1, left - 1);
    }
  };
  rec(0, budget);
}

struct Best {
  double objective = kInf;
  std::vector<bool> closed;
  int evaluated = 0;
};

inline Best brute_force_preventive(const Network& net, const Outages& sc, int budget) {
  Best best;
  for_each_topology(net, budget, [&](const std::vector<bool>& closed) {
    ++best.evaluated;
    const LpResult r = two_stage(net, sc, closed);
    if (r.status == LpStatus::Optimal && r.objective < best.objective) {
      best.objective = r.objective;
      best.closed = closed;
    }
  });
  return best;
}

// Corrective: each scenario picks its own topology within the budget.
inline Best brute_force_corrective(const Network& net, const Outages& sc, int budget) {
  std::vector<std::vector<bool>> options;
  for_each_topology(net, budget, [&](const std::vector<bool>& closed) { options.push_back(closed); });
  Best best;
  std::vector<std::vector<bool>> pick(sc.out.size());
  std::function<void(std::size_t)> rec = [&](std::size_t s) {
    if (s == sc.out.size()) {
      ++best.evaluated;
      const LpResult r = two_stage(net, sc, pick);
      if (r.status == LpStatus::Optimal && r.objective < best.objective) best.objective = r.objective;
      return;
    }
    for (const auto& o : options) {
      pick[s] = o;
      rec(s + 1);
    }
  };
  rec(0);
  return best;
}

inline Best brute_force_deterministic(const Network& net, int budget) {
  Best best;
  for_each_topology(net, budget, [&](const std::vector<bool>& closed) {
    ++best.evaluated;
    const LpResult r = dispatch(net, closed);
    if (r.status == LpStatus::Optimal && r.objective < best.objective) {
      best.objective = r.objective;
      best.closed = closed;
    }
  });
  return best;
}

}  // namespace oracle
