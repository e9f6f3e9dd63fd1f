#include "formulation/formulation.hpp"

#include <algorithm>
#include <cmath>

#include "common/errors.hpp"
#include "json.hpp"

namespace topoctl {

namespace {

double value_of(const std::vector<double>& x, int var) { return var < 0 ? 0.0 : x[static_cast<std::size_t>(var)]; }

std::vector<double> gather(const std::vector<double>& x, const std::vector<int>& vars) {
  std::vector<double> out(vars.size());
  for (std::size_t k = 0; k < vars.size(); ++k) out[k] = value_of(x, vars[k]);
  return out;
}

const OutageScenario* find_scenario(const ScenarioSet& set, int id) {
  for (const auto& s : set.scenarios)
    if (s.id == id) return &s;
  return nullptr;
}

}  // namespace

SolutionReport extract_report(const BuiltModel& built, const milp::Solution& solution, const Network& net,
                              const ScenarioSet& scenarios, bool allow_incumbent) {
  const bool usable = solution.optimal() || (allow_incumbent && !solution.values.empty());
  if (!usable) throw SolveError("cannot report a " + milp::to_string(solution.status) + " solution");
  const auto& x = solution.values;
  const Layout& lay = built.layout;

  SolutionReport rep;
  rep.kind = lay.kind;
  rep.status = milp::to_string(solution.status);
  rep.budget = lay.budget;
  rep.load_scaling = lay.load_scaling;
  rep.base_mva = net.base_mva();
  for (const Bus& b : net.buses()) rep.bus_ids.push_back(b.id);
  for (const Line& l : net.lines()) rep.line_keys.push_back(l.key());

  rep.pg = gather(x, lay.pg);
  rep.switched.assign(net.num_lines(), 0);
  if (lay.kind != Kind::Corrective) {
    for (std::size_t l = 0; l < net.num_lines(); ++l) {
      const int z = static_cast<int>(std::lround(value_of(x, lay.sw[l])));
      rep.switched[l] = lay.kind == Kind::Deterministic ? (net.lines()[l].initially_on ? 1 - z : z) : z;
    }
  }

  for (const ScenarioBlock& blk : lay.blocks) {
    ScenarioReport sr;
    sr.id = blk.id;
    sr.probability = blk.probability;
    if (lay.kind != Kind::Deterministic) {
      const OutageScenario* sc = find_scenario(scenarios, blk.id);
      if (sc) sr.out_lines = sc->out_lines;
    }
    sr.theta = gather(x, blk.theta);
    sr.ramp_up = gather(x, blk.ramp_up);
    sr.ramp_down = gather(x, blk.ramp_down);
    sr.shed = gather(x, blk.shed);
    sr.flow = gather(x, blk.flow);
    sr.switched.assign(net.num_lines(), 0);
    if (lay.kind == Kind::Corrective)
      for (std::size_t l = 0; l < net.num_lines(); ++l)
        sr.switched[l] = static_cast<int>(std::lround(value_of(x, blk.sw[l])));
    rep.scenarios.push_back(std::move(sr));
  }
  recompute_costs(rep, net);
  rep.max_residual = verify_physics(rep, net, scenarios);
  return rep;
}

void recompute_costs(SolutionReport& rep, const Network& net) {
  const auto& buses = net.buses();
  rep.generation_cost = 0.0;
  rep.total_generation = 0.0;
  for (std::size_t i = 0; i < buses.size(); ++i) {
    rep.generation_cost += buses[i].gen_cost * rep.pg[i];
    rep.total_generation += rep.pg[i];
  }
  rep.ramp_cost = 0.0;
  rep.voll_cost = 0.0;
  rep.expected_shed_mw = 0.0;
  for (ScenarioReport& sr : rep.scenarios) {
    double ramp = 0.0, voll = 0.0, shed = 0.0;
    for (std::size_t i = 0; i < buses.size(); ++i) {
      const Bus& b = buses[i];
      ramp += b.ramp_cost * (sr.ramp_up[i] + sr.ramp_down[i]) + b.gen_cost * sr.ramp_up[i];
      voll += b.voll * sr.shed[i];
      shed += sr.shed[i];
    }
    sr.cost = ramp + voll;
    sr.shed_mw = std::max(0.0, shed * rep.base_mva);
    rep.ramp_cost += sr.probability * ramp;
    rep.voll_cost += sr.probability * voll;
    rep.expected_shed_mw += sr.probability * sr.shed_mw;
  }
  rep.objective = rep.generation_cost + rep.ramp_cost + rep.voll_cost;
}

double verify_physics(const SolutionReport& rep, const Network& raw, const ScenarioSet& scenarios) {
  const Network net = rep.load_scaling == 1.0 ? raw : scale_loads(raw, rep.load_scaling);
  const auto& buses = net.buses();
  const auto& lines = net.lines();
  if (rep.pg.size() != buses.size() || rep.switched.size() != lines.size())
    throw ArgumentError("report does not match the network dimensions");
  double worst = 0.0;
  auto bump = [&](double r) { worst = std::max(worst, r); };
  auto outside = [](double v, double lo, double hi) { return std::max({0.0, lo - v, v - hi}); };
  auto binary = [](int v) { return v == 0 || v == 1 ? 0.0 : 1.0; };

  for (std::size_t i = 0; i < buses.size(); ++i) bump(outside(rep.pg[i], buses[i].gen_lower, buses[i].gen_upper));
  if (rep.kind != Kind::Corrective) {
    int actions = 0;
    for (int a : rep.switched) {
      bump(binary(a));
      actions += a;
    }
    bump(static_cast<double>(std::max(0, actions - rep.budget)));
  }

  for (const ScenarioReport& sr : rep.scenarios) {
    if (sr.theta.size() != buses.size() || sr.flow.size() != lines.size() || sr.shed.size() != buses.size() ||
        sr.ramp_up.size() != buses.size() || sr.ramp_down.size() != buses.size())
      throw ArgumentError("scenario report does not match the network dimensions");
    const OutageScenario* sc = rep.kind == Kind::Deterministic ? nullptr : find_scenario(scenarios, sr.id);
    if (rep.kind != Kind::Deterministic && sc == nullptr)
      throw ArgumentError("report scenario " + std::to_string(sr.id) + " is not in the scenario set");

    bump(std::abs(sr.theta[net.reference_index()]));
    std::vector<double> balance(buses.size(), 0.0);
    for (std::size_t i = 0; i < buses.size(); ++i) {
      const Bus& b = buses[i];
      const double out = rep.pg[i] + sr.ramp_up[i] - sr.ramp_down[i];
      if (rep.kind == Kind::Deterministic) {
        bump(std::abs(sr.ramp_up[i]) + std::abs(sr.ramp_down[i]) + std::abs(sr.shed[i]));
      } else {
        bump(outside(out, b.gen_lower, b.gen_upper));
        bump(std::max(0.0, -sr.ramp_up[i]));
        bump(std::max(0.0, -sr.ramp_down[i]));
        bump(outside(sr.shed[i], 0.0, b.demand));
      }
      balance[i] = out + sr.shed[i] - b.demand;
    }

    int actions = 0;
    for (std::size_t l = 0; l < lines.size(); ++l) {
      const Line& ln = lines[l];
      const int action = rep.kind == Kind::Corrective ? sr.switched[l] : rep.switched[l];
      if (rep.kind == Kind::Corrective) {
        bump(binary(action));
        actions += action;
      }
      const bool closed = ln.initially_on != (action == 1);
      const bool active = closed && (sc == nullptr || sc->in_service(ln.key()));
      const double p = sr.flow[l];
      const std::size_t i = net.bus_index(ln.from), j = net.bus_index(ln.to);
      if (active) {
        bump(std::abs(p + ln.susceptance * (sr.theta[i] - sr.theta[j])));
        bump(std::max(0.0, std::abs(p) - ln.thermal));
      } else {
        bump(std::abs(p));
      }
      balance[i] -= p;
      balance[j] += p;
    }
    if (rep.kind == Kind::Corrective) bump(static_cast<double>(std::max(0, actions - rep.budget)));
    for (double r : balance) bump(std::abs(r));
  }
  return worst;
}

std::string report_to_json(const SolutionReport& rep) {
  using nlohmann::json;
  auto key_json = [](const LineKey& k) { return json::array({std::to_string(k.from), std::to_string(k.to), k.circuit}); };
  json j;
  j["formulation"] = to_string(rep.kind);
  j["status"] = rep.status;
  j["budget"] = rep.budget;
  j["load_scaling"] = rep.load_scaling;
  j["base_mva"] = rep.base_mva;
  j["objective"] = {{"total", rep.objective},
                    {"generation", rep.generation_cost},
                    {"ramping", rep.ramp_cost},
                    {"voll", rep.voll_cost}};
  j["expected_load_shed_mw"] = rep.expected_shed_mw;
  j["total_generation_pu"] = rep.total_generation;
  j["max_residual"] = rep.max_residual;
  json gen = json::object();
  for (std::size_t i = 0; i < rep.bus_ids.size(); ++i)
    if (rep.pg[i] != 0.0) gen[std::to_string(rep.bus_ids[i])] = rep.pg[i];
  j["generation"] = gen;
  json sw = json::array();
  for (std::size_t l = 0; l < rep.line_keys.size(); ++l)
    if (rep.switched[l]) sw.push_back(key_json(rep.line_keys[l]));
  j["switched"] = sw;
  json scen = json::array();
  for (const auto& sr : rep.scenarios) {
    json s;
    s["id"] = sr.id;
    s["probability"] = sr.probability;
    json out = json::array();
    for (const auto& k : sr.out_lines) out.push_back(key_json(k));
    s["out"] = out;
    s["load_shed_mw"] = sr.shed_mw;
    s["recourse_cost"] = sr.cost;
    json flows = json::array();
    for (std::size_t l = 0; l < rep.line_keys.size(); ++l) {
      json f = key_json(rep.line_keys[l]);
      f.push_back(sr.flow[l]);
      flows.push_back(f);
    }
    s["flows"] = flows;
    json shed = json::object(), ramp = json::object();
    for (std::size_t i = 0; i < rep.bus_ids.size(); ++i) {
      if (sr.shed[i] != 0.0) shed[std::to_string(rep.bus_ids[i])] = sr.shed[i];
      const double r = sr.ramp_up[i] - sr.ramp_down[i];
      if (r != 0.0) ramp[std::to_string(rep.bus_ids[i])] = r;
    }
    json angles = json::object();
    for (std::size_t i = 0; i < rep.bus_ids.size(); ++i) angles[std::to_string(rep.bus_ids[i])] = sr.theta[i];
    s["angles"] = angles;
    s["shed_pu"] = shed;
    s["ramp_pu"] = ramp;
    if (rep.kind == Kind::Corrective) {
      json ssw = json::array();
      for (std::size_t l = 0; l < rep.line_keys.size(); ++l)
        if (sr.switched[l]) ssw.push_back(key_json(rep.line_keys[l]));
      s["switched"] = ssw;
    }
    scen.push_back(s);
  }
  j["scenarios"] = scen;
  return j.dump(2);
}

namespace {

LineKey key_from_json(const nlohmann::json& j) {
  auto bus = [](const nlohmann::json& v) { return v.is_string() ? std::stoi(v.get<std::string>()) : v.get<int>(); };
  if (!j.is_array() || j.size() < 3) throw ParseError("line key must be [from, to, circuit]");
  return {bus(j[0]), bus(j[1]), j[2].get<int>()};
}

}  // namespace

SolutionReport report_from_json(const std::string& text, const Network& net) {
  using nlohmann::json;
  SolutionReport rep;
  try {
    const json j = json::parse(text);
    rep.kind = parse_kind(j.at("formulation").get<std::string>());
    rep.status = j.value("status", std::string("optimal"));
    rep.budget = j.at("budget").get<int>();
    rep.load_scaling = j.value("load_scaling", 1.0);
    rep.base_mva = net.base_mva();
    for (const Bus& b : net.buses()) rep.bus_ids.push_back(b.id);
    for (const Line& l : net.lines()) rep.line_keys.push_back(l.key());
    const std::size_t nb = net.num_buses(), nl = net.num_lines();
    rep.pg.assign(nb, 0.0);
    for (const auto& [bus, v] : j.at("generation").items()) rep.pg[net.bus_index(std::stoi(bus))] = v.get<double>();
    auto line_index = [&](const json& k) {
      const auto idx = net.find_line(key_from_json(k));
      if (!idx) throw ValidationError("report names unknown line " + key_from_json(k).str());
      return *idx;
    };
    rep.switched.assign(nl, 0);
    for (const auto& k : j.at("switched")) rep.switched[line_index(k)] = 1;
    for (const auto& s : j.at("scenarios")) {
      ScenarioReport sr;
      sr.id = s.at("id").get<int>();
      sr.probability = s.at("probability").get<double>();
      for (const auto& k : s.at("out")) sr.out_lines.push_back(key_from_json(k));
      sr.theta.assign(nb, 0.0);
      sr.ramp_up.assign(nb, 0.0);
      sr.ramp_down.assign(nb, 0.0);
      sr.shed.assign(nb, 0.0);
      sr.flow.assign(nl, 0.0);
      sr.switched.assign(nl, 0);
      for (const auto& f : s.at("flows")) {
        if (!f.is_array() || f.size() != 4) throw ParseError("flow entries must be [from, to, circuit, value]");
        sr.flow[line_index(json::array({f[0], f[1], f[2]}))] = f[3].get<double>();
      }
      for (const auto& [bus, v] : s.at("angles").items()) sr.theta[net.bus_index(std::stoi(bus))] = v.get<double>();
      for (const auto& [bus, v] : s.at("shed_pu").items()) sr.shed[net.bus_index(std::stoi(bus))] = v.get<double>();
      for (const auto& [bus, v] : s.at("ramp_pu").items()) {
        const double r = v.get<double>();
        const std::size_t i = net.bus_index(std::stoi(bus));
        sr.ramp_up[i] = std::max(r, 0.0);
        sr.ramp_down[i] = std::max(-r, 0.0);
      }
      if (s.contains("switched"))
        for (const auto& k : s.at("switched")) sr.switched[line_index(k)] = 1;
      rep.scenarios.push_back(std::move(sr));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  recompute_costs(rep, net);
  return rep;
}

}  // namespace topoctl
