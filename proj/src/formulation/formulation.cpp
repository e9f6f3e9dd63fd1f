#include "formulation/formulation.hpp"

#include <cmath>

#include "common/errors.hpp"

namespace topoctl {

using milp::kInf;
using milp::Sense;
using milp::Term;

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::Deterministic: return "deterministic";
    case Kind::Preventive: return "preventive";
    case Kind::Corrective: return "corrective";
  }
  return "unknown";
}

Kind parse_kind(const std::string& text) {
  if (text == "deterministic") return Kind::Deterministic;
  if (text == "preventive") return Kind::Preventive;
  if (text == "corrective") return Kind::Corrective;
  throw ArgumentError("unknown formulation '" + text + "' (expected deterministic, preventive or corrective)");
}

std::vector<int> Layout::first_stage() const {
  std::vector<int> out;
  for (int v : pg)
    if (v >= 0) out.push_back(v);
  if (kind == Kind::Preventive)
    for (int v : sw)
      if (v >= 0) out.push_back(v);
  return out;
}

namespace {

bool has_generator(const Bus& b) { return b.gen_upper > 0.0 || b.gen_lower != 0.0; }

// active = constant + coef * var (var < 0: constant only)
struct Activity {
  double constant = 1.0;
  double coef = 0.0;
  int var = -1;
};

class Builder {
public:
  Builder(const Network& net, const FormulationConfig& cfg) : net_(net), cfg_(cfg) {
    if (cfg.budget < 0) throw ArgumentError("budget must be nonnegative");
    big_m_ = cfg.big_m > 0.0 ? cfg.big_m : big_m_theta(net);
    built_.layout.kind = cfg.kind;
    built_.layout.budget = cfg.budget;
    built_.layout.load_scaling = cfg.load_scaling;
    built_.layout.big_m = big_m_;
  }

  void first_stage() {
    auto& m = built_.model;
    auto& lay = built_.layout;
    const auto& buses = net_.buses();
    const auto& lines = net_.lines();
    lay.pg.assign(buses.size(), -1);
    for (std::size_t i = 0; i < buses.size(); ++i) {
      const Bus& b = buses[i];
      if (!has_generator(b)) continue;
      lay.pg[i] = m.add_variable("pg_" + std::to_string(b.id), b.gen_lower, b.gen_upper, false, b.gen_cost);
    }
    lay.sw.assign(lines.size(), -1);
    if (cfg_.kind == Kind::Corrective) return;
    std::vector<Term> budget;
    double rhs = cfg_.budget;
    for (std::size_t l = 0; l < lines.size(); ++l) {
      const Line& ln = lines[l];
      const std::string tag = ln.key().str();
      if (cfg_.kind == Kind::Deterministic) {
        // z = 1 keeps the line closed; switching an on-line costs 1 - z.
        lay.sw[l] = m.add_binary("z_" + tag);
        if (ln.initially_on) {
          budget.push_back({lay.sw[l], -1.0});
          rhs -= 1.0;
        } else {
          budget.push_back({lay.sw[l], 1.0});
        }
      } else {
        lay.sw[l] = m.add_binary((ln.initially_on ? "zon_" : "zoff_") + tag);
        budget.push_back({lay.sw[l], 1.0});
      }
    }
    if (!budget.empty()) m.add_constraint("budget", budget, Sense::LessEqual, rhs);
  }

  void scenario(const OutageScenario* sc, int id, double prob) {
    auto& m = built_.model;
    auto& lay = built_.layout;
    const auto& buses = net_.buses();
    const auto& lines = net_.lines();
    const bool recourse = cfg_.kind != Kind::Deterministic;
    const std::string sfx = recourse ? "_s" + std::to_string(id) : "";

    ScenarioBlock blk;
    blk.id = id;
    blk.probability = prob;
    blk.theta.assign(buses.size(), -1);
    blk.ramp_up.assign(buses.size(), -1);
    blk.ramp_down.assign(buses.size(), -1);
    blk.shed.assign(buses.size(), -1);
    blk.flow.assign(lines.size(), -1);
    blk.sw.assign(lines.size(), -1);

    for (std::size_t i = 0; i < buses.size(); ++i) {
      const Bus& b = buses[i];
      const std::string tag = std::to_string(b.id) + sfx;
      const bool ref = i == net_.reference_index();
      blk.theta[i] = m.add_variable("th_" + tag, ref ? 0.0 : -kInf, ref ? 0.0 : kInf);
      if (!recourse) continue;
      if (has_generator(b)) {
        const double span = b.gen_upper - b.gen_lower;
        blk.ramp_up[i] = m.add_variable("rup_" + tag, 0.0, span, false, prob * (b.ramp_cost + b.gen_cost));
        blk.ramp_down[i] = m.add_variable("rdn_" + tag, 0.0, span, false, prob * b.ramp_cost);
        m.add_constraint(
            "gen_" + tag, {{lay.pg[i], 1.0}, {blk.ramp_up[i], 1.0}, {blk.ramp_down[i], -1.0}}, Sense::GreaterEqual,
            b.gen_lower);
        m.add_constraint("genmax_" + tag, {{lay.pg[i], 1.0}, {blk.ramp_up[i], 1.0}, {blk.ramp_down[i], -1.0}},
                         Sense::LessEqual, b.gen_upper);
      }
      if (b.demand > 0.0) blk.shed[i] = m.add_variable("shed_" + tag, 0.0, b.demand, false, prob * b.voll);
    }

    std::vector<Term> budget;
    for (std::size_t l = 0; l < lines.size(); ++l) {
      const Line& ln = lines[l];
      const std::string tag = ln.key().str() + sfx;
      const bool in_service = sc == nullptr || sc->in_service(ln.key());
      Activity act;
      if (cfg_.kind == Kind::Deterministic) {
        act = {0.0, 1.0, lay.sw[l]};
      } else {
        int z = lay.sw[l];
        if (cfg_.kind == Kind::Corrective) {
          z = blk.sw[l] = m.add_binary((ln.initially_on ? "zon_" : "zoff_") + tag);
          budget.push_back({z, 1.0});
        }
        if (!in_service)
          act = {0.0, 0.0, -1};
        else if (ln.initially_on)
          act = {1.0, -1.0, z};
        else
          act = {0.0, 1.0, z};
      }
      add_line(blk, l, tag, act);
    }
    if (!budget.empty()) m.add_constraint("budget" + sfx, budget, Sense::LessEqual, cfg_.budget);

    // balance: injections = net outflow
    std::vector<std::vector<Term>> rows(buses.size());
    for (std::size_t i = 0; i < buses.size(); ++i) {
      if (lay.pg[i] >= 0) rows[i].push_back({lay.pg[i], 1.0});
      if (blk.ramp_up[i] >= 0) rows[i].push_back({blk.ramp_up[i], 1.0});
      if (blk.ramp_down[i] >= 0) rows[i].push_back({blk.ramp_down[i], -1.0});
      if (blk.shed[i] >= 0) rows[i].push_back({blk.shed[i], 1.0});
    }
    for (std::size_t l = 0; l < lines.size(); ++l) {
      rows[net_.bus_index(lines[l].from)].push_back({blk.flow[l], -1.0});
      rows[net_.bus_index(lines[l].to)].push_back({blk.flow[l], 1.0});
    }
    for (std::size_t i = 0; i < buses.size(); ++i)
      m.add_constraint("bal_" + std::to_string(buses[i].id) + sfx, rows[i], Sense::Equal, buses[i].demand);

    lay.blocks.push_back(std::move(blk));
  }

  BuiltModel take() { return std::move(built_); }

private:
  void add_line(ScenarioBlock& blk, std::size_t l, const std::string& tag, const Activity& act) {
    auto& m = built_.model;
    const Line& ln = net_.lines()[l];
    const double t = ln.thermal;
    const double b = ln.susceptance;
    const double bm = std::abs(b) * big_m_;
    const int ti = blk.theta[net_.bus_index(ln.from)];
    const int tj = blk.theta[net_.bus_index(ln.to)];

    if (act.var < 0) {
      const bool on = act.constant > 0.5;
      blk.flow[l] = m.add_variable("p_" + tag, on ? -t : 0.0, on ? t : 0.0);
      const std::vector<Term> phys{{blk.flow[l], 1.0}, {ti, b}, {tj, -b}};
      if (on) {
        m.add_constraint("dc_" + tag, phys, Sense::Equal, 0.0);
      } else {
        m.add_constraint("dcu_" + tag, phys, Sense::LessEqual, bm);
        m.add_constraint("dcl_" + tag, phys, Sense::GreaterEqual, -bm);
      }
      return;
    }
    blk.flow[l] = m.add_variable("p_" + tag, -t, t);
    // |p + b theta_ij| <= |b| M (1 - active);  |p| <= t active
    const double slack = 1.0 - act.constant;
    m.add_constraint("dcu_" + tag, {{blk.flow[l], 1.0}, {ti, b}, {tj, -b}, {act.var, bm * act.coef}}, Sense::LessEqual,
                     bm * slack);
    m.add_constraint("dcl_" + tag, {{blk.flow[l], 1.0}, {ti, b}, {tj, -b}, {act.var, -bm * act.coef}},
                     Sense::GreaterEqual, -bm * slack);
    m.add_constraint("thu_" + tag, {{blk.flow[l], 1.0}, {act.var, -t * act.coef}}, Sense::LessEqual, t * act.constant);
    m.add_constraint("thl_" + tag, {{blk.flow[l], 1.0}, {act.var, t * act.coef}}, Sense::GreaterEqual,
                     -t * act.constant);
  }

  const Network& net_;
  const FormulationConfig& cfg_;
  double big_m_ = 0.0;
  BuiltModel built_;
};

Network prepared(const Network& net, const FormulationConfig& cfg) {
  return cfg.load_scaling == 1.0 ? net : scale_loads(net, cfg.load_scaling);
}

BuiltModel build_two_stage(const Network& net, const ScenarioSet& scenarios, FormulationConfig cfg, Kind kind) {
  if (scenarios.empty())
    throw ArgumentError("empty scenario set; use the deterministic formulation for a single nominal topology");
  cfg.kind = kind;
  const Network scaled = prepared(net, cfg);
  Builder b(scaled, cfg);
  b.first_stage();
  for (std::size_t s = 0; s < scenarios.size(); ++s)
    b.scenario(&scenarios.scenarios[s], scenarios.scenarios[s].id, scenarios.probabilities[s]);
  return b.take();
}

}  // namespace

BuiltModel build_deterministic(const Network& net, const FormulationConfig& cfg) {
  FormulationConfig c = cfg;
  c.kind = Kind::Deterministic;
  const Network scaled = prepared(net, c);
  Builder b(scaled, c);
  b.first_stage();
  b.scenario(nullptr, 0, 1.0);
  return b.take();
}

BuiltModel build_preventive(const Network& net, const ScenarioSet& scenarios, const FormulationConfig& cfg) {
  return build_two_stage(net, scenarios, cfg, Kind::Preventive);
}

BuiltModel build_corrective(const Network& net, const ScenarioSet& scenarios, const FormulationConfig& cfg) {
  return build_two_stage(net, scenarios, cfg, Kind::Corrective);
}

BuiltModel build(const Network& net, const ScenarioSet& scenarios, const FormulationConfig& cfg) {
  switch (cfg.kind) {
    case Kind::Deterministic: return build_deterministic(net, cfg);
    case Kind::Preventive: return build_preventive(net, scenarios, cfg);
    case Kind::Corrective: return build_corrective(net, scenarios, cfg);
  }
  throw ArgumentError("unknown formulation kind");
}

BuiltModel build_scenario(const Network& net, const ScenarioSet& scenarios, std::size_t s,
                          const FormulationConfig& cfg) {
  if (s >= scenarios.size()) throw ArgumentError("scenario index out of range");
  if (cfg.kind == Kind::Deterministic) throw ArgumentError("scenario subproblems need a two-stage formulation");
  const Network scaled = prepared(net, cfg);
  Builder b(scaled, cfg);
  b.first_stage();
  b.scenario(&scenarios.scenarios[s], scenarios.scenarios[s].id, 1.0);
  return b.take();
}

void add_proximal_terms(BuiltModel& built, const std::vector<double>& anchor, const std::vector<double>& rho,
                        const std::vector<double>& penalty) {
  const std::vector<int> x = built.layout.first_stage();
  if (anchor.size() != x.size() || rho.size() != x.size() || penalty.size() != x.size())
    throw ArgumentError("proximal terms: expected " + std::to_string(x.size()) + " first-stage entries, got " +
                        std::to_string(anchor.size()) + "/" + std::to_string(rho.size()) + "/" +
                        std::to_string(penalty.size()));
  auto& m = built.model;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const int v = x[k];
    const double a = anchor[k];
    const double half = 0.5 * penalty[k];
    m.add_cost(v, rho[k]);
    m.add_constant(-rho[k] * a + half * a * a);
    if (m.variables()[static_cast<std::size_t>(v)].integer) {
      m.add_cost(v, half * (1.0 - 2.0 * a));
    } else if (half > 0.0) {
      m.add_quadratic(v, half);
      m.add_cost(v, -2.0 * half * a);
    }
  }
}

BuiltModel build_ph_subproblem(const Network& net, const ScenarioSet& scenarios, std::size_t s,
                               const FormulationConfig& cfg, const std::vector<double>& anchor,
                               const std::vector<double>& rho, const std::vector<double>& penalty) {
  BuiltModel built = build_scenario(net, scenarios, s, cfg);
  add_proximal_terms(built, anchor, rho, penalty);
  return built;
}

}  // namespace topoctl
