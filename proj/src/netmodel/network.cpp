#include "netmodel/network.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "common/errors.hpp"
#include "json.hpp"

namespace topoctl {

std::string LineKey::str() const {
  return "(" + std::to_string(from) + "," + std::to_string(to) + "," + std::to_string(circuit) + ")";
}

Network::Network(std::vector<Bus> buses, std::vector<Line> lines, double base_mva)
    : buses_(std::move(buses)), lines_(std::move(lines)), base_mva_(base_mva) {
  if (buses_.empty()) throw ValidationError("network has no buses");
  if (!(base_mva_ > 0.0)) throw ValidationError("base_mva must be positive");

  int references = 0;
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    const Bus& b = buses_[i];
    if (!bus_lookup_.emplace(b.id, i).second)
      throw ValidationError("duplicate bus id " + std::to_string(b.id));
    if (b.gen_lower > b.gen_upper)
      throw ValidationError("bus " + std::to_string(b.id) + ": gen_lower exceeds gen_upper");
    if (b.demand < 0.0) throw ValidationError("bus " + std::to_string(b.id) + ": negative demand");
    if (b.is_reference) {
      ++references;
      reference_ = i;
    }
  }
  if (references != 1)
    throw ValidationError("expected exactly one reference bus, found " + std::to_string(references));

  for (std::size_t e = 0; e < lines_.size(); ++e) {
    const Line& l = lines_[e];
    if (!bus_lookup_.count(l.from) || !bus_lookup_.count(l.to))
      throw ValidationError("line " + l.key().str() + " references an unknown bus");
    if (!(l.thermal > 0.0)) throw ValidationError("line " + l.key().str() + ": thermal limit must be positive");
    if (!(l.angle_limit > 0.0)) throw ValidationError("line " + l.key().str() + ": angle limit must be positive");
    if (l.susceptance == 0.0) throw ValidationError("line " + l.key().str() + ": zero susceptance");
    if (!line_lookup_.emplace(l.key(), e).second)
      throw ValidationError("duplicate line " + l.key().str());
  }
}

std::size_t Network::bus_index(int id) const {
  auto it = bus_lookup_.find(id);
  if (it == bus_lookup_.end()) throw ValidationError("unknown bus " + std::to_string(id));
  return it->second;
}

std::optional<std::size_t> Network::find_line(const LineKey& key) const {
  auto it = line_lookup_.find(key);
  if (it == line_lookup_.end()) return std::nullopt;
  return it->second;
}

double Network::total_demand() const {
  return std::accumulate(buses_.begin(), buses_.end(), 0.0,
                         [](double acc, const Bus& b) { return acc + b.demand; });
}

bool Network::initially_connected() const {
  std::vector<std::size_t> parent(buses_.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = buses_.size();
  for (const Line& l : lines_) {
    if (!l.initially_on) continue;
    auto a = find(bus_index(l.from));
    auto b = find(bus_index(l.to));
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

std::vector<std::string> Network::warnings() const {
  std::vector<std::string> out;
  if (!initially_connected()) out.emplace_back("network is not connected on its initially-on lines");
  return out;
}

// ---------------------------------------------------------------------------
// MATPOWER subset

namespace {

struct Table {
  std::vector<std::vector<double>> rows;
  std::vector<int> row_lines;
};

std::string strip_comment(const std::string& line) {
  // '%' starts a comment; MATPOWER strings in the tables we read never contain it.
  auto pos = line.find('%');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

double parse_number(const std::string& tok, int line) {
  if (tok == "Inf" || tok == "inf") return std::numeric_limits<double>::infinity();
  if (tok == "-Inf" || tok == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("malformed number '" + tok + "'", line);
  }
}

class CaseReader {
public:
  explicit CaseReader(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) lines_.push_back(strip_comment(line));
  }

  std::optional<double> scalar(const std::string& name) const {
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      const auto& l = lines_[i];
      auto pos = l.find(name);
      if (pos == std::string::npos) continue;
      auto eq = l.find('=', pos + name.size());
      if (eq == std::string::npos) continue;
      std::string rest = l.substr(pos + name.size(), eq - pos - name.size());
      if (rest.find_first_not_of(" \t") != std::string::npos) continue;
      std::string value = l.substr(eq + 1);
      value.erase(std::remove_if(value.begin(), value.end(), [](char c) { return c == ';' || std::isspace(static_cast<unsigned char>(c)); }),
                  value.end());
      return parse_number(value, static_cast<int>(i + 1));
    }
    return std::nullopt;
  }

  std::optional<Table> table(const std::string& name) const {
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      const auto& l = lines_[i];
      auto pos = l.find(name);
      if (pos == std::string::npos) continue;
      auto eq = l.find('=', pos + name.size());
      if (eq == std::string::npos) continue;
      std::string rest = l.substr(pos + name.size(), eq - pos - name.size());
      if (rest.find_first_not_of(" \t") != std::string::npos) continue;
      auto open = l.find('[', eq);
      if (open == std::string::npos) throw ParseError("expected '[' after " + name, static_cast<int>(i + 1));
      return read_rows(i, open + 1, name);
    }
    return std::nullopt;
  }

private:
  Table read_rows(std::size_t line_idx, std::size_t col, const std::string& name) const {
    Table t;
    std::vector<double> current;
    int current_line = 0;
    auto flush = [&](int line) {
      if (current.empty()) return;
      if (!t.rows.empty() && t.rows.front().size() != current.size())
        throw ParseError(name + ": row has " + std::to_string(current.size()) + " columns, expected " +
                             std::to_string(t.rows.front().size()),
                         line);
      t.rows.push_back(std::move(current));
      t.row_lines.push_back(line);
      current.clear();
    };
    for (std::size_t i = line_idx; i < lines_.size(); ++i) {
      const std::string& l = lines_[i];
      std::size_t p = (i == line_idx) ? col : 0;
      const int lineno = static_cast<int>(i + 1);
      std::string tok;
      auto emit = [&] {
        if (tok.empty()) return;
        if (current.empty()) current_line = lineno;
        current.push_back(parse_number(tok, lineno));
        tok.clear();
      };
      for (; p < l.size(); ++p) {
        char c = l[p];
        if (c == ']') {
          emit();
          flush(current_line);
          return t;
        }
        if (c == ';') {
          emit();
          flush(current_line);
        } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
          emit();
        } else {
          tok.push_back(c);
        }
      }
      emit();
      flush(current_line);  // a newline also terminates a row
    }
    throw ParseError(name + ": missing closing ']'", static_cast<int>(line_idx + 1));
  }

  std::vector<std::string> lines_;
};

void require_columns(const Table& t, std::size_t n, const std::string& name) {
  if (!t.rows.empty() && t.rows.front().size() < n)
    throw ParseError(name + ": expected at least " + std::to_string(n) + " columns", t.row_lines.front());
}

// Linear cost coefficient in $/MWh from one gencost row.
double linear_cost(const std::vector<double>& row, int line) {
  if (row.size() < 4) throw ParseError("gencost: row too short", line);
  const int model = static_cast<int>(row[0]);
  const int n = static_cast<int>(row[3]);
  if (model == 2) {
    if (n < 1 || row.size() < 4 + static_cast<std::size_t>(n)) throw ParseError("gencost: bad polynomial", line);
    // Coefficients run from highest order down to c0; we keep c1.
    return n >= 2 ? row[4 + n - 2] : 0.0;
  }
  if (model == 1) {
    if (n < 2 || row.size() < 4 + 2 * static_cast<std::size_t>(n)) throw ParseError("gencost: bad piecewise table", line);
    const double x0 = row[4], y0 = row[5];
    const double x1 = row[4 + 2 * (n - 1)], y1 = row[5 + 2 * (n - 1)];
    return x1 > x0 ? (y1 - y0) / (x1 - x0) : 0.0;
  }
  throw ParseError("gencost: unknown cost model " + std::to_string(model), line);
}

}  // namespace

Network parse_case(std::string_view text, const CaseOptions& options) {
  CaseReader reader(text);
  const double base = reader.scalar("mpc.baseMVA").value_or(100.0);
  auto bus_t = reader.table("mpc.bus");
  auto gen_t = reader.table("mpc.gen");
  auto branch_t = reader.table("mpc.branch");
  auto cost_t = reader.table("mpc.gencost");
  if (!bus_t || !gen_t || !branch_t || !cost_t)
    throw ParseError("case must define mpc.bus, mpc.gen, mpc.branch and mpc.gencost tables");
  if (bus_t->rows.empty()) throw ParseError("mpc.bus is empty");
  require_columns(*bus_t, 3, "mpc.bus");
  require_columns(*gen_t, 10, "mpc.gen");
  require_columns(*branch_t, 11, "mpc.branch");
  if (cost_t->rows.size() < gen_t->rows.size())
    throw ParseError("mpc.gencost has fewer rows than mpc.gen");

  std::vector<Bus> buses;
  std::map<int, std::size_t> index;
  for (std::size_t r = 0; r < bus_t->rows.size(); ++r) {
    const auto& row = bus_t->rows[r];
    Bus b;
    b.id = static_cast<int>(row[0]);
    b.is_reference = static_cast<int>(row[1]) == 3;
    b.demand = row[2] / base;
    if (!index.emplace(b.id, buses.size()).second)
      throw ParseError("duplicate bus id " + std::to_string(b.id), bus_t->row_lines[r]);
    buses.push_back(b);
  }

  // Aggregate in-service generators per bus: bounds add, linear cost is the
  // capacity-weighted mean.
  struct Agg {
    double lower = 0, upper = 0, weighted_cost = 0, cost_sum = 0;
    int count = 0;
  };
  std::map<int, Agg> agg;
  for (std::size_t r = 0; r < gen_t->rows.size(); ++r) {
    const auto& row = gen_t->rows[r];
    if (row[7] <= 0) continue;
    const int bus = static_cast<int>(row[0]);
    if (!index.count(bus)) throw ValidationError("generator at unknown bus " + std::to_string(bus));
    const double cost = linear_cost(cost_t->rows[r], cost_t->row_lines[r]) * base;
    Agg& a = agg[bus];
    a.lower += row[9] / base;
    a.upper += row[8] / base;
    a.weighted_cost += cost * row[8] / base;
    a.cost_sum += cost;
    ++a.count;
  }
  for (auto& [bus, a] : agg) {
    Bus& b = buses[index[bus]];
    b.gen_lower = options.zero_gen_lower ? 0.0 : std::max(0.0, a.lower);
    b.gen_upper = a.upper;
    b.gen_cost = a.upper > 0 ? a.weighted_cost / a.upper : a.cost_sum / a.count;
  }

  std::vector<Line> lines;
  std::map<std::pair<int, int>, int> circuits;
  constexpr double kPi = 3.14159265358979323846;
  for (std::size_t r = 0; r < branch_t->rows.size(); ++r) {
    const auto& row = branch_t->rows[r];
    Line l;
    l.from = static_cast<int>(row[0]);
    l.to = static_cast<int>(row[1]);
    if (!index.count(l.from) || !index.count(l.to))
      throw ValidationError("branch on line " + std::to_string(branch_t->row_lines[r]) + " references an unknown bus");
    const double res = row[2], x = row[3];
    const double z2 = res * res + x * x;
    if (z2 == 0.0) throw ParseError("branch with zero impedance", branch_t->row_lines[r]);
    l.susceptance = -x / z2;
    l.conductance = res / z2;
    // rateA of 0 means unlimited in MATPOWER.
    l.thermal = row[5] > 0 ? row[5] / base : 9999.0 / base;
    double ang = 360.0;
    if (row.size() >= 13) {
      ang = std::max(std::abs(row[11]), std::abs(row[12]));
      if (ang <= 0.0 || ang > 360.0) ang = 360.0;
    }
    l.angle_limit = ang * kPi / 180.0;
    l.initially_on = row[10] > 0;
    auto pair = std::minmax(l.from, l.to);
    l.circuit = ++circuits[{pair.first, pair.second}];
    lines.push_back(l);
  }
  return Network(std::move(buses), std::move(lines), base);
}

// ---------------------------------------------------------------------------
// JSON

using nlohmann::json;

Network parse_network_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("network json: ") + e.what());
  }
  try {
    std::vector<Bus> buses;
    for (const auto& b : j.at("buses")) {
      Bus bus;
      bus.id = b.at("id").get<int>();
      bus.demand = b.value("demand", 0.0);
      bus.gen_lower = b.value("gen_lower", 0.0);
      bus.gen_upper = b.value("gen_upper", 0.0);
      bus.gen_cost = b.value("gen_cost", 0.0);
      bus.ramp_cost = b.value("ramp_cost", 0.0);
      bus.voll = b.value("voll", 0.0);
      bus.is_reference = b.value("is_reference", false);
      buses.push_back(bus);
    }
    std::vector<Line> lines;
    for (const auto& l : j.at("lines")) {
      Line line;
      line.from = l.at("from").get<int>();
      line.to = l.at("to").get<int>();
      line.circuit = l.value("circuit", 1);
      line.susceptance = l.at("susceptance").get<double>();
      line.conductance = l.value("conductance", 0.0);
      line.thermal = l.at("thermal").get<double>();
      line.angle_limit = l.at("angle_limit").get<double>();
      line.initially_on = l.value("initially_on", true);
      lines.push_back(line);
    }
    return Network(std::move(buses), std::move(lines), j.value("base_mva", 100.0));
  } catch (const json::exception& e) {
    throw ParseError(std::string("network json: ") + e.what());
  }
}

std::string network_to_json(const Network& net) {
  json j;
  j["base_mva"] = net.base_mva();
  json buses = json::array();
  for (const Bus& b : net.buses()) {
    buses.push_back({{"id", b.id},
                     {"demand", b.demand},
                     {"gen_lower", b.gen_lower},
                     {"gen_upper", b.gen_upper},
                     {"gen_cost", b.gen_cost},
                     {"ramp_cost", b.ramp_cost},
                     {"voll", b.voll},
                     {"is_reference", b.is_reference}});
  }
  json lines = json::array();
  for (const Line& l : net.lines()) {
    lines.push_back({{"from", l.from},
                     {"to", l.to},
                     {"circuit", l.circuit},
                     {"susceptance", l.susceptance},
                     {"conductance", l.conductance},
                     {"thermal", l.thermal},
                     {"angle_limit", l.angle_limit},
                     {"initially_on", l.initially_on}});
  }
  j["buses"] = std::move(buses);
  j["lines"] = std::move(lines);
  return j.dump(2);
}

Network load_network_file(const std::string& path, const CaseOptions& options) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open network file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (text.find("mpc.") != std::string::npos) return parse_case(text, options);
  return parse_network_json(text);
}

// ---------------------------------------------------------------------------

Network scale_loads(const Network& net, double factor) {
  if (!(factor > 0.0)) throw ArgumentError("load scaling factor must be positive");
  std::vector<Bus> buses = net.buses();
  for (Bus& b : buses) b.demand *= factor;
  return Network(std::move(buses), net.lines(), net.base_mva());
}

Network default_costs(const Network& net) {
  std::vector<Bus> buses = net.buses();
  double max_cost = 0.0;
  for (const Bus& b : buses) max_cost = std::max(max_cost, b.gen_cost);
  for (Bus& b : buses) {
    b.ramp_cost = 0.1 * b.gen_cost;
    b.voll = 10.0 * max_cost;
  }
  return Network(std::move(buses), net.lines(), net.base_mva());
}

Network fill_default_costs(const Network& net) {
  for (const Bus& b : net.buses())
    if (b.voll != 0.0) return net;
  return default_costs(net);
}

double big_m_theta(const Network& net) {
  if (net.lines().empty()) throw ArgumentError("big-M undefined for a network without lines");
  double limit = 0.0;
  for (const Line& l : net.lines()) limit = std::max(limit, l.angle_limit);
  return limit * static_cast<double>(net.num_lines());
}

}  // namespace topoctl
