#include "milp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "common/errors.hpp"

namespace topoctl::milp {

int Model::add_variable(std::string name, double lower, double upper, bool integer, double cost) {
  if (lower > upper) throw ArgumentError("variable " + name + ": lower bound exceeds upper bound");
  vars_.push_back({std::move(name), lower, upper, integer});
  linear_.push_back(cost);
  quad_.push_back(0.0);
  return static_cast<int>(vars_.size() - 1);
}

int Model::add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs) {
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  for (const Term& t : terms) {
    if (t.var < 0 || static_cast<std::size_t>(t.var) >= vars_.size())
      throw ArgumentError("constraint " + name + " references undeclared variable " + std::to_string(t.var));
    if (!merged.empty() && merged.back().var == t.var)
      merged.back().coef += t.coef;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  rows_.push_back({std::move(name), std::move(merged), sense, rhs});
  return static_cast<int>(rows_.size() - 1);
}

void Model::add_quadratic(int var, double coef) {
  if (coef < 0.0) throw ArgumentError("quadratic objective coefficients must be nonnegative");
  quad_.at(static_cast<std::size_t>(var)) += coef;
}

void Model::set_bounds(int var, double lower, double upper) {
  if (lower > upper) throw ArgumentError("set_bounds: lower bound exceeds upper bound");
  auto& v = vars_.at(static_cast<std::size_t>(var));
  v.lower = lower;
  v.upper = upper;
}

std::size_t Model::num_integers() const {
  return static_cast<std::size_t>(std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return v.integer; }));
}

bool Model::has_quadratic() const {
  return std::any_of(quad_.begin(), quad_.end(), [](double q) { return q != 0.0; });
}

double Model::objective_value(const std::vector<double>& x) const {
  double obj = constant_;
  for (std::size_t j = 0; j < vars_.size(); ++j) obj += linear_[j] * x[j] + quad_[j] * x[j] * x[j];
  return obj;
}

Model lp_relaxation(const Model& model) {
  Model relaxed = model;
  for (std::size_t j = 0; j < relaxed.num_variables(); ++j) relaxed.set_integer(static_cast<int>(j), false);
  return relaxed;
}

double verify_solution(const Model& model, const std::vector<double>& values) {
  if (values.size() < model.num_variables())
    throw ArgumentError("verify_solution: " + std::to_string(values.size()) + " values for " +
                        std::to_string(model.num_variables()) + " variables");
  double worst = -kInf;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variables()[j];
    if (std::isfinite(v.lower)) worst = std::max(worst, v.lower - values[j]);
    if (std::isfinite(v.upper)) worst = std::max(worst, values[j] - v.upper);
  }
  for (const auto& c : model.constraints()) {
    double activity = 0.0;
    for (const Term& t : c.terms) activity += t.coef * values[static_cast<std::size_t>(t.var)];
    switch (c.sense) {
      case Sense::LessEqual: worst = std::max(worst, activity - c.rhs); break;
      case Sense::GreaterEqual: worst = std::max(worst, c.rhs - activity); break;
      case Sense::Equal: worst = std::max(worst, std::abs(activity - c.rhs)); break;
    }
  }
  return worst == -kInf ? 0.0 : worst;
}

double integrality_violation(const Model& model, const std::vector<double>& values) {
  double worst = 0.0;
  for (std::size_t j = 0; j < model.num_variables(); ++j)
    if (model.variables()[j].integer) worst = std::max(worst, std::abs(values[j] - std::round(values[j])));
  return worst;
}

namespace {

std::string lp_name(const std::string& name, std::size_t j) {
  if (name.empty()) return "x" + std::to_string(j);
  std::string out;
  for (char c : name) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ? c : '_');
  if (std::isdigit(static_cast<unsigned char>(out.front())) || out.front() == '.') out.insert(out.begin(), 'v');
  return out;
}

void write_num(std::ostringstream& os, double v) {
  if (v == kInf)
    os << "inf";
  else if (v == -kInf)
    os << "-inf";
  else
    os << v;
}

}  // namespace

std::string to_lp_format(const Model& model) {
  std::ostringstream os;
  os.precision(17);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < model.num_variables(); ++j) names.push_back(lp_name(model.variables()[j].name, j));

  os << "Minimize\n obj:";
  bool any = false;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    if (model.linear()[j] == 0.0) continue;
    os << (model.linear()[j] < 0 ? " - " : " + ") << std::abs(model.linear()[j]) << ' ' << names[j];
    any = true;
  }
  if (model.has_quadratic()) {
    os << " + [";
    for (std::size_t j = 0; j < model.num_variables(); ++j)
      if (model.quadratic()[j] != 0.0) os << " + " << 2.0 * model.quadratic()[j] << ' ' << names[j] << " ^2";
    os << " ] / 2";
    any = true;
  }
  if (model.constant() != 0.0) {
    os << (model.constant() < 0 ? " - " : " + ") << std::abs(model.constant());
    any = true;
  }
  if (!any) os << " 0 " << (names.empty() ? "x0" : names[0]);
  os << "\nSubject To\n";
  for (std::size_t i = 0; i < model.num_constraints(); ++i) {
    const auto& c = model.constraints()[i];
    os << ' ' << (c.name.empty() ? "c" + std::to_string(i) : lp_name(c.name, i)) << ':';
    if (c.terms.empty()) os << " 0 " << (names.empty() ? "x0" : names[0]);
    for (const Term& t : c.terms)
      os << (t.coef < 0 ? " - " : " + ") << std::abs(t.coef) << ' ' << names[static_cast<std::size_t>(t.var)];
    os << (c.sense == Sense::LessEqual ? " <= " : c.sense == Sense::GreaterEqual ? " >= " : " = ") << c.rhs << '\n';
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variables()[j];
    if (v.lower == -kInf && v.upper == kInf) {
      os << ' ' << names[j] << " free\n";
      continue;
    }
    os << ' ';
    write_num(os, v.lower);
    os << " <= " << names[j] << " <= ";
    write_num(os, v.upper);
    os << '\n';
  }
  bool header = false;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    if (!model.variables()[j].integer) continue;
    if (!header) os << "General\n";
    header = true;
    os << ' ' << names[j] << '\n';
  }
  os << "End\n";
  return os.str();
}

}  // namespace topoctl::milp
