#include "relumip/milp_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace relumip {

void LinearExpr::normalize() {
  std::stable_sort(terms.begin(), terms.end(),
                   [](const LinearTerm& a, const LinearTerm& b) { return a.var < b.var; });
  std::vector<LinearTerm> merged;
  merged.reserve(terms.size());
  for (const auto& t : terms) {
    if (!merged.empty() && merged.back().var == t.var)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(t);
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const LinearTerm& t) { return t.coeff == 0.0; }),
               merged.end());
  terms = std::move(merged);
}

LinearExpr operator+(LinearExpr a, const LinearExpr& b) {
  a.terms.insert(a.terms.end(), b.terms.begin(), b.terms.end());
  a.constant += b.constant;
  a.normalize();
  return a;
}

void MilpModel::check_mutable() const {
  if (frozen_) throw std::logic_error("model is frozen");
}

void MilpModel::check_expr(const LinearExpr& e) const {
  for (const auto& t : e.terms) {
    if (t.var < 0 || t.var >= num_vars())
      throw std::invalid_argument("unknown variable id " + std::to_string(t.var));
    if (!std::isfinite(t.coeff))
      throw std::invalid_argument("non-finite coefficient on variable " +
                                  std::to_string(t.var));
  }
  if (!std::isfinite(e.constant))
    throw std::invalid_argument("non-finite constant in expression");
}

VarId MilpModel::add_var(VarSpec spec) {
  check_mutable();
  if (std::isnan(spec.lower) || std::isnan(spec.upper) || spec.lower > spec.upper)
    throw std::invalid_argument("variable \"" + spec.name + "\": invalid bounds [" +
                                std::to_string(spec.lower) + ", " +
                                std::to_string(spec.upper) + "]");
  if (spec.kind == VarKind::Binary && (spec.lower < 0.0 || spec.upper > 1.0))
    throw std::invalid_argument("variable \"" + spec.name +
                                "\": binary bounds must lie within [0, 1]");
  vars_.push_back(std::move(spec));
  return static_cast<VarId>(vars_.size() - 1);
}

int MilpModel::add_constraint(Constraint c) {
  check_mutable();
  check_expr(c.expr);
  if (!std::isfinite(c.rhs)) throw std::invalid_argument("non-finite constraint rhs");
  c.expr.normalize();
  constraints_.push_back(std::move(c));
  return static_cast<int>(constraints_.size() - 1);
}

int MilpModel::add_indicator(IndicatorConstraint ic) {
  check_mutable();
  if (ic.guard < 0 || ic.guard >= num_vars())
    throw std::invalid_argument("unknown guard variable id " + std::to_string(ic.guard));
  if (var(ic.guard).kind != VarKind::Binary)
    throw std::invalid_argument("indicator guard \"" + var(ic.guard).name +
                                "\" is not binary");
  if (ic.guard_value != 0 && ic.guard_value != 1)
    throw std::invalid_argument("indicator guard value must be 0 or 1");
  check_expr(ic.implied.expr);
  if (!std::isfinite(ic.implied.rhs))
    throw std::invalid_argument("non-finite indicator rhs");
  ic.implied.expr.normalize();
  indicators_.push_back(std::move(ic));
  return static_cast<int>(indicators_.size() - 1);
}

int MilpModel::add_objective(Objective o) {
  check_mutable();
  check_expr(o.expr);
  o.expr.normalize();
  objectives_.push_back(std::move(o));
  return static_cast<int>(objectives_.size() - 1);
}

void MilpModel::clear_objectives() {
  check_mutable();
  objectives_.clear();
}

void MilpModel::restrict_bounds(VarId id, double lo, double hi) {
  check_mutable();
  if (id < 0 || id >= num_vars())
    throw std::invalid_argument("unknown variable id " + std::to_string(id));
  auto& v = vars_[static_cast<std::size_t>(id)];
  v.lower = std::max(v.lower, lo);
  v.upper = std::min(v.upper, hi);
}

Interval var_interval(const MilpModel& model, const BoundsMap& bounds, VarId id) {
  const VarSpec& v = model.var(id);
  Interval iv{v.lower, v.upper};
  if (auto it = bounds.find(id); it != bounds.end()) {
    iv.lo = std::max(iv.lo, it->second.lo);
    iv.hi = std::min(iv.hi, it->second.hi);
  }
  return iv;
}

namespace {

// Tight upper bound of expr over the variable intervals; +inf when some
// needed bound is missing.
double expr_sup(const MilpModel& model, const BoundsMap& bounds, const LinearExpr& e,
                VarId* offender) {
  double sup = e.constant;
  for (const auto& t : e.terms) {
    const Interval iv = var_interval(model, bounds, t.var);
    const double edge = t.coeff > 0 ? iv.hi : iv.lo;
    const double contrib = t.coeff * edge;
    if (!std::isfinite(contrib)) {
      if (offender) *offender = t.var;
      return kInf;
    }
    sup += contrib;
  }
  return sup;
}

// expr <= rhs under guard == value, as a single big-M row.
Constraint lower_one(const MilpModel& model, const BoundsMap& bounds,
                     const LinearExpr& expr, double rhs, VarId guard, int value) {
  VarId offender = -1;
  const double sup = expr_sup(model, bounds, expr, &offender);
  if (!std::isfinite(sup))
    throw std::invalid_argument(
        "cannot lower indicator: variable \"" + model.var(offender).name +
        "\" has no finite bound, big-M would be unsound");
  const double big_m = std::max(0.0, sup - rhs);

  Constraint c;
  c.expr = expr;
  c.sense = Sense::Le;
  if (value == 1) {
    // expr <= rhs + M * (1 - guard)
    c.expr.add(big_m, guard);
    c.rhs = rhs + big_m;
  } else {
    // expr <= rhs + M * guard
    c.expr.add(-big_m, guard);
    c.rhs = rhs;
  }
  c.expr.normalize();
  return c;
}

}  // namespace

std::vector<Constraint> lower_indicator(const MilpModel& model, const BoundsMap& bounds,
                                        const IndicatorConstraint& ic) {
  const Constraint& imp = ic.implied;
  // Fold the expression constant into the rhs before bounding.
  LinearExpr e = imp.expr;
  const double rhs = imp.rhs - e.constant;
  e.constant = 0.0;
  LinearExpr neg;
  for (const auto& t : e.terms) neg.add(-t.coeff, t.var);

  std::vector<Constraint> rows;
  if (imp.sense == Sense::Le || imp.sense == Sense::Eq)
    rows.push_back(lower_one(model, bounds, e, rhs, ic.guard, ic.guard_value));
  if (imp.sense == Sense::Ge || imp.sense == Sense::Eq)
    rows.push_back(lower_one(model, bounds, neg, -rhs, ic.guard, ic.guard_value));
  return rows;
}

std::vector<Constraint> implied_rows(const IndicatorConstraint& ic) {
  const Constraint& imp = ic.implied;
  LinearExpr e = imp.expr;
  const double rhs = imp.rhs - e.constant;
  e.constant = 0.0;
  LinearExpr neg;
  for (const auto& t : e.terms) neg.add(-t.coeff, t.var);
  neg.normalize();

  std::vector<Constraint> rows;
  if (imp.sense == Sense::Le || imp.sense == Sense::Eq)
    rows.push_back(Constraint{e, Sense::Le, rhs});
  if (imp.sense == Sense::Ge || imp.sense == Sense::Eq)
    rows.push_back(Constraint{neg, Sense::Le, -rhs});
  return rows;
}

MilpModel lower_indicators(const MilpModel& model, const BoundsMap& bounds) {
  MilpModel out;
  for (const auto& v : model.vars()) out.add_var(v);
  for (const auto& c : model.constraints()) out.add_constraint(c);
  for (const auto& o : model.objectives()) out.add_objective(o);
  for (const auto& ic : model.indicators())
    for (auto& row : lower_indicator(model, bounds, ic)) out.add_constraint(std::move(row));
  if (model.frozen()) out.freeze();
  return out;
}

namespace {

std::string var_name(const MilpModel& m, VarId id) {
  const auto& v = m.var(id);
  return v.name.empty() ? "v" + std::to_string(id) : v.name;
}

void print_expr(std::ostringstream& os, const MilpModel& m, const LinearExpr& e) {
  bool first = true;
  for (const auto& t : e.terms) {
    if (!first) os << (t.coeff < 0 ? " - " : " + ");
    else if (t.coeff < 0) os << "-";
    first = false;
    const double a = std::abs(t.coeff);
    if (a != 1.0) os << a << "*";
    os << var_name(m, t.var);
  }
  if (e.constant != 0.0 || first) {
    if (!first) os << (e.constant < 0 ? " - " : " + ");
    else if (e.constant < 0) os << "-";
    os << std::abs(e.constant);
  }
}

const char* sense_str(Sense s) {
  switch (s) {
    case Sense::Le: return "<=";
    case Sense::Eq: return "=";
    case Sense::Ge: return ">=";
  }
  return "?";
}

}  // namespace

std::string to_text(const MilpModel& m) {
  std::ostringstream os;
  os << "vars " << m.num_vars() << " constraints " << m.constraints().size()
     << " indicators " << m.indicators().size() << " objectives "
     << m.objectives().size() << "\n";
  for (VarId j = 0; j < m.num_vars(); ++j) {
    const auto& v = m.var(j);
    os << "var " << var_name(m, j)
       << (v.kind == VarKind::Binary ? " binary [" : " continuous [") << v.lower
       << ", " << v.upper << "]\n";
  }
  for (std::size_t i = 0; i < m.constraints().size(); ++i) {
    const auto& c = m.constraints()[i];
    os << "c" << i << ": ";
    print_expr(os, m, c.expr);
    os << " " << sense_str(c.sense) << " " << c.rhs << "\n";
  }
  for (std::size_t i = 0; i < m.indicators().size(); ++i) {
    const auto& ic = m.indicators()[i];
    os << "i" << i << ": " << var_name(m, ic.guard) << " == " << ic.guard_value
       << " -> ";
    print_expr(os, m, ic.implied.expr);
    os << " " << sense_str(ic.implied.sense) << " " << ic.implied.rhs << "\n";
  }
  for (std::size_t i = 0; i < m.objectives().size(); ++i) {
    const auto& o = m.objectives()[i];
    os << "obj" << i << ": "
       << (o.sense == ObjSense::Minimize ? "minimize " : "maximize ");
    print_expr(os, m, o.expr);
    os << "\n";
  }
  return os.str();
}

}  // namespace relumip
