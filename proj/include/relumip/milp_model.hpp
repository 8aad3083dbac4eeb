#pragma once
// Mixed-integer linear programs: variables, linear constraints, indicator
// constraints (guard binary = v implies a linear constraint), and ordered
// objectives for lexicographic solving. Indicators can be lowered to big-M
// rows given finite variable bounds.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "relumip/lp_solver.hpp"

namespace relumip {

using VarId = std::int32_t;

enum class VarKind : std::uint8_t { Continuous, Binary };

struct VarSpec {
  VarKind kind = VarKind::Continuous;
  double lower = -kInf;
  double upper = kInf;
  std::string name;
};

struct LinearTerm {
  double coeff = 0.0;
  VarId var = -1;
};

struct LinearExpr {
  std::vector<LinearTerm> terms;
  double constant = 0.0;

  LinearExpr& add(double coeff, VarId var) {
    terms.push_back({coeff, var});
    return *this;
  }

  /// Merge duplicate variables, drop zero coefficients, sort by VarId.
  void normalize();
};

LinearExpr operator+(LinearExpr a, const LinearExpr& b);

struct Constraint {
  LinearExpr expr;
  Sense sense = Sense::Le;
  double rhs = 0.0;
};

struct IndicatorConstraint {
  VarId guard = -1;
  int guard_value = 1;  // 0 or 1
  Constraint implied;
};

struct Objective {
  ObjSense sense = ObjSense::Minimize;
  LinearExpr expr;
};

struct Interval {
  double lo = -kInf;
  double hi = kInf;
};

using BoundsMap = std::unordered_map<VarId, Interval>;

/// Append-only model; ids returned by the add_* calls stay valid for the
/// model's lifetime. Freeze before handing to a solver; a frozen model is
/// immutable and safe to share across threads.
class MilpModel {
 public:
  VarId add_var(VarSpec spec);
  int add_constraint(Constraint c);
  int add_indicator(IndicatorConstraint ic);
  int add_objective(Objective o);
  void clear_objectives();

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  Eigen::Index num_vars() const { return static_cast<Eigen::Index>(vars_.size()); }
  const std::vector<VarSpec>& vars() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<IndicatorConstraint>& indicators() const { return indicators_; }
  const std::vector<Objective>& objectives() const { return objectives_; }

  const VarSpec& var(VarId id) const { return vars_.at(static_cast<std::size_t>(id)); }

  /// Tighten a variable's bounds in place (intersection).
  void restrict_bounds(VarId id, double lo, double hi);

 private:
  void check_mutable() const;
  void check_expr(const LinearExpr& e) const;

  std::vector<VarSpec> vars_;
  std::vector<Constraint> constraints_;
  std::vector<IndicatorConstraint> indicators_;
  std::vector<Objective> objectives_;
  bool frozen_ = false;
};

/// Replace every indicator with a big-M inequality valid over `bounds`
/// (falling back to the variable's own finite bounds). M is the tight upper
/// bound of (expr - rhs), never below zero; equality implications split into
/// two inequalities with independent constants. Throws when an implied
/// variable has no finite bound on the needed side.
MilpModel lower_indicators(const MilpModel& model, const BoundsMap& bounds);

/// Big-M rows equivalent to one indicator over `bounds`; two rows when the
/// implied constraint is an equality.
std::vector<Constraint> lower_indicator(const MilpModel& model, const BoundsMap& bounds,
                                        const IndicatorConstraint& ic);

/// The implied constraint rewritten as one or two Le rows (what holds when
/// the guard matches), used when a branch fixes the guard.
std::vector<Constraint> implied_rows(const IndicatorConstraint& ic);

/// Interval for a variable: the intersection of its VarSpec bounds with the
/// entry in `bounds`, if any.
Interval var_interval(const MilpModel& model, const BoundsMap& bounds, VarId id);

/// Human-readable listing (one entity per line) for diffing in tests.
std::string to_text(const MilpModel& model);

}  // namespace relumip
