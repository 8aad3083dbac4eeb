#include "relumip/bb_solver.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace relumip {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_s(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::optional<double> fixed_value(const MilpModel& model, const FixingsMap& fixings,
                                  VarId id) {
  if (auto it = fixings.find(id); it != fixings.end()) return it->second;
  const VarSpec& v = model.var(id);
  if (v.lower == v.upper) return v.lower;
  return std::nullopt;
}

}  // namespace

void SolverConfig::validate() const {
  if (time_limit_s <= 0) throw std::invalid_argument("solver: time limit must be positive");
  if (node_limit <= 0) throw std::invalid_argument("solver: node limit must be positive");
  if (feasibility_tol <= 0 || feasibility_tol > 1e-2)
    throw std::invalid_argument("solver: feasibility tolerance out of (0, 1e-2]");
  if (integrality_tol <= 0 || integrality_tol > 1e-2)
    throw std::invalid_argument("solver: integrality tolerance out of (0, 1e-2]");
}

const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::Optimal: return "Optimal";
    case MilpStatus::Infeasible: return "Infeasible";
    case MilpStatus::TimedOut: return "TimedOut";
    case MilpStatus::NodeLimit: return "NodeLimit";
    case MilpStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

LpProblem build_relaxation(const MilpModel& model, const BoundsMap& bounds,
                           const FixingsMap& fixings, int objective_index) {
  const Eigen::Index n = model.num_vars();
  LpProblem p;
  p.lower.resize(n);
  p.upper.resize(n);
  for (VarId j = 0; j < n; ++j) {
    const Interval iv = var_interval(model, bounds, j);
    p.lower(j) = iv.lo;
    p.upper(j) = iv.hi;
    if (auto fv = fixed_value(model, fixings, j)) {
      p.lower(j) = *fv;
      p.upper(j) = *fv;
    }
  }

  std::vector<Constraint> rows(model.constraints());
  for (const auto& ic : model.indicators()) {
    const auto fv = fixed_value(model, fixings, ic.guard);
    if (fv) {
      if (static_cast<int>(std::lround(*fv)) == ic.guard_value)
        for (auto& r : implied_rows(ic)) rows.push_back(std::move(r));
      // Mismatched guard: the implication is vacuous on this branch.
    } else {
      for (auto& r : lower_indicator(model, bounds, ic)) rows.push_back(std::move(r));
    }
  }

  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  p.rows = Eigen::MatrixXd::Zero(m, n);
  p.rhs.resize(m);
  p.senses.resize(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const Constraint& c = rows[static_cast<std::size_t>(i)];
    for (const auto& t : c.expr.terms) p.rows(i, t.var) += t.coeff;
    p.rhs(i) = c.rhs - c.expr.constant;
    p.senses[static_cast<std::size_t>(i)] = c.sense;
  }

  p.objective = Eigen::VectorXd::Zero(n);
  p.objective_constant = 0.0;
  p.sense = ObjSense::Minimize;
  if (objective_index >= 0) {
    const Objective& o = model.objectives().at(static_cast<std::size_t>(objective_index));
    for (const auto& t : o.expr.terms) p.objective(t.var) += t.coeff;
    p.objective_constant = o.expr.constant;
    p.sense = o.sense;
  }
  return p;
}

namespace {

struct Node {
  std::vector<std::pair<VarId, int>> fixings;
  double key = -kInf;      // minimization key of this node's own LP bound
  Eigen::VectorXd values;  // its LP relaxation solution (empty when closed)
  long seq = 0;
  int depth = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.key != b.key) return a.key > b.key;
    return a.seq > b.seq;  // FIFO among ties
  }
};

struct LevelResult {
  MilpStatus status = MilpStatus::Infeasible;
  Eigen::VectorXd values;  // incumbent (may be present on TimedOut)
  double objective = 0.0;  // in the objective's own sense
  bool has_incumbent = false;
  SearchStats stats;
};

class Search {
 public:
  Search(const MilpModel& model, const BoundsMap& bounds, const SolverConfig& cfg,
         int obj_index, double time_budget_s)
      : model_(model), bounds_(bounds), cfg_(cfg), obj_index_(obj_index),
        time_budget_s_(time_budget_s), start_(Clock::now()) {
    for (VarId j = 0; j < model.num_vars(); ++j)
      if (model.var(j).kind == VarKind::Binary) binaries_.push_back(j);
    sense_ = obj_index >= 0 ? model.objectives()[static_cast<std::size_t>(obj_index)].sense
                            : ObjSense::Minimize;
  }

  LevelResult run() {
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;

    {
      Node root;
      root.seq = seq_++;
      if (!solve_node(root, -kInf)) return finish(MilpStatus::Unbounded);
      if (root.values.size() > 0) open.push(std::move(root));
    }

    while (!open.empty()) {
      if (elapsed_s(start_) > time_budget_s_) return finish(MilpStatus::TimedOut);
      if (res_.stats.nodes >= cfg_.node_limit) return finish(MilpStatus::NodeLimit);

      Node node = open.top();
      open.pop();
      // The incumbent may have improved since this bound entered the queue.
      if (has_incumbent_ && node.key >= incumbent_key_ - 1e-9) {
        trace(node, "cut", node.key);
        continue;
      }

      const VarId branch_var = pick_branch(node.values);
      assert(branch_var >= 0 && "only fractional nodes are queued");
      trace_branch(node, node.key, branch_var);

      for (int b = 0; b <= 1; ++b) {
        if (elapsed_s(start_) > time_budget_s_) return finish(MilpStatus::TimedOut);
        if (res_.stats.nodes >= cfg_.node_limit) return finish(MilpStatus::NodeLimit);
        Node child;
        child.fixings = node.fixings;
        child.fixings.emplace_back(branch_var, b);
        child.seq = seq_++;
        child.depth = node.depth + 1;
        if (!solve_node(child, node.key)) return finish(MilpStatus::Unbounded);
        if (child.values.size() > 0 &&
            !(has_incumbent_ && child.key >= incumbent_key_ - 1e-9))
          open.push(std::move(child));
      }
      res_.stats.peak_open =
          std::max(res_.stats.peak_open, static_cast<long>(open.size()));
    }

    if (!res_.stats.exact)
      return finish(MilpStatus::TimedOut);  // a dropped subtree forbids claims
    return finish(has_incumbent_ ? MilpStatus::Optimal : MilpStatus::Infeasible);
  }

 private:
  double to_key(double obj) const {
    return sense_ == ObjSense::Minimize ? obj : -obj;
  }

  // Solves the node LP. Returns false only on an unbounded relaxation.
  // Leaves `node.values` empty when the node is closed (infeasible, failed,
  // pruned, or integral).
  bool solve_node(Node& node, double parent_key) {
    ++res_.stats.nodes;
    FixingsMap fixings;
    for (const auto& [v, b] : node.fixings) fixings[v] = b;

    const BoundsMap* node_bounds = &bounds_;
    BoundsMap tightened;
    if (cfg_.tighten) {
      auto t = cfg_.tighten(fixings);
      if (!t.has_value()) {
        trace(node, "infeasible");  // the fixings contradict themselves
        return true;
      }
      tightened = std::move(*t);
      node_bounds = &tightened;
    }

    const LpProblem lp = build_relaxation(model_, *node_bounds, fixings, obj_index_);
    const LpOutcome out = solve_lp(lp, cfg_.feasibility_tol);
    res_.stats.lp_iterations += out.iterations;

    if (out.status == LpStatus::Infeasible) {
      trace(node, "infeasible");
      return true;
    }
    if (out.status == LpStatus::IterationLimit) {
      res_.stats.exact = false;  // subtree dropped; no optimality claim later
      trace(node, "lp-failed");
      return true;
    }
    if (out.status == LpStatus::Unbounded) {
      res_.stats.unbounded_relaxation = true;
      return false;
    }

    node.key = to_key(out.objective);
    assert(node.key >= parent_key - 1e-6 && "child bound regressed past parent");
    (void)parent_key;

    if (pick_branch(out.values) < 0) {
      accept_rounded(fixings, out, node);
      return true;
    }
    if (cfg_.repair && node.depth % 4 == 0) try_repair(fixings, out.values, node);
    if (has_incumbent_ && node.key >= incumbent_key_ - 1e-9) {
      trace(node, "pruned", node.key);
      return true;
    }
    node.values = out.values;
    return true;
  }

  // Most-fractional binary, ties by lowest VarId; -1 when integral.
  VarId pick_branch(const Eigen::VectorXd& values) const {
    VarId best = -1;
    double best_frac = cfg_.integrality_tol;
    for (VarId j : binaries_) {
      const double v = values(j);
      const double frac = std::abs(v - std::lround(v));
      if (frac > best_frac) {
        best_frac = frac;
        best = j;
      }
    }
    return best;
  }

  // Validates a full integer assignment by re-solving with every binary
  // pinned; a feasible result becomes an incumbent candidate. The exact
  // re-solve also restores complementarity that tolerance-integral values
  // may blur.
  bool try_fixings(const FixingsMap& all, const Node& node, const char* label) {
    const LpProblem lp = build_relaxation(model_, bounds_, all, obj_index_);
    const LpOutcome out = solve_lp(lp, cfg_.feasibility_tol);
    res_.stats.lp_iterations += out.iterations;
    if (out.status != LpStatus::Optimal) return false;
    const double key = to_key(out.objective);
    if (!has_incumbent_ || key < incumbent_key_ - 1e-12) {
      has_incumbent_ = true;
      incumbent_key_ = key;
      incumbent_values_ = out.values;
      incumbent_obj_ = out.objective;
      trace(node, label, key);
      return true;
    }
    return false;
  }

  void accept_rounded(const FixingsMap& fixings, const LpOutcome& node_out,
                      const Node& node) {
    FixingsMap all = fixings;
    for (VarId j : binaries_)
      all[j] = static_cast<double>(std::lround(node_out.values(j)));
    if (!try_fixings(all, node, "integral incumbent")) {
      // Numerically integral but the pinned LP would not improve (or failed):
      // fall back to the node values themselves.
      const double key = to_key(node_out.objective);
      if (!has_incumbent_ || key < incumbent_key_ - 1e-12) {
        has_incumbent_ = true;
        incumbent_key_ = key;
        incumbent_values_ = node_out.values;
        incumbent_obj_ = node_out.objective;
        trace(node, "integral incumbent", key);
      } else {
        trace(node, "integral", key);
      }
    }
  }

  // Caller-supplied repair heuristic: propose binary fixings from the LP
  // relaxation values, keep the node's own branching decisions, validate.
  void try_repair(const FixingsMap& node_fixings, const Eigen::VectorXd& values,
                  const Node& node) {
    FixingsMap all = cfg_.repair(values);
    for (const auto& [v, b] : node_fixings) all[v] = b;
    for (VarId j : binaries_)
      if (!all.count(j)) all[j] = 0.0;
    try_fixings(all, node, "repair incumbent");
  }

  LevelResult finish(MilpStatus status) {
    res_.status = status;
    res_.has_incumbent = has_incumbent_;
    if (has_incumbent_) {
      res_.values = incumbent_values_;
      res_.objective = incumbent_obj_;
    }
    res_.stats.wall_time_s = elapsed_s(start_);
    return res_;
  }

  void trace(const Node& n, const char* what, double key = std::nan("")) {
    if (!cfg_.trace) return;
    *cfg_.trace << "node " << n.seq << " depth " << n.depth << " " << what;
    if (!std::isnan(key)) *cfg_.trace << " bound " << key;
    *cfg_.trace << "\n";
  }

  void trace_branch(const Node& n, double key, VarId v) {
    if (!cfg_.trace) return;
    *cfg_.trace << "node " << n.seq << " depth " << n.depth << " bound " << key
                << " branch " << model_.var(v).name << "\n";
  }

  const MilpModel& model_;
  const BoundsMap& bounds_;
  const SolverConfig& cfg_;
  int obj_index_;
  double time_budget_s_;
  Clock::time_point start_;
  std::vector<VarId> binaries_;
  ObjSense sense_ = ObjSense::Minimize;
  long seq_ = 0;

  LevelResult res_;
  bool has_incumbent_ = false;
  double incumbent_key_ = kInf;
  Eigen::VectorXd incumbent_values_;
  double incumbent_obj_ = 0.0;
};

LevelResult solve_level(const MilpModel& model, const BoundsMap& bounds,
                        const SolverConfig& cfg, int obj_index, double budget_s) {
  Search s(model, bounds, cfg, obj_index, budget_s);
  return s.run();
}

MilpModel thawed_copy(const MilpModel& model) {
  MilpModel out;
  for (const auto& v : model.vars()) out.add_var(v);
  for (const auto& c : model.constraints()) out.add_constraint(c);
  for (const auto& ic : model.indicators()) out.add_indicator(ic);
  for (const auto& o : model.objectives()) out.add_objective(o);
  return out;
}

}  // namespace

MilpOutcome solve_milp(const MilpModel& model, const SolverConfig& cfg,
                       const BoundsMap& bounds) {
  cfg.validate();
  if (!model.frozen()) throw std::logic_error("solve_milp: model must be frozen");
  if (model.objectives().size() != 1)
    throw std::invalid_argument("solve_milp: model must carry exactly one objective");

  LevelResult lr = solve_level(model, bounds, cfg, 0, cfg.time_limit_s);
  MilpOutcome out;
  out.status = lr.status;
  out.stats = lr.stats;
  if (lr.has_incumbent) out.best = MilpSolution{lr.values, {lr.objective}};
  return out;
}

MilpOutcome lexicographic_solve(const MilpModel& model, const SolverConfig& cfg,
                                const BoundsMap& bounds) {
  cfg.validate();
  if (!model.frozen()) throw std::logic_error("lexicographic_solve: model must be frozen");
  const std::size_t levels = model.objectives().size();
  if (levels == 0)
    throw std::invalid_argument("lexicographic_solve: at least one objective required");

  MilpModel work = thawed_copy(model);
  const auto start = Clock::now();

  MilpOutcome out;
  std::vector<double> attained;
  Eigen::VectorXd values;

  for (std::size_t level = 0; level < levels; ++level) {
    const double budget = cfg.time_limit_s - elapsed_s(start);
    LevelResult lr = solve_level(work, bounds, cfg, static_cast<int>(level),
                                 std::max(budget, 0.0));
    out.stats.nodes += lr.stats.nodes;
    out.stats.lp_iterations += lr.stats.lp_iterations;
    out.stats.peak_open = std::max(out.stats.peak_open, lr.stats.peak_open);
    out.stats.unbounded_relaxation |= lr.stats.unbounded_relaxation;
    out.stats.exact &= lr.stats.exact;

    if (lr.status != MilpStatus::Optimal) {
      out.status = lr.status;
      if (lr.has_incumbent) {
        auto partial = attained;
        partial.push_back(lr.objective);
        out.best = MilpSolution{lr.values, std::move(partial)};
      } else if (!attained.empty()) {
        out.best = MilpSolution{values, attained};
      }
      out.stats.wall_time_s = elapsed_s(start);
      return out;
    }

    attained.push_back(lr.objective);
    values = lr.values;

    if (level + 1 < levels) {
      // Pin this level's value (within lex_tol) before optimizing the next.
      const Objective& o = work.objectives()[level];
      Constraint pin;
      pin.expr = o.expr;
      if (o.sense == ObjSense::Minimize) {
        pin.sense = Sense::Le;
        pin.rhs = lr.objective + cfg.lex_tol;
      } else {
        pin.sense = Sense::Ge;
        pin.rhs = lr.objective - cfg.lex_tol;
      }
      work.add_constraint(std::move(pin));
    }
  }

  out.status = MilpStatus::Optimal;
  out.best = MilpSolution{values, attained};
  out.stats.wall_time_s = elapsed_s(start);
  return out;
}

}  // namespace relumip
