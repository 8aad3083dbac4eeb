#include "relumip/attack.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace relumip {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kOutputTol = 1e-6;   // end-to-end verification tolerance
constexpr double kBoundSlack = 1e-9;  // numeric slack on delta bound checks

}  // namespace

std::int64_t scenario_count(Index n, int k) {
  if (k < 1 || static_cast<Index>(k) > n)
    throw std::invalid_argument("scenario: k must lie in [1, n_inputs]");
  // C(n, k) incrementally; bail out once the count stops being practical.
  constexpr std::int64_t kLimit = 100'000'000;
  std::int64_t c = 1;
  for (int i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > kLimit)
      throw std::invalid_argument("scenario: C(n, k) exceeds the enumeration limit");
  }
  return c;
}

std::vector<Scenario> enumerate_scenarios(Index n_inputs, int k) {
  const std::int64_t count = scenario_count(n_inputs, k);
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(count));

  std::vector<Index> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::int64_t rank = 0;
  while (true) {
    out.push_back({idx, rank++});
    // Next combination in lexicographic order.
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n_inputs - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

const char* to_string(AttackStatus s) {
  switch (s) {
    case AttackStatus::Success: return "Success";
    case AttackStatus::NoAttackExists: return "NoAttackExists";
    case AttackStatus::TimedOut: return "TimedOut";
    case AttackStatus::Error: return "Error";
  }
  return "?";
}

const char* to_string(VerifyOutcome::Reason r) {
  switch (r) {
    case VerifyOutcome::Reason::Ok: return "ok";
    case VerifyOutcome::Reason::NoDelta: return "no-delta";
    case VerifyOutcome::Reason::DimMismatch: return "dimension-mismatch";
    case VerifyOutcome::Reason::OutOfScenario: return "out-of-scenario";
    case VerifyOutcome::Reason::DeltaOutOfBounds: return "delta-out-of-bounds";
    case VerifyOutcome::Reason::ConstraintViolated: return "constraint-violated";
  }
  return "?";
}

namespace {

// Shared semantics check. `eps_factor` scales the required strict margin
// (1.0 for exact feasibility, 0.5 when re-checking solver output) and `tol`
// loosens the closed comparisons.
bool satisfies(const AttackConstraint& c, const Eigen::VectorXd& y,
               const Eigen::VectorXd& clean, double eps_factor, double tol,
               std::string* why = nullptr) {
  const auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  return std::visit(
      [&](const auto& ac) -> bool {
        using T = std::decay_t<decltype(ac)>;
        if constexpr (std::is_same_v<T, OutputRange>) {
          if (y(ac.index) < ac.lo - tol)
            return fail("output below range");
          if (y(ac.index) > ac.hi + tol)
            return fail("output above range");
          return true;
        } else if constexpr (std::is_same_v<T, MinScore>) {
          for (Index j = 0; j < y.size(); ++j)
            if (j != ac.target && !(y(ac.target) <= y(j) - ac.eps * eps_factor))
              return fail("target output is not strictly least");
          return true;
        } else if constexpr (std::is_same_v<T, PartialOrdering>) {
          if (!(y(ac.first) <= y(ac.second) - ac.eps * eps_factor))
            return fail("first output does not precede second");
          for (Index j = 0; j < y.size(); ++j)
            if (j != ac.first && j != ac.second &&
                !(y(ac.second) <= y(j) - ac.eps * eps_factor))
              return fail("second output is not below the rest");
          return true;
        } else if constexpr (std::is_same_v<T, TotalOrdering>) {
          for (std::size_t r = 0; r + 1 < ac.order.size(); ++r)
            if (!(y(ac.order[r]) <= y(ac.order[r + 1]) - ac.eps * eps_factor))
              return fail("ordering violated at rank " + std::to_string(r));
          return true;
        } else if constexpr (std::is_same_v<T, MinOutputIncrease>) {
          if (y(ac.index) < clean(ac.index) + ac.threshold - tol)
            return fail("output did not increase by the threshold");
          return true;
        }
      },
      c);
}

}  // namespace

VerifyOutcome verify(const Networkd& net, const AttackResult& result,
                     const AttackConfig& cfg) {
  VerifyOutcome v;
  if (result.delta.size() == 0) {
    v.reason = VerifyOutcome::Reason::NoDelta;
    v.detail = "result carries no perturbation";
    return v;
  }
  if (result.delta.size() != net.input_dim ||
      cfg.base_input.size() != net.input_dim) {
    v.reason = VerifyOutcome::Reason::DimMismatch;
    v.detail = "perturbation length does not match the network input";
    return v;
  }

  std::vector<bool> in_scenario(static_cast<std::size_t>(net.input_dim), false);
  for (Index i : result.scenario.indices) {
    if (i < 0 || i >= net.input_dim) {
      v.reason = VerifyOutcome::Reason::DimMismatch;
      v.detail = "scenario index out of range";
      return v;
    }
    in_scenario[static_cast<std::size_t>(i)] = true;
  }
  for (Index i = 0; i < net.input_dim; ++i) {
    const double d = result.delta(i);
    if (!in_scenario[static_cast<std::size_t>(i)]) {
      if (d != 0.0) {
        v.reason = VerifyOutcome::Reason::OutOfScenario;
        v.detail = "input " + std::to_string(i) + " moved outside the scenario";
        return v;
      }
      continue;
    }
    if (d < cfg.delta_lo(i) - kBoundSlack || d > cfg.delta_hi(i) + kBoundSlack) {
      v.reason = VerifyOutcome::Reason::DeltaOutOfBounds;
      v.detail = "delta at input " + std::to_string(i) + " violates its bounds";
      return v;
    }
  }

  const Eigen::VectorXd y = forward(net, Eigen::VectorXd(cfg.base_input + result.delta));
  const Eigen::VectorXd clean = forward(net, cfg.base_input);
  std::string why;
  if (!satisfies(cfg.constraint, y, clean, 0.5, kOutputTol, &why)) {
    v.reason = VerifyOutcome::Reason::ConstraintViolated;
    v.detail = why;
    return v;
  }
  v.ok = true;
  return v;
}

namespace {

AttackResult decode_and_verify(const Networkd& net, const AttackConfig& cfg,
                               EncodedAttack& ea, const MilpOutcome& mo,
                               AttackResult base) {
  const Eigen::VectorXd sol = canonicalize_solution(ea, mo.best->values);
  base.delta = decode_delta(ea, sol);
  base.achieved_outputs = forward(net, Eigen::VectorXd(cfg.base_input + base.delta));
  base.objective = mo.best->objective;

  // Complementarity must hold exactly on reported solutions: the guard
  // fixing pins one of (x, s) per neuron and the canonicalization removed
  // any (dx+, dx-) padding.
  for (const auto& layer : ea.relu_vars)
    for (const auto& nv : layer)
      assert(std::min(sol(nv.post), sol(nv.slack)) <= 1e-6);

  const VerifyOutcome v = verify(net, base, cfg);
  if (!v.ok)
    throw std::runtime_error(
        "synthesize: solver solution failed verification (" +
        std::string(to_string(v.reason)) + ": " + v.detail +
        "); the encoding and the network disagree");
  base.verified = true;
  base.status = AttackStatus::Success;
  return base;
}

}  // namespace

AttackResult synthesize(const Networkd& net, const AttackConfig& cfg,
                        const Scenario& scenario, const SolverConfig& solver) {
  const auto t0 = Clock::now();
  AttackResult res;
  res.scenario = scenario;

  EncodedAttack ea = encode(net, cfg.perturbation_for(scenario.indices));
  add_attack_constraint(ea, cfg.constraint);
  set_objective(ea, cfg.objective);
  ea.model.freeze();

  // Primal repair: decode the relaxation's perturbation, replay it through
  // the real network, and propose that activation pattern as guard fixings.
  // The pattern always respects encode-time guard pins, because those pins
  // hold for every in-box input.
  SolverConfig scfg = solver;
  scfg.repair = [&ea, &net](const Eigen::VectorXd& values) {
    FixingsMap f;
    const Eigen::VectorXd delta = decode_delta(ea, values);
    const auto pattern =
        activation_pattern(net, Eigen::VectorXd(ea.pert.base_input + delta));
    std::size_t p = 0;
    for (const auto& layer : ea.relu_vars)
      for (const auto& nv : layer) f[nv.guard] = pattern[p++] ? 1.0 : 0.0;
    return f;
  };
  // Branching decisions restrict which inputs each neuron can see; replaying
  // the interval analysis under those decisions shrinks the node's big-M
  // constants and catches contradictory subtrees before any LP work.
  scfg.tighten = [&ea, &net](FixingsMap& f) { return propagate_bounds(net, ea, f); };

  const MilpOutcome mo = ea.hierarchical
                             ? lexicographic_solve(ea.model, scfg, ea.bounds)
                             : solve_milp(ea.model, scfg, ea.bounds);
  res.nodes = mo.stats.nodes;

  switch (mo.status) {
    case MilpStatus::Optimal:
      res = decode_and_verify(net, cfg, ea, mo, std::move(res));
      break;
    case MilpStatus::Infeasible:
      res.status = AttackStatus::NoAttackExists;
      break;
    case MilpStatus::TimedOut:
    case MilpStatus::NodeLimit:
      if (mo.best.has_value()) {
        res = decode_and_verify(net, cfg, ea, mo, std::move(res));
        res.hit_time_limit = true;
        res.detail = mo.status == MilpStatus::NodeLimit ? "node limit" : "time limit";
      } else {
        res.status = AttackStatus::TimedOut;
        res.detail = mo.status == MilpStatus::NodeLimit ? "node limit" : "time limit";
      }
      break;
    case MilpStatus::Unbounded:
      throw std::runtime_error(
          "synthesize: unbounded relaxation on an attack model; perturbation "
          "bounds should make every variable bounded");
  }

  res.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

std::optional<BruteForceResult> brute_force(const Networkd& net, const AttackConfig& cfg,
                                            const Scenario& scenario, double step) {
  if (scenario.indices.size() > 3)
    throw std::invalid_argument("brute force: scenario size must be <= 3");
  if (!(step > 0.0)) throw std::invalid_argument("brute force: step must be positive");

  const std::size_t k = scenario.indices.size();
  std::vector<std::int64_t> counts(k);
  double total = 1.0;
  for (std::size_t d = 0; d < k; ++d) {
    const Index i = scenario.indices[d];
    counts[d] =
        static_cast<std::int64_t>(std::floor((cfg.delta_hi(i) - cfg.delta_lo(i)) / step +
                                             1e-9)) + 1;
    total *= static_cast<double>(counts[d]);
  }
  if (total > 1e7) throw std::invalid_argument("brute force: grid exceeds 10^7 points");

  const Eigen::VectorXd clean = forward(net, cfg.base_input);
  const bool hierarchical = std::holds_alternative<Hierarchical>(cfg.objective);
  const Index target = hierarchical ? std::get<Hierarchical>(cfg.objective).target : 0;

  std::optional<BruteForceResult> best;
  std::vector<std::int64_t> odo(k, 0);
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(net.input_dim);
  Eigen::VectorXd x(net.input_dim);

  while (true) {
    for (std::size_t d = 0; d < k; ++d) {
      const Index i = scenario.indices[d];
      delta(i) = cfg.delta_lo(i) + static_cast<double>(odo[d]) * step;
    }
    x = cfg.base_input + delta;
    const Eigen::VectorXd y = forward(net, x);
    if (satisfies(cfg.constraint, y, clean, 1.0, 0.0)) {
      double obj = 0.0;
      for (Index i : scenario.indices) obj += cfg.weights(i) * std::abs(delta(i));
      bool better = false;
      if (!best) {
        better = true;
      } else if (hierarchical) {
        if (y(target) > best->level1 + 1e-9) better = true;
        else if (y(target) >= best->level1 - 1e-9 && obj < best->objective - 1e-12)
          better = true;
      } else if (obj < best->objective - 1e-12) {
        better = true;
      }
      if (better) {
        BruteForceResult r;
        r.delta = delta;
        r.objective = obj;
        if (hierarchical) {
          r.level1 = y(target);
          r.has_level1 = true;
        }
        best = std::move(r);
      }
    }
    // Advance the odometer (last index fastest keeps lexicographic order).
    std::size_t d = k;
    while (d > 0) {
      --d;
      if (++odo[d] < counts[d]) break;
      odo[d] = 0;
      if (d == 0) return best;
    }
    if (k == 0) return best;  // degenerate: a single all-zero delta
  }
}

CampaignReport run_campaign(const Networkd& net, const AttackConfig& cfg,
                            const std::vector<int>& ks, const SolverConfig& solver,
                            int parallelism) {
  CampaignReport report;
  report.config_echo = cfg.raw;

  std::vector<Scenario> scenarios;
  for (int k : ks)
    for (auto& s : enumerate_scenarios(net.input_dim, k)) scenarios.push_back(std::move(s));
  report.results.resize(scenarios.size());

  const int jobs = std::max(1, parallelism);
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= scenarios.size()) return;
      try {
        report.results[i] = synthesize(net, cfg, scenarios[i], solver);
      } catch (const std::exception& e) {
        AttackResult r;
        r.scenario = scenarios[i];
        r.status = AttackStatus::Error;
        r.detail = e.what();
        report.results[i] = std::move(r);
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  double total_time = 0.0;
  for (const auto& r : report.results) {
    ++report.totals.total;
    switch (r.status) {
      case AttackStatus::Success:
        ++report.totals.successful;
        if (r.hit_time_limit) ++report.totals.success_with_timeout;
        break;
      case AttackStatus::NoAttackExists: ++report.totals.no_attack; break;
      case AttackStatus::TimedOut: ++report.totals.timed_out; break;
      case AttackStatus::Error: ++report.totals.errors; break;
    }
    report.peak_time_s = std::max(report.peak_time_s, r.wall_time_s);
    total_time += r.wall_time_s;
  }
  report.mean_time_s =
      report.totals.total > 0 ? total_time / static_cast<double>(report.totals.total) : 0.0;
  return report;
}

}  // namespace relumip
