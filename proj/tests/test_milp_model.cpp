#include <random>

#include "doctest.h"
#include "relumip/bb_solver.hpp"
#include "test_util.hpp"

using namespace relumip;
using namespace testutil;

namespace {

VarSpec cont(double lo, double hi, std::string name = {}) {
  return {VarKind::Continuous, lo, hi, std::move(name)};
}
VarSpec binary(std::string name = {}) {
  return {VarKind::Binary, 0.0, 1.0, std::move(name)};
}

}  // namespace

TEST_CASE("add_var: ids, binary bounds, invalid bounds") {
  MilpModel m;
  CHECK(m.add_var(cont(0.0, kInf)) == 0);
  CHECK(m.add_var(binary()) == 1);
  CHECK_THROWS_AS(m.add_var(cont(3.0, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(m.add_var({VarKind::Binary, 0.0, 2.0, ""}), std::invalid_argument);
}

TEST_CASE("add_constraint: ids, unknown vars, term merging") {
  MilpModel m;
  const VarId x0 = m.add_var(cont(0, 10));
  const VarId x1 = m.add_var(cont(0, 10));

  Constraint c;
  c.expr.add(1, x0).add(1, x1);
  c.sense = Sense::Eq;
  c.rhs = 1;
  CHECK(m.add_constraint(c) == 0);

  Constraint bad;
  bad.expr.add(1.0, 99);
  CHECK_THROWS_AS(m.add_constraint(bad), std::invalid_argument);

  Constraint dup;
  dup.expr.add(2, x0).add(3, x0);
  dup.sense = Sense::Le;
  dup.rhs = 5;
  const int id = m.add_constraint(dup);
  const auto& stored = m.constraints()[static_cast<std::size_t>(id)];
  REQUIRE(stored.expr.terms.size() == 1);
  CHECK(stored.expr.terms[0].coeff == 5.0);
  CHECK(stored.expr.terms[0].var == x0);
}

TEST_CASE("add_indicator: stores both guard polarities, rejects non-binary guards") {
  MilpModel m;
  const VarId x = m.add_var(cont(0, kInf, "x"));
  const VarId s = m.add_var(cont(0, kInf, "s"));
  const VarId ac = m.add_var(binary("ac"));

  CHECK(m.add_indicator({ac, 1, {LinearExpr{}.add(1, x), Sense::Le, 0}}) == 0);
  CHECK(m.add_indicator({ac, 0, {LinearExpr{}.add(1, s), Sense::Le, 0}}) == 1);
  CHECK(m.indicators().size() == 2);

  CHECK_THROWS_AS(m.add_indicator({x, 1, {LinearExpr{}.add(1, s), Sense::Le, 0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(m.add_indicator({ac, 2, {LinearExpr{}.add(1, s), Sense::Le, 0}}),
                  std::invalid_argument);
}

TEST_CASE("lower_indicators: big-M sizes from the bound map") {
  MilpModel m;
  const VarId x = m.add_var(cont(0, kInf, "x"));
  const VarId s = m.add_var(cont(0, kInf, "s"));
  const VarId ac = m.add_var(binary("ac"));
  m.add_indicator({ac, 1, {LinearExpr{}.add(1, x), Sense::Le, 0}});
  m.add_indicator({ac, 0, {LinearExpr{}.add(1, s), Sense::Le, 0}});

  BoundsMap bounds;
  bounds[x] = {0.0, 7.0};
  bounds[s] = {0.0, 3.0};
  const MilpModel low = lower_indicators(m, bounds);
  CHECK(low.indicators().empty());
  REQUIRE(low.constraints().size() == 2);

  // ac = 1 -> x <= 0 with x in [0, 7]: x <= 7 (1 - ac), i.e. x + 7 ac <= 7.
  {
    const auto& c = low.constraints()[0];
    REQUIRE(c.expr.terms.size() == 2);
    CHECK(c.expr.terms[0].var == x);
    CHECK(c.expr.terms[0].coeff == doctest::Approx(1.0));
    CHECK(c.expr.terms[1].var == ac);
    CHECK(c.expr.terms[1].coeff == doctest::Approx(7.0));
    CHECK(c.rhs == doctest::Approx(7.0));
    CHECK(c.sense == Sense::Le);
  }
  // ac = 0 -> s <= 0 with s in [0, 3]: s <= 3 ac.
  {
    const auto& c = low.constraints()[1];
    REQUIRE(c.expr.terms.size() == 2);
    CHECK(c.expr.terms[0].var == s);
    CHECK(c.expr.terms[0].coeff == doctest::Approx(1.0));
    CHECK(c.expr.terms[1].var == ac);
    CHECK(c.expr.terms[1].coeff == doctest::Approx(-3.0));
    CHECK(c.rhs == doctest::Approx(0.0));
  }
}

TEST_CASE("lower_indicators: missing bound is an error") {
  MilpModel m;
  const VarId x = m.add_var(cont(0, kInf, "x"));
  const VarId ac = m.add_var(binary("ac"));
  m.add_indicator({ac, 1, {LinearExpr{}.add(1, x), Sense::Le, 0}});
  CHECK_THROWS_AS(lower_indicators(m, {}), std::invalid_argument);
}

TEST_CASE("lower_indicators: M never drops below zero") {
  MilpModel m;
  const VarId x = m.add_var(cont(0.0, 5.0, "x"));
  const VarId ac = m.add_var(binary("ac"));
  // Implied x <= 9 already holds everywhere; M must clamp to 0, not -4.
  m.add_indicator({ac, 1, {LinearExpr{}.add(1, x), Sense::Le, 9}});
  const MilpModel low = lower_indicators(m, {});
  REQUIRE(low.constraints().size() == 1);
  for (const auto& t : low.constraints()[0].expr.terms)
    if (t.var == ac) CHECK(t.coeff == 0.0);
}

namespace {

struct RandomIndicatorModel {
  MilpModel model;
  BoundsMap bounds;
  int n_bin = 0;
};

// Small random model: bounded continuous variables, a few random rows, and
// indicator constraints over binary guards.
RandomIndicatorModel make_random_indicator_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_cont_d(1, 3), n_bin_d(1, 4), n_row_d(0, 2);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0), bound(0.5, 4.0);

  RandomIndicatorModel rm;
  const int n_cont = n_cont_d(rng);
  rm.n_bin = n_bin_d(rng);
  std::vector<VarId> xs, gs;
  for (int i = 0; i < n_cont; ++i) {
    const double hi = bound(rng);
    const VarId v = rm.model.add_var(cont(-bound(rng), hi, "x" + std::to_string(i)));
    rm.bounds[v] = {rm.model.var(v).lower, rm.model.var(v).upper};
    xs.push_back(v);
  }
  for (int i = 0; i < rm.n_bin; ++i)
    gs.push_back(rm.model.add_var(binary("g" + std::to_string(i))));

  const int rows = n_row_d(rng);
  for (int r = 0; r < rows; ++r) {
    Constraint c;
    for (VarId v : xs) c.expr.add(coeff(rng), v);
    c.sense = Sense::Le;
    c.rhs = bound(rng);
    rm.model.add_constraint(c);
  }
  for (VarId g : gs) {
    IndicatorConstraint ic;
    ic.guard = g;
    ic.guard_value = rng() % 2;
    for (VarId v : xs) ic.implied.expr.add(coeff(rng), v);
    ic.implied.sense = rng() % 3 == 0 ? Sense::Eq : Sense::Le;
    ic.implied.rhs = coeff(rng);
    rm.model.add_indicator(ic);
  }
  Objective o;
  o.sense = ObjSense::Minimize;
  for (VarId v : xs) o.expr.add(coeff(rng), v);
  rm.model.add_objective(o);
  return rm;
}

}  // namespace

TEST_CASE("lowering preserves feasibility and optima over full guard enumeration") {
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    RandomIndicatorModel rm = make_random_indicator_model(1000 + seed);
    const MilpModel lowered = lower_indicators(rm.model, rm.bounds);

    std::vector<VarId> guards;
    for (VarId j = 0; j < rm.model.num_vars(); ++j)
      if (rm.model.var(j).kind == VarKind::Binary) guards.push_back(j);

    for (std::uint32_t mask = 0; mask < (1u << guards.size()); ++mask) {
      FixingsMap fix;
      for (std::size_t i = 0; i < guards.size(); ++i)
        fix[guards[i]] = (mask >> i) & 1u ? 1.0 : 0.0;

      // Route A: indicator semantics activated directly.
      const LpProblem a = build_relaxation(rm.model, rm.bounds, fix, 0);
      // Route B: the big-M rows with the guard pinned.
      const LpProblem b = build_relaxation(lowered, rm.bounds, fix, 0);

      const LpOutcome oa = solve_lp(a, 1e-8);
      const LpOutcome ob = solve_lp(b, 1e-8);
      REQUIRE(oa.status != LpStatus::IterationLimit);
      REQUIRE(ob.status != LpStatus::IterationLimit);
      CHECK((oa.status == LpStatus::Optimal) == (ob.status == LpStatus::Optimal));
      if (oa.status == LpStatus::Optimal && ob.status == LpStatus::Optimal) {
        CHECK(oa.objective == doctest::Approx(ob.objective).epsilon(1e-6));
        ++compared;
      }
    }
  }
  CHECK(compared > 50);  // the suite exercised real optima, not just infeasibility
}

TEST_CASE("model is append-only: earlier ids survive later additions") {
  MilpModel m;
  const VarId a = m.add_var(cont(0, 1, "a"));
  Constraint c;
  c.expr.add(1, a);
  c.sense = Sense::Le;
  c.rhs = 1;
  const int cid = m.add_constraint(c);
  for (int i = 0; i < 20; ++i) {
    m.add_var(cont(0, 1));
    m.add_constraint(c);
  }
  CHECK(m.var(a).name == "a");
  CHECK(m.constraints()[static_cast<std::size_t>(cid)].expr.terms[0].var == a);
}

TEST_CASE("frozen models reject mutation") {
  MilpModel m;
  m.add_var(cont(0, 1));
  m.freeze();
  CHECK_THROWS_AS(m.add_var(cont(0, 1)), std::logic_error);
}

TEST_CASE("to_text lists every entity once") {
  MilpModel m;
  const VarId x = m.add_var(cont(0, 2, "x"));
  const VarId g = m.add_var(binary("g"));
  Constraint c;
  c.expr.add(2, x);
  c.sense = Sense::Le;
  c.rhs = 3;
  m.add_constraint(c);
  m.add_indicator({g, 1, {LinearExpr{}.add(1, x), Sense::Le, 0}});
  m.add_objective({ObjSense::Minimize, LinearExpr{}.add(1, x)});

  const std::string text = to_text(m);
  CHECK(text.find("var x continuous [0, 2]") != std::string::npos);
  CHECK(text.find("var g binary [0, 1]") != std::string::npos);
  CHECK(text.find("c0: 2*x <= 3") != std::string::npos);
  CHECK(text.find("i0: g == 1 -> x <= 0") != std::string::npos);
  CHECK(text.find("obj0: minimize x") != std::string::npos);
}
