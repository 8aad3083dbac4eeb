#include <cstring>
#include <random>

#include "doctest.h"
#include "relumip/lp_solver.hpp"

using namespace relumip;

namespace {

LpProblem make_lp(ObjSense sense, const Eigen::VectorXd& obj,
                  const Eigen::MatrixXd& rows, const Eigen::VectorXd& rhs,
                  std::vector<Sense> senses, const Eigen::VectorXd& lower,
                  const Eigen::VectorXd& upper) {
  LpProblem p;
  p.sense = sense;
  p.objective = obj;
  p.rows = rows;
  p.rhs = rhs;
  p.senses = std::move(senses);
  p.lower = lower;
  p.upper = upper;
  return p;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Vertex-enumeration oracle for 2-variable LPs: intersect every pair drawn
// from rows and bound lines, keep feasible points, return the best value.
double vertex_oracle_2d(const LpProblem& p) {
  std::vector<Eigen::Vector2d> lines_n;  // a . x = b
  std::vector<double> lines_b;
  for (Eigen::Index i = 0; i < p.num_rows(); ++i) {
    lines_n.push_back(p.rows.row(i).transpose());
    lines_b.push_back(p.rhs(i));
  }
  for (Eigen::Index j = 0; j < 2; ++j) {
    for (double bound : {p.lower(j), p.upper(j)}) {
      if (!std::isfinite(bound)) continue;
      Eigen::Vector2d n = Eigen::Vector2d::Zero();
      n(j) = 1.0;
      lines_n.push_back(n);
      lines_b.push_back(bound);
    }
  }
  double best = p.sense == ObjSense::Maximize ? -kInf : kInf;
  for (std::size_t i = 0; i < lines_n.size(); ++i)
    for (std::size_t j = i + 1; j < lines_n.size(); ++j) {
      Eigen::Matrix2d A;
      A.row(0) = lines_n[i].transpose();
      A.row(1) = lines_n[j].transpose();
      if (std::abs(A.determinant()) < 1e-10) continue;
      const Eigen::Vector2d x = A.inverse() * Eigen::Vector2d(lines_b[i], lines_b[j]);
      if (max_violation(p, x) > 1e-9) continue;
      const double v = p.objective.dot(x) + p.objective_constant;
      best = p.sense == ObjSense::Maximize ? std::max(best, v) : std::min(best, v);
    }
  return best;
}

}  // namespace

TEST_CASE("single variable against its bound") {
  const auto p = make_lp(ObjSense::Maximize, vec({1}), Eigen::MatrixXd::Ones(1, 1),
                         vec({3}), {Sense::Le}, vec({0}), vec({kInf}));
  const LpOutcome out = solve_lp(p, 1e-7);
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.values(0) == doctest::Approx(3.0));
  CHECK(out.objective == doctest::Approx(3.0));
}

TEST_CASE("crossing constraints are infeasible") {
  Eigen::MatrixXd rows(2, 1);
  rows << 1, 1;
  const auto p = make_lp(ObjSense::Maximize, vec({1}), rows, vec({1, 0}),
                         {Sense::Ge, Sense::Le}, vec({-kInf}), vec({kInf}));
  CHECK(solve_lp(p, 1e-7).status == LpStatus::Infeasible);
}

TEST_CASE("two-variable vertex optimum matches enumeration") {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0: optimum 2.8 at (1.6, 1.2).
  Eigen::MatrixXd rows(2, 2);
  rows << 1, 2, 3, 1;
  const auto p = make_lp(ObjSense::Maximize, vec({1, 1}), rows, vec({4, 6}),
                         {Sense::Le, Sense::Le}, vec({0, 0}), vec({kInf, kInf}));
  const LpOutcome out = solve_lp(p, 1e-7);
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.objective == doctest::Approx(2.8));
  CHECK(out.values(0) == doctest::Approx(1.6));
  CHECK(out.values(1) == doctest::Approx(1.2));
  CHECK(out.objective == doctest::Approx(vertex_oracle_2d(p)));
  CHECK(max_violation(p, out.values) <= 1e-7);
}

TEST_CASE("random 2d problems agree with the vertex oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0), rhs_d(0.5, 4.0);
  int optimal_count = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 4);
    Eigen::MatrixXd rows(m, 2);
    Eigen::VectorXd rhs(m);
    std::vector<Sense> senses;
    for (int i = 0; i < m; ++i) {
      rows(i, 0) = coeff(rng);
      rows(i, 1) = coeff(rng);
      rhs(i) = rhs_d(rng);
      senses.push_back(Sense::Le);
    }
    const auto p = make_lp(rng() % 2 ? ObjSense::Maximize : ObjSense::Minimize,
                           vec({coeff(rng), coeff(rng)}), rows, rhs, senses,
                           vec({-3, -3}), vec({3, 3}));
    const LpOutcome out = solve_lp(p, 1e-7);
    REQUIRE(out.status != LpStatus::IterationLimit);
    REQUIRE(out.status != LpStatus::Unbounded);  // box-bounded
    if (out.status == LpStatus::Optimal) {
      ++optimal_count;
      CHECK(max_violation(p, out.values) <= 1e-7);
      const double oracle = vertex_oracle_2d(p);
      CHECK(out.objective == doctest::Approx(oracle).epsilon(1e-7));
    }
  }
  CHECK(optimal_count > 150);
}

TEST_CASE("weak duality spot check on random feasible problems") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 3);
    const int m = 2 + static_cast<int>(rng() % 3);
    // Anchor feasibility at a random interior point x0 of the box [0, 2]^n.
    Eigen::VectorXd x0(n);
    for (int j = 0; j < n; ++j) x0(j) = 0.5 + static_cast<double>(rng() % 100) / 100.0;
    Eigen::MatrixXd rows(m, n);
    Eigen::VectorXd rhs(m);
    std::vector<Sense> senses;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) rows(i, j) = coeff(rng);
      rhs(i) = rows.row(i).dot(x0) + 0.25;
      senses.push_back(Sense::Le);
    }
    Eigen::VectorXd obj(n);
    for (int j = 0; j < n; ++j) obj(j) = coeff(rng);
    const auto p = make_lp(ObjSense::Maximize, obj, rows, rhs, senses,
                           Eigen::VectorXd::Zero(n), Eigen::VectorXd::Constant(n, 2.0));
    const LpOutcome out = solve_lp(p, 1e-7);
    REQUIRE(out.status == LpStatus::Optimal);

    std::uniform_real_distribution<double> sample(0.0, 2.0);
    for (int s = 0; s < 1000; ++s) {
      Eigen::VectorXd x(n);
      for (int j = 0; j < n; ++j) x(j) = sample(rng);
      if (max_violation(p, x) > 0) continue;
      CHECK(obj.dot(x) <= out.objective + 1e-6);
    }
  }
}

TEST_CASE("unbounded ray is reported") {
  const auto p = make_lp(ObjSense::Maximize, vec({1}), Eigen::MatrixXd(0, 1),
                         Eigen::VectorXd(0), {}, vec({0}), vec({kInf}));
  CHECK(solve_lp(p, 1e-7).status == LpStatus::Unbounded);
}

TEST_CASE("upper bound beats a loose row") {
  const auto p = make_lp(ObjSense::Maximize, vec({1}), Eigen::MatrixXd::Ones(1, 1),
                         vec({100}), {Sense::Le}, vec({-5}), vec({7}));
  const LpOutcome out = solve_lp(p, 1e-7);
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.values(0) == doctest::Approx(7.0));
}

TEST_CASE("equality rows with free variables") {
  // min x + y s.t. x - y = 3, y free, x in [0, 10]: optimum at y = -3, x = 0.
  Eigen::MatrixXd rows(1, 2);
  rows << 1, -1;
  const auto p = make_lp(ObjSense::Minimize, vec({1, 1}), rows, vec({3}), {Sense::Eq},
                         vec({0, -kInf}), vec({10, kInf}));
  const LpOutcome out = solve_lp(p, 1e-7);
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.objective == doctest::Approx(-3.0));
  CHECK(out.values(0) == doctest::Approx(0.0));
  CHECK(out.values(1) == doctest::Approx(-3.0));
}

TEST_CASE("fixed variables stay put") {
  Eigen::MatrixXd rows(1, 2);
  rows << 1, 1;
  const auto p = make_lp(ObjSense::Maximize, vec({1, 1}), rows, vec({10}), {Sense::Le},
                         vec({2, 0}), vec({2, 3}));
  const LpOutcome out = solve_lp(p, 1e-7);
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.values(0) == doctest::Approx(2.0));
  CHECK(out.values(1) == doctest::Approx(3.0));
}

TEST_CASE("identical problems solve bit-identically") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  Eigen::MatrixXd rows(3, 4);
  for (Eigen::Index i = 0; i < rows.size(); ++i) rows(i / 4, i % 4) = coeff(rng);
  const auto p = make_lp(ObjSense::Minimize, vec({1, -1, 0.5, 2}), rows, vec({1, 2, 3}),
                         {Sense::Le, Sense::Le, Sense::Ge}, Eigen::VectorXd::Constant(4, -2),
                         Eigen::VectorXd::Constant(4, 2));
  const LpOutcome a = solve_lp(p, 1e-7);
  const LpOutcome b = solve_lp(p, 1e-7);
  REQUIRE(a.status == b.status);
  REQUIRE(a.values.size() == b.values.size());
  CHECK(std::memcmp(a.values.data(), b.values.data(),
                    sizeof(double) * static_cast<std::size_t>(a.values.size())) == 0);
  CHECK(a.objective == b.objective);
}
