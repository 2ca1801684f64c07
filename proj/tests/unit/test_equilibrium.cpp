#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "tradeeq/equilibrium.hpp"
#include "tradeeq/error.hpp"

using namespace tradeeq;
using testing::cols;
using testing::vec;

namespace {
const Matrix kSwapC = cols({{2, 1}, {1, 2}});
const Matrix kSwapB = cols({{1, 2}, {2, 1}});
const Matrix kOneC = cols({{1, 1}});
const Matrix kOneB = cols({{2, 1}});
}  // namespace

TEST_SUITE("equilibrium") {
  TEST_CASE("excess demand examples") {
    std::mt19937_64 rng(53);
    const Matrix C = testing::uniform(rng, 3, 4, 0.1, 1);
    CHECK(excess_demand(C, C, vec({0.2, 0.3, 0.5})).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(excess_demand(kSwapC, kSwapB, vec({1, 1})) == vec({0, 0}));
    CHECK(excess_demand(kOneC, kOneB, vec({0, 1})) == vec({-1, 0}));
  }

  TEST_CASE("excess demand is homogeneous of degree zero") {
    std::mt19937_64 rng(59);
    const Matrix C = testing::uniform(rng, 4, 5, 0.1, 1);
    const Matrix B = testing::uniform(rng, 4, 5, 0.1, 1);
    const Vector p = testing::uniform(rng, 4, 1, 0.1, 1);
    const Vector e = excess_demand(C, B, p);
    for (double s : {0.001, 3.0, 1e6}) CHECK((excess_demand(C, B, s * p) - e).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(excess_demand(kSwapC, kSwapB, 4.0 * vec({1, 3})) == excess_demand(kSwapC, kSwapB, vec({1, 3})));
  }

  TEST_CASE("excess demand names an agent without demand cost") {
    const Matrix C = cols({{1, 0}, {0, 1}});
    CHECK_THROWS_AS(excess_demand(C, C, vec({1, 0})), InputError);
  }

  TEST_CASE("equilibrium checks") {
    const auto a = is_equilibrium(kSwapC, kSwapC, vec({1, 2}));
    CHECK(a.equilibrium);
    CHECK(a.clearing_set == IndexList{0, 1});
    const auto b = is_equilibrium(kSwapC, kSwapB, vec({1, 1}));
    CHECK(b.equilibrium);
    CHECK(b.clearing_set == IndexList{0, 1});
    const auto c = is_equilibrium(kSwapC, kSwapB, vec({1, 0}));
    CHECK_FALSE(c.equilibrium);
    CHECK(c.clearing_set == IndexList{0});
    CHECK(c.violations == IndexList{1});
    CHECK(c.excess(1) == doctest::Approx(1.5));
  }

  TEST_CASE("solver: B = C") {
    std::mt19937_64 rng(61);
    const Matrix C = testing::uniform(rng, 4, 3, 0.1, 1);
    const auto sol = solve_fixed_point(C, C);
    CHECK(sol.excess.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(sol.clearing_set.size() == 4);
    CHECK(sol.p0.p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("solver: swap instance") {
    const auto sol = solve_fixed_point(kSwapC, kSwapB);
    CHECK(is_equilibrium(kSwapC, kSwapB, sol.p0.p).equilibrium);
    CHECK(sol.excess.maxCoeff() <= 1e-8);
    CHECK(is_equilibrium(kSwapC, kSwapB, vec({0.5, 0.5})).equilibrium);
    CHECK(sol.residual <= SolverOptions{}.tol_inner);
  }

  TEST_CASE("solver: single agent concentrates on the binding good") {
    const auto sol = solve_fixed_point(kOneC, kOneB);
    CHECK(sol.clearing_set == IndexList{1});
    CHECK(sol.p0.p == vec({0, 1}));
    CHECK(sol.y == vec({1}));
    CHECK(sol.walras_residual <= 1e-12);
  }

  TEST_CASE("solver normalizations") {
    SolverOptions o;
    o.normalization = Normalization::clearing_cost;
    const auto a = solve_fixed_point(kSwapC, kSwapB, o);
    double lhs = 0, rhs = 0;
    const Vector psi = kSwapB.rowwise().sum();
    for (Index k : a.clearing_set) {
      lhs += psi(k) * a.p0.p(k);
      rhs += psi(k);
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK(a.p0.normalization == Normalization::clearing_cost);
    CHECK(parse_normalization("raw") == Normalization::raw);
    CHECK_THROWS_AS(parse_normalization("bogus"), InputError);
  }

  TEST_CASE("solver preconditions and options") {
    CHECK_THROWS_AS(solve_fixed_point(cols({{1, 1}}), cols({{1, 0}})), PreconditionError);
    SolverOptions bad;
    bad.damping = 0.0;
    CHECK_THROWS_AS(bad.validate(), InputError);
    bad = {};
    bad.schedule.ratio = 1.0;
    CHECK_THROWS_AS(bad.validate(), InputError);
    bad = {};
    bad.tol = -1;
    CHECK_THROWS_AS(bad.validate(), InputError);
    const auto eps = EpsilonSchedule{}.values();
    CHECK(eps.size() == 13);
    CHECK(eps.front() == 1e-2);
    CHECK(eps.back() == doctest::Approx(1e-2 * std::pow(0.25, 12)));
  }

  TEST_CASE("iteration cap at the final epsilon is an error") {
    SolverOptions o;
    o.max_iterations = 2;
    CHECK_THROWS_AS(solve_fixed_point(kSwapC, cols({{1, 3}, {2, 0}}), o), ConvergenceError);
  }

  TEST_CASE("solver is deterministic and exec independent") {
    std::mt19937_64 rng(67);
    const Matrix C = testing::uniform(rng, 6, 5, 0.1, 1);
    const Matrix B = testing::uniform(rng, 6, 5, 0.1, 1);
    SolverOptions s, p;
    s.exec = Exec::serial;
    p.exec = Exec::parallel;
    const auto a = solve_fixed_point(C, B, s);
    const auto b = solve_fixed_point(C, B, p);
    CHECK(a.p0.p == b.p0.p);
    CHECK(a.iterations == b.iterations);
    const auto batch = solve_batch({{C, B}, {kSwapC, kSwapB}}, s);
    REQUIRE(batch[0].solution);
    CHECK(batch[0].solution->p0.p == a.p0.p);
  }

  TEST_CASE("evaluate_at") {
    const auto sol = evaluate_at(kOneC, kOneB, vec({0, 1}));
    CHECK(sol.clearing_set == IndexList{1});
    CHECK_THROWS_AS(evaluate_at(kSwapC, kSwapB, vec({1, 0})), PreconditionError);
  }

  TEST_CASE("ideal checks") {
    CHECK(check_ideal(kSwapC, kSwapC, vec({0.5, 0.5})).ideal);
    const auto s = check_ideal(kSwapC, kSwapB, vec({1, 1}));
    CHECK(s.ideal);
    CHECK(s.full_clearing);
    const auto o = check_ideal(kOneC, kOneB, vec({0, 1}));
    CHECK(o.ideal);
    CHECK_FALSE(o.full_clearing);
    const auto n = check_ideal(kSwapC, kSwapB, vec({1, 0}));
    CHECK_FALSE(n.ideal);
  }

  TEST_CASE("ideal existence") {
    const auto a = exists_ideal(kSwapC, kSwapC);
    CHECK(a.exists);
    CHECK(check_ideal(kSwapC, kSwapC, a.p0).ideal);
    const Matrix B = cols({{3, 0}, {0, 3}});
    const auto b = exists_ideal(kSwapC, B);
    REQUIRE(b.exists);
    CHECK(b.p0(0) / b.p0(1) == doctest::Approx(1.0).epsilon(1e-10));
    // Columns (2,2),(1,1) still sum to those of C, so the standing assumption
    // holds and p = (1,0) balances every agent.
    const auto c = exists_ideal(kSwapC, cols({{2, 2}, {1, 1}}));
    REQUIRE(c.exists);
    CHECK(check_ideal(kSwapC, cols({{2, 2}, {1, 1}}), c.p0).ideal);
    CHECK(c.p0(1) <= 1e-12 * c.p0(0));
    CHECK_THROWS_AS(exists_ideal(kSwapC, cols({{2, 2}, {2, 1}})), PreconditionError);
  }
}
