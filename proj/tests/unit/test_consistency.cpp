#include <doctest.h>

#include <random>

#include "../oracles/oracles.hpp"
#include "helpers.hpp"
#include "tradeeq/consistency.hpp"
#include "tradeeq/error.hpp"

using namespace tradeeq;
using testing::cols;
using testing::vec;

namespace {

double identity_residual(const Matrix& C, const Matrix& B, const Matrix& B1) {
  return (B - C * B1).cwiseAbs().maxCoeff() / (1.0 + B.cwiseAbs().maxCoeff());
}

// sum_k B1(k,i) d_k - y_i d_i, relative to max |y_i d_i|.
double d_residual(const Matrix& B1, const Vector& d) {
  const Vector y = B1.rowwise().sum();
  const Vector lhs = B1.transpose() * d;
  const Vector rhs = y.cwiseProduct(d);
  return (lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("consistency") {
  TEST_CASE("B = C factors through the identity") {
    const Matrix C = cols({{2, 1}, {1, 2}});
    const Factorization f = factor_supply(C, C);
    CHECK(testing::max_abs_diff(f.B1, Matrix::Identity(2, 2)) <= 1e-14);
    CHECK(f.nonnegative);
    CHECK_FALSE(f.indecomposable);
    CHECK(f.mode == FactorMode::weak);
  }

  TEST_CASE("one good, two agents") {
    Matrix C(1, 2), B(1, 2);
    C << 2, 1;
    B << 1, 3;
    const Factorization f = factor_supply(C, B);
    CHECK(identity_residual(C, B, f.B1) <= 1e-12);
    CHECK((f.row_sums.array() > 0).all());
    CHECK((f.B1.colwise().sum().array() > 0).all());
    CHECK(f.epsilon == doctest::Approx(2.0));
    CHECK(testing::max_abs_diff(f.B1, cols({{0, 1}, {1, 1}})) <= 1e-14);
  }

  TEST_CASE("factor_supply rank checks") {
    CHECK_THROWS_AS(factor_supply(cols({{1, 2}, {2, 4}}), cols({{1, 1}, {1, 1}})), RankError);
    CHECK_THROWS_AS(factor_supply(cols({{1, 0, 0}, {0, 1, 0}}), cols({{1, 0, 0}, {0, 1, 0}})), RankError);
  }

  TEST_CASE("factor_supply identity and epsilon rule on random instances") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 40; ++rep) {
      const Matrix C = testing::uniform(rng, 3, 6, 0.1, 1.0);
      const Matrix B = C * testing::uniform(rng, 6, 6, 0.0, 1.0);
      const Factorization f = factor_supply(C, B);
      CHECK(f.residual <= 1e-8);
      CHECK(identity_residual(C, B, f.B1) <= 1e-8);
      CHECK((f.row_sums.array() > 0).all());
    }
  }

  TEST_CASE("interior supply vectors give a strictly positive B1") {
    std::mt19937_64 rng(43);
    for (int rep = 0; rep < 20; ++rep) {
      const Matrix C = testing::uniform(rng, 3, 5, 0.1, 1.0);
      const Matrix B = C * testing::uniform(rng, 5, 5, 0.2, 1.0);
      const Factorization f = factor_supply_positive(C, B);
      CHECK(f.positive);
      CHECK(f.mode == FactorMode::strict);
      CHECK(f.residual <= 1e-8);
    }
  }

  TEST_CASE("consistency labels") {
    const Matrix C = cols({{2, 1}, {1, 2}});
    SUBCASE("B = C is weak: the identity is decomposable") {
      const auto cert = certify_consistency(C, C);
      CHECK(cert.label == ConsistencyLabel::weak);
    }
    SUBCASE("B = C J / l is strict") {
      const Matrix B = C * Matrix::Constant(2, 2, 0.5);
      const auto cert = certify_consistency(C, B);
      CHECK(cert.label == ConsistencyLabel::strict);
      REQUIRE(cert.factorization);
      CHECK(cert.factorization->positive);
    }
    SUBCASE("rank-|I| instance") {
      const Matrix C3 = cols({{2, 1, 1}, {1, 2, 1}});
      const Matrix B3 = cols({{1.5, 1.5, 2}, {1.5, 1.5, 2}});
      const auto cert = certify_consistency(C3, B3, IndexList{0, 1});
      CHECK(cert.label == ConsistencyLabel::strict_of_rank);
      CHECK(cert.side_slack(0) == doctest::Approx(2.0));
      // Unrestricted, the third row cannot be matched with B1 row sums 1.
      CHECK(certify_consistency(C3, B3).label != ConsistencyLabel::strict);
    }
    SUBCASE("indecomposable but not positive is noted") {
      const Matrix B1 = cols({{0, 1}, {1, 0}});
      const auto cert = certify_consistency(Matrix::Identity(2, 2), B1);
      CHECK(cert.label == ConsistencyLabel::strict);
      bool noted = false;
      for (const auto& n : cert.notes) noted |= n.find("not strictly positive") != std::string::npos;
      CHECK(noted);
    }
    SUBCASE("no factorization") {
      const Matrix C1 = cols({{1, 0}, {1, 0}});
      const auto cert = certify_consistency(C1, cols({{0, 1}, {0, 1}}));
      CHECK(cert.label == ConsistencyLabel::none);
    }
  }

  TEST_CASE("indecomposability") {
    CHECK(is_indecomposable(Matrix::Ones(3, 3)));
    CHECK_FALSE(is_indecomposable(Matrix::Identity(2, 2)));
    CHECK(is_indecomposable(cols({{0, 1}, {1, 0}})));
    CHECK_FALSE(is_indecomposable(cols({{1, 1}, {0, 1}})));
    CHECK(is_indecomposable(cols({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}})));
    Matrix one(1, 1);
    one << 0.0;
    CHECK_FALSE(is_indecomposable(one));
    one << 2.0;
    CHECK(is_indecomposable(one));
  }

  TEST_CASE("D vector examples") {
    const Matrix I = Matrix::Identity(2, 2);
    SUBCASE("doubly stochastic") {
      const Matrix B1 = Matrix::Constant(2, 2, 0.5);
      const DVector d = solve_D(make_factorization(I, B1, B1, "given"));
      CHECK(d.d.isApprox(vec({1, 1})));
      CHECK(d.residual <= 1e-10);
    }
    SUBCASE("two-cycle") {
      Matrix B1(2, 2);
      B1 << 0, 1, 2, 0;
      const auto fact = make_factorization(I, B1, B1, "given");
      CHECK(fact.row_sums == vec({1, 2}));
      const DVector d = solve_D(fact);
      CHECK(d.d(0) / d.d(1) == doctest::Approx(2.0).epsilon(1e-12));
      CHECK(d_residual(B1, d.d) <= 1e-10);
    }
    SUBCASE("signed B1 goes through the null space") {
      Matrix B1(2, 2);
      B1 << 2, -1, -1, 2;
      const DVector d = solve_D(make_factorization(I, B1, B1, "given"));
      CHECK((d.d.array() > 0).all());
      CHECK(d_residual(B1, d.d) <= 1e-10);
    }
    SUBCASE("zero row sum is rejected") {
      Matrix B1(2, 2);
      B1 << 1, -1, 1, 1;
      try {
        solve_D(make_factorization(I, B1, B1, "given"));
        FAIL("expected PreconditionError");
      } catch (const PreconditionError& e) {
        CHECK(e.condition() == "undefined ratio");
      }
    }
  }

  TEST_CASE("D vector matches the dense eigensolver") {
    std::mt19937_64 rng(47);
    std::uniform_int_distribution<int> size(1, 8);
    for (int rep = 0; rep < 60; ++rep) {
      const Index l = size(rng);
      const Matrix B1 = testing::uniform(rng, l, l, 0.01, 1.0);
      const Matrix I = Matrix::Identity(l, l);
      const DVector d = solve_D(make_factorization(I, B1, B1, "given"));
      CHECK((d.d.array() > 0).all());
      CHECK(d_residual(B1, d.d) <= 1e-10);
      const Vector ref = oracle::perron_d(B1);
      CHECK((d.d - ref).cwiseAbs().maxCoeff() <= 1e-8);
      // Homogeneous of degree one.
      CHECK(d_residual(B1, 2.0 * d.d) <= 1e-10);
    }
  }

  TEST_CASE("prices from D") {
    const auto a = price_from_D(Matrix::Identity(2, 2), vec({1, 2}));
    REQUIRE(a.found);
    CHECK(a.p0.isApprox(vec({1, 2})));
    const auto b = price_from_D(cols({{2, 1}, {1, 2}}), vec({3, 3}));
    REQUIRE(b.found);
    CHECK(b.p0.isApprox(vec({1, 1})));
    const Matrix C = cols({{2, 1}, {1, 2}});
    const Vector d = vec({1, 4});
    const auto c = price_from_D(C, d);
    CHECK_FALSE(c.found);
    CHECK((C * c.certificate).maxCoeff() <= 1e-12);
    CHECK(c.certificate.dot(d) > 0);
  }

  TEST_CASE("construct_supply") {
    const Matrix C = cols({{2, 1}, {1, 2}});
    const Matrix F = cols({{0, 1}, {1, 0}});
    SUBCASE("diagonal F leaves C unchanged") {
      const Matrix D = vec({0.3, 2.0}).asDiagonal();
      for (double a : {0.5, 1.0, 7.0}) CHECK(construct_supply(C, D, a).B == C);
    }
    SUBCASE("swap at a = 1") {
      const auto s = construct_supply(C, F, 1.0);
      CHECK(s.B.col(0) == vec({1, 2}));
      CHECK(s.B.col(1) == vec({2, 1}));
      CHECK(s.y == vec({1, 1}));
    }
    SUBCASE("ratio test") {
      const auto s = construct_supply(C, F);
      CHECK(s.a == doctest::Approx(2.0));
      CHECK(s.B.minCoeff() >= 0.0);
    }
    SUBCASE("beyond the bound") {
      try {
        construct_supply(C, F, 10.0);
        FAIL("expected InfeasibleError");
      } catch (const InfeasibleError& e) {
        CHECK(e.row() == 0);
        CHECK(e.col() == 0);
      }
    }
  }

  TEST_CASE("construct_ideal_supply") {
    const Matrix C = cols({{2, 1}, {1, 2}});
    const Vector d = vec({3, 3});
    CHECK(construct_ideal_supply(C, d, Matrix::Zero(2, 2)) == C);
    const Matrix F1 = cols({{1, -1}, {-1, 1}});
    const Matrix B = construct_ideal_supply(C, d, F1);
    CHECK(B.col(0) == vec({3, 0}));
    CHECK(B.col(1) == vec({0, 3}));
    CHECK(B.col(0).sum() == C.col(0).sum());
    try {
      construct_ideal_supply(C, d, 2.0 * F1);
      FAIL("expected PreconditionError");
    } catch (const PreconditionError& e) {
      CHECK(e.condition() == "C F1 + C nonnegative");
    }
    CHECK_THROWS_AS(construct_ideal_supply(C, vec({3, -1}), F1), PreconditionError);
    CHECK_THROWS_AS(construct_ideal_supply(C, vec({3, 4}), F1), PreconditionError);
  }
}
