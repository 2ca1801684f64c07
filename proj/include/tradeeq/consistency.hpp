#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tradeeq/linalg.hpp"

namespace tradeeq {

enum class FactorMode { strict, weak, general };

const char* to_string(FactorMode m);

/// B = C * B1 with flags checked on the stored B1.
struct Factorization {
  Matrix B1;           // l x l
  Vector row_sums;     // y_i = sum_s B1(i, s)
  FactorMode mode = FactorMode::general;
  bool nonnegative = false;
  bool indecomposable = false;
  bool positive = false;
  IndexList minor_columns;  // columns of the invertible minor (minor route)
  double epsilon = 0.0;     // free row sum used by the minor route
  double residual = 0.0;    // max |B - C B1| / (1 + max |B|)
  std::string route;
};

/// Strong connectivity of the support graph (edge i -> j when B1(i,j) > 0).
bool is_indecomposable(const Matrix& b1);

/// Computes flags and mode for a given B1.
Factorization make_factorization(const Matrix& C, const Matrix& B, Matrix b1, std::string route);

struct FreeParameterRule {
  /// Free row sums are this fraction of the admissible bound.
  double bound_fraction = 0.5;
  /// Use row sum 1 for every free coordinate instead (y = 1 when B and C
  /// have equal aggregates).
  bool unit_row_sums = false;
};

/// Minor-based factorization. Needs rank(C) = n <= l and psi = B 1 in the
/// interior of the cone of the chosen n columns (searched when absent).
/// Throws RankError or ConeError.
Factorization factor_supply(const Matrix& C, const Matrix& B,
                            const std::optional<IndexList>& rank_subset = std::nullopt,
                            FreeParameterRule rule = {});

/// Strictly positive B1 from strictly positive solutions of C x = b_i.
/// Throws ConeError when some b_i is not in the relative interior of cone(C).
Factorization factor_supply_positive(const Matrix& C, const Matrix& B);

enum class ConsistencyLabel { strict, strict_of_rank, weak, weak_of_rank, none };

const char* to_string(ConsistencyLabel l);

struct ConsistencyCertificate {
  ConsistencyLabel label = ConsistencyLabel::none;
  std::optional<Factorization> factorization;  // for rows `goods` when restricted
  IndexList goods;       // I (all goods when not restricted)
  Vector side_slack;     // sum_i b_ki - sum_i c_ki y_i on N \ I
  std::vector<std::string> notes;
};

/// Strongest label certified by any of the factorization routes.
ConsistencyCertificate certify_consistency(const Matrix& C, const Matrix& B,
                                           const std::optional<IndexList>& goods = std::nullopt);

struct DVector {
  Vector d;  // strictly positive, sum = l
  double residual = 0.0;
  long iterations = 0;
  std::string route;  // "power" or "nullspace"
  std::optional<Vector> in_cone_certificate;  // p >= 0 with C^T p = d
};

/// Strictly positive d with sum_k B1(k,i) d_k = y_i d_i. Throws
/// PreconditionError when some y_i <= 0 and ConvergenceError when no
/// positive solution is reached.
DVector solve_D(const Factorization& fact);
DVector solve_D(const Factorization& fact, const Matrix& C);

struct PriceFromD {
  bool found = false;
  Vector p0;           // nonnegative, C^T p0 = d
  double residual = 0.0;
  Vector certificate;  // when not found: v with C v <= 0 and <v, d> > 0
};

PriceFromD price_from_D(const Matrix& C, const Vector& d);

/// Nonnegative p with <b_i, p> = ratios_i <C_i, p> and <C_i, p> >= 1,
/// searched directly by nonnegative least squares.
std::optional<Vector> prices_for_ratios(const Matrix& C, const Matrix& B, const Vector& ratios);

struct SupplyConstruction {
  Matrix B;
  double a = 0.0;
  Vector y;  // row sums of F
};

/// B = C + a C (F - diag(y)). Without `a`, the largest |a| keeping B >= 0
/// (ratio test; a = 1 when every a works). Throws InfeasibleError naming the
/// first negative entry.
SupplyConstruction construct_supply(const Matrix& C, const Matrix& F,
                                    std::optional<double> a = std::nullopt);

/// B = C F1 + C after checking each named precondition; throws
/// PreconditionError on the first that fails.
Matrix construct_ideal_supply(const Matrix& C, const Vector& d, const Matrix& F1);

}  // namespace tradeeq
