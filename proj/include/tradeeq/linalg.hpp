#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tradeeq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

/// Largest Euclidean column norm (0 for an empty matrix).
double max_column_norm(const Matrix& a);

/// Membership tolerance for cone tests: 1e-9 * (1 + largest generator norm),
/// widened to the norm of the target when that is larger.
double cone_tolerance(const Matrix& generators, const Vector& target);
double cone_tolerance(const Matrix& generators);

/// Numerical rank via column-pivoted QR; pivots below `tol` count as zero.
Index numerical_rank(const Matrix& a, double tol);
Index numerical_rank(const Matrix& a);

Matrix select_columns(const Matrix& a, std::span<const Index> cols);
Matrix select_rows(const Matrix& a, std::span<const Index> rows);
Vector select_entries(const Vector& v, std::span<const Index> idx);

/// Relative max-norm residual |a x - b|_inf / max(1e-300, |b|_inf).
double relative_residual(const Matrix& a, const Vector& x, const Vector& b);

struct NnlsResult {
  Vector x;
  Vector residual;    // b - A x
  double residual_norm = 0.0;
  IndexList passive;  // support of x, columns linearly independent
  int iterations = 0;
  bool converged = false;
};

/// Lawson-Hanson active-set solver for min |A x - b|_2 subject to x >= 0.
/// Ties are broken by lowest column index, so results are deterministic.
NnlsResult nnls(const Matrix& a, const Vector& b, int max_iterations = 0);

/// Calls `visit(subset)` for every k-subset of {0..n-1} in lexicographic
/// order until it returns false. Returns the number of subsets visited.
template <class Visit>
long for_each_combination(Index n, Index k, Visit&& visit) {
  if (k < 0 || k > n) return 0;
  IndexList idx(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  long visited = 0;
  while (true) {
    ++visited;
    if (!visit(static_cast<const IndexList&>(idx))) return visited;
    Index i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return visited;
    ++idx[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace tradeeq
