#include "tradeeq/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tradeeq {

double max_column_norm(const Matrix& a) {
  double out = 0.0;
  for (Index j = 0; j < a.cols(); ++j) out = std::max(out, a.col(j).norm());
  return out;
}

double cone_tolerance(const Matrix& generators) {
  return 1e-9 * (1.0 + max_column_norm(generators));
}

double cone_tolerance(const Matrix& generators, const Vector& target) {
  return 1e-9 * (1.0 + std::max(max_column_norm(generators), target.norm()));
}

Index numerical_rank(const Matrix& a, double tol) {
  if (a.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  qr.setThreshold(0.0);
  const Matrix& r = qr.matrixR();
  Index rank = 0;
  const Index diag = std::min(a.rows(), a.cols());
  for (Index i = 0; i < diag; ++i)
    if (std::abs(r(i, i)) > tol) ++rank;
  return rank;
}

Index numerical_rank(const Matrix& a) { return numerical_rank(a, cone_tolerance(a)); }

Matrix select_columns(const Matrix& a, std::span<const Index> cols) {
  Matrix out(a.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = a.col(cols[j]);
  return out;
}

Matrix select_rows(const Matrix& a, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = a.row(rows[i]);
  return out;
}

Vector select_entries(const Vector& v, std::span<const Index> idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = v(idx[i]);
  return out;
}

double relative_residual(const Matrix& a, const Vector& x, const Vector& b) {
  const double scale = std::max(1e-300, b.cwiseAbs().maxCoeff());
  return (a * x - b).cwiseAbs().maxCoeff() / scale;
}

namespace {

Vector solve_passive(const Matrix& a, const Vector& b, const std::vector<bool>& passive) {
  IndexList cols;
  for (Index j = 0; j < a.cols(); ++j)
    if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
  Vector z = Vector::Zero(a.cols());
  if (cols.empty()) return z;
  const Matrix ap = select_columns(a, cols);
  const Vector zp = ap.colPivHouseholderQr().solve(b);
  for (std::size_t j = 0; j < cols.size(); ++j) z(cols[j]) = zp(static_cast<Index>(j));
  return z;
}

}  // namespace

NnlsResult nnls(const Matrix& a, const Vector& b, int max_iterations) {
  const Index n = a.cols();
  if (max_iterations <= 0) max_iterations = static_cast<int>(3 * n + 30);
  NnlsResult out;
  out.x = Vector::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);

  const double eps = std::numeric_limits<double>::epsilon();
  const double anorm = a.size() == 0 ? 0.0 : a.cwiseAbs().colwise().sum().maxCoeff();
  const double tol = 10.0 * eps * anorm * static_cast<double>(std::max(a.rows(), n)) *
                     std::max(1.0, b.cwiseAbs().maxCoeff());

  Vector w = a.transpose() * (b - a * out.x);
  int iter = 0;
  while (iter < max_iterations) {
    Index best = -1;
    double best_w = tol;
    for (Index j = 0; j < n; ++j)
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    if (best < 0) {
      out.converged = true;
      break;
    }
    passive[static_cast<std::size_t>(best)] = true;

    Vector z = solve_passive(a, b, passive);
    // Inner loop: step back toward feasibility while the unconstrained
    // passive solution has non-positive entries.
    while (iter < max_iterations) {
      ++iter;
      bool feasible = true;
      for (Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) feasible = false;
      if (feasible) break;
      double alpha = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          const double den = out.x(j) - z(j);
          alpha = std::min(alpha, den > 0.0 ? out.x(j) / den : 0.0);
        }
      out.x += alpha * (z - out.x);
      for (Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && out.x(j) <= tol * 1e-3) {
          passive[static_cast<std::size_t>(j)] = false;
          out.x(j) = 0.0;
        }
      z = solve_passive(a, b, passive);
    }
    out.x = z;
    w = a.transpose() * (b - a * out.x);
    // A newly added column must not come straight back out; guard against
    // cycling from roundoff by zeroing its gradient.
    if (!passive[static_cast<std::size_t>(best)]) w(best) = 0.0;
  }
  for (Index j = 0; j < n; ++j) {
    if (out.x(j) < 0.0) out.x(j) = 0.0;
    if (out.x(j) > 0.0) out.passive.push_back(j);
  }
  out.residual = b - a * out.x;
  out.residual_norm = out.residual.norm();
  out.iterations = iter;
  return out;
}

}  // namespace tradeeq
