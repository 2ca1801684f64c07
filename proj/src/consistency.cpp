#include "tradeeq/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tradeeq/cone_geometry.hpp"
#include "tradeeq/error.hpp"

namespace tradeeq {

namespace {

constexpr double kFactorTol = 1e-8;
constexpr long kPowerCap = 100000;
constexpr double kPowerStep = 1e-12;
constexpr double kDResidual = 1e-10;

double flag_tolerance(const Matrix& b1) {
  return 1e-12 * std::max(1.0, b1.size() ? b1.cwiseAbs().maxCoeff() : 0.0);
}

std::vector<bool> reachable(const Matrix& b1, double tol, bool reverse) {
  const Index l = b1.rows();
  std::vector<bool> seen(static_cast<std::size_t>(l), false);
  IndexList stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const Index i = stack.back();
    stack.pop_back();
    for (Index j = 0; j < l; ++j) {
      const double w = reverse ? b1(j, i) : b1(i, j);
      if (w > tol && !seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = true;
        stack.push_back(j);
      }
    }
  }
  return seen;
}

}  // namespace

const char* to_string(FactorMode m) {
  switch (m) {
    case FactorMode::strict:
      return "strict";
    case FactorMode::weak:
      return "weak";
    case FactorMode::general:
      return "general";
  }
  return "?";
}

const char* to_string(ConsistencyLabel l) {
  switch (l) {
    case ConsistencyLabel::strict:
      return "strict";
    case ConsistencyLabel::strict_of_rank:
      return "strict-of-rank";
    case ConsistencyLabel::weak:
      return "weak";
    case ConsistencyLabel::weak_of_rank:
      return "weak-of-rank";
    case ConsistencyLabel::none:
      return "none";
  }
  return "?";
}

bool is_indecomposable(const Matrix& b1) {
  if (b1.rows() != b1.cols() || b1.rows() == 0) return false;
  const double tol = flag_tolerance(b1);
  if (b1.rows() == 1) return b1(0, 0) > tol;
  for (bool reverse : {false, true}) {
    const auto seen = reachable(b1, tol, reverse);
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) return false;
  }
  return true;
}

Factorization make_factorization(const Matrix& C, const Matrix& B, Matrix b1, std::string route) {
  Factorization f;
  f.B1 = std::move(b1);
  f.route = std::move(route);
  f.row_sums = f.B1.rowwise().sum();
  const double tol = flag_tolerance(f.B1);
  f.nonnegative = f.B1.size() > 0 && f.B1.minCoeff() >= -tol;
  f.positive = f.B1.size() > 0 && f.B1.minCoeff() > tol;
  f.indecomposable = f.nonnegative && is_indecomposable(f.B1);
  if (f.nonnegative && f.indecomposable)
    f.mode = FactorMode::strict;
  else if (f.row_sums.size() > 0 && f.row_sums.minCoeff() >= -tol)
    f.mode = FactorMode::weak;
  else
    f.mode = FactorMode::general;
  const double scale = 1.0 + (B.size() ? B.cwiseAbs().maxCoeff() : 0.0);
  f.residual = B.size() ? (B - C * f.B1).cwiseAbs().maxCoeff() / scale : 0.0;
  return f;
}

Factorization factor_supply(const Matrix& C, const Matrix& B,
                            const std::optional<IndexList>& rank_subset, FreeParameterRule rule) {
  const Index n = C.rows(), l = C.cols();
  if (B.rows() != n || B.cols() != l) throw InputError("C and B must have the same shape");
  const Index rank = numerical_rank(C);
  if (n > l || rank < n)
    throw RankError("rank of C is below the number of goods; drop dependent rows", rank, n);
  const Vector psi = B.rowwise().sum();

  IndexList subset;
  if (rank_subset) {
    subset = *rank_subset;
    if (static_cast<Index>(subset.size()) != n)
      throw RankError("rank subset must have one column per good",
                      static_cast<Index>(subset.size()), n);
    const MembershipResult mem = classify_membership(select_columns(C, subset), psi);
    if (mem.verdict != Membership::interior)
      throw ConeError("aggregate supply is not interior to the chosen subcone",
                      mem.verdict == Membership::outside ? ConeError::Kind::outside
                                                         : ConeError::Kind::degenerate_target,
                      mem.violated, mem.alpha, subset);
  } else {
    long budget = 200000;
    for_each_combination(l, n, [&](const IndexList& idx) {
      if (--budget < 0) return false;
      const Matrix cs = select_columns(C, idx);
      if (numerical_rank(cs) < n) return true;
      if (classify_membership(cs, psi).verdict != Membership::interior) return true;
      subset = idx;
      return false;
    });
    if (subset.empty())
      throw ConeError("no invertible minor holds the aggregate supply in its interior",
                      ConeError::Kind::no_interior_subcone, -1);
  }

  std::vector<bool> in_subset(static_cast<std::size_t>(l), false);
  for (Index j : subset) in_subset[static_cast<std::size_t>(j)] = true;
  IndexList free;
  for (Index j = 0; j < l; ++j)
    if (!in_subset[static_cast<std::size_t>(j)]) free.push_back(j);
  const Index q = static_cast<Index>(free.size());

  const Eigen::PartialPivLU<Matrix> lu(select_columns(C, subset));
  const Matrix g = q ? Matrix(lu.solve(select_columns(C, free))) : Matrix(n, 0);
  const Matrix x0 = lu.solve(B);
  const Vector a_psi = lu.solve(psi);

  double eps = 0.0;
  if (q > 0) {
    if (rule.unit_row_sums) {
      eps = 1.0;
    } else {
      const double a_hat = g.cwiseAbs().maxCoeff();
      const double b_hat = a_psi.minCoeff();
      eps = a_hat > 0.0 ? rule.bound_fraction * b_hat / (static_cast<double>(q) * a_hat) : 1.0;
    }
  }
  const double share = eps / static_cast<double>(l);

  Matrix b1(l, l);
  const Vector g_row_sums = q ? Vector(g.rowwise().sum()) : Vector::Zero(n);
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < l; ++i)
      b1(subset[static_cast<std::size_t>(k)], i) = x0(k, i) - share * g_row_sums(k);
  for (Index j : free) b1.row(j).setConstant(share);

  Factorization f = make_factorization(C, B, std::move(b1), "minor");
  f.minor_columns = subset;
  f.epsilon = eps;
  return f;
}

Factorization factor_supply_positive(const Matrix& C, const Matrix& B) {
  if (B.rows() != C.rows() || B.cols() != C.cols())
    throw InputError("C and B must have the same shape");
  const Index l = C.cols();
  Matrix b1(l, l);
  for (Index i = 0; i < l; ++i) b1.col(i) = strictly_positive_solution(C, B.col(i)).y;
  return make_factorization(C, B, std::move(b1), "positive");
}

ConsistencyCertificate certify_consistency(const Matrix& C, const Matrix& B,
                                           const std::optional<IndexList>& goods) {
  const Index n = C.rows(), l = C.cols();
  if (B.rows() != n || B.cols() != l) throw InputError("C and B must have the same shape");
  ConsistencyCertificate cert;
  bool restricted = false;
  if (goods) {
    cert.goods = *goods;
    std::sort(cert.goods.begin(), cert.goods.end());
    cert.goods.erase(std::unique(cert.goods.begin(), cert.goods.end()), cert.goods.end());
    if (cert.goods.empty()) throw InputError("good subset must not be empty");
    if (cert.goods.front() < 0 || cert.goods.back() >= n)
      throw InputError("good subset index out of range");
    restricted = static_cast<Index>(cert.goods.size()) < n;
  } else {
    for (Index k = 0; k < n; ++k) cert.goods.push_back(k);
  }
  const Matrix ci = select_rows(C, cert.goods);
  const Matrix bi = select_rows(B, cert.goods);
  IndexList outside;
  {
    std::vector<bool> in(static_cast<std::size_t>(n), false);
    for (Index k : cert.goods) in[static_cast<std::size_t>(k)] = true;
    for (Index k = 0; k < n; ++k)
      if (!in[static_cast<std::size_t>(k)]) outside.push_back(k);
  }

  std::vector<Factorization> cands;
  try {
    cands.push_back(factor_supply_positive(ci, bi));
  } catch (const Error& e) {
    cert.notes.push_back(std::string("positive route: ") + e.what());
  }
  {
    Matrix b1(l, l);
    for (Index i = 0; i < l; ++i) b1.col(i) = nnls(ci, bi.col(i)).x;
    cands.push_back(make_factorization(ci, bi, std::move(b1), "nonnegative"));
  }
  try {
    cands.push_back(factor_supply(ci, bi));
  } catch (const Error& e) {
    cert.notes.push_back(std::string("minor route: ") + e.what());
  }
  cands.push_back(make_factorization(ci, bi, ci.completeOrthogonalDecomposition().solve(bi),
                                     "least-squares"));

  auto side_slack = [&](const Factorization& f) {
    Vector slack(static_cast<Index>(outside.size()));
    for (std::size_t q = 0; q < outside.size(); ++q) {
      const Index k = outside[q];
      slack(static_cast<Index>(q)) = B.row(k).sum() - C.row(k).dot(f.row_sums);
    }
    return slack;
  };
  auto side_ok = [&](const Vector& slack) {
    for (std::size_t q = 0; q < outside.size(); ++q) {
      const double scale = std::max(1.0, B.row(outside[q]).sum());
      if (!(slack(static_cast<Index>(q)) > 1e-9 * scale)) return false;
    }
    return true;
  };

  int best_rank = 0;  // 2 strict, 1 weak
  for (const Factorization& f : cands) {
    if (f.residual > kFactorTol) continue;
    const int rank = f.mode == FactorMode::strict ? 2 : f.mode == FactorMode::weak ? 1 : 0;
    if (rank <= best_rank) continue;
    Vector slack = side_slack(f);
    if (restricted && !side_ok(slack)) continue;
    best_rank = rank;
    cert.factorization = f;
    cert.side_slack = std::move(slack);
  }
  if (best_rank == 2)
    cert.label = restricted ? ConsistencyLabel::strict_of_rank : ConsistencyLabel::strict;
  else if (best_rank == 1)
    cert.label = restricted ? ConsistencyLabel::weak_of_rank : ConsistencyLabel::weak;
  if (cert.factorization && cert.factorization->mode == FactorMode::strict &&
      !cert.factorization->positive)
    cert.notes.push_back("B1 is indecomposable but not strictly positive");
  return cert;
}

// ---------------------------------------------------------------------------

namespace {

double d_residual(const Matrix& b1, const Vector& y, const Vector& d) {
  const Vector rhs = y.cwiseProduct(d);
  const double scale = std::max(1e-300, rhs.cwiseAbs().maxCoeff());
  return (b1.transpose() * d - rhs).cwiseAbs().maxCoeff() / scale;
}

Vector normalize_sum(const Vector& d) {
  return d * (static_cast<double>(d.size()) / d.sum());
}

// u_i = y_i d_i is a stationary vector of the row-stochastic diag(1/y) B1;
// the lazy chain (I + P)/2 converges for periodic B1 as well.
bool power_route(const Matrix& b1, const Vector& y, DVector& out) {
  const Index l = b1.rows();
  const Matrix pt = (y.cwiseInverse().asDiagonal() * b1).transpose();
  Vector d = Vector::Ones(l);
  Vector u = y.cwiseProduct(d);
  for (long it = 1; it <= kPowerCap; ++it) {
    u = 0.5 * (u + pt * u);
    u /= u.sum();
    const Vector next = normalize_sum(u.cwiseQuotient(y));
    const double step = (next - d).cwiseAbs().maxCoeff();
    d = next;
    out.iterations = it;
    if (step <= kPowerStep) break;
  }
  out.d = d;
  out.residual = d_residual(b1, y, d);
  out.route = "power";
  return d.minCoeff() > 0.0 && out.residual <= kDResidual;
}

// Null space of B1^T - diag(y): one-dimensional null space taken directly,
// otherwise a positive member searched with d = 1 + s, s >= 0.
bool nullspace_route(const Matrix& b1, const Vector& y, DVector& out) {
  const Index l = b1.rows();
  const Matrix a = b1.transpose() - Matrix(y.asDiagonal());
  out.route = "nullspace";
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const Vector sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  Index nullity = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) <= 1e-10 * std::max(1.0, smax)) ++nullity;
  if (nullity == 1) {
    Vector d = svd.matrixV().col(l - 1);
    if (d.sum() < 0.0) d = -d;
    if (d.minCoeff() > 0.0) {
      out.d = normalize_sum(d);
      out.residual = d_residual(b1, y, out.d);
      if (out.residual <= kDResidual) return true;
    }
  }
  const NnlsResult fit = nnls(a, -(a * Vector::Ones(l)));
  const Vector d = Vector::Ones(l) + fit.x;
  out.d = normalize_sum(d);
  out.residual = d_residual(b1, y, out.d);
  return out.residual <= kDResidual;
}

}  // namespace

DVector solve_D(const Factorization& fact) {
  const Matrix& b1 = fact.B1;
  const Index l = b1.rows();
  if (l == 0 || b1.cols() != l) throw InputError("B1 must be square and non-empty");
  const Vector y = b1.rowwise().sum();
  for (Index i = 0; i < l; ++i)
    if (!(y(i) > 0.0)) {
      std::ostringstream os;
      os << "row sum y_" << i + 1 << " = " << y(i) << " is not positive";
      throw PreconditionError("undefined ratio", os.str());
    }
  DVector out;
  if (fact.nonnegative && power_route(b1, y, out)) return out;
  DVector alt;
  alt.iterations = out.iterations;
  if (nullspace_route(b1, y, alt)) return alt;
  const DVector& worst = fact.nonnegative ? out : alt;
  throw ConvergenceError("no strictly positive solution of the D equations", worst.residual,
                         worst.iterations);
}

DVector solve_D(const Factorization& fact, const Matrix& C) {
  DVector out = solve_D(fact);
  const PriceFromD p = price_from_D(C, out.d);
  if (p.found) out.in_cone_certificate = p.p0;
  return out;
}

PriceFromD price_from_D(const Matrix& C, const Vector& d) {
  if (d.size() != C.cols()) throw InputError("d length does not match the number of agents");
  PriceFromD out;
  const Matrix ct = C.transpose();
  const NnlsResult fit = nnls(ct, d);
  out.p0 = fit.x;
  out.residual = relative_residual(ct, fit.x, d);
  out.found = out.residual <= 1e-8;
  if (!out.found) out.certificate = fit.residual / fit.residual_norm;
  return out;
}

std::optional<Vector> prices_for_ratios(const Matrix& C, const Matrix& B, const Vector& ratios) {
  const Index n = C.rows(), l = C.cols();
  const double scale = std::max(C.cwiseAbs().maxCoeff(), B.cwiseAbs().maxCoeff());
  if (!(scale > 0.0)) return std::nullopt;
  const Matrix cs = C / scale, bs = B / scale;
  Matrix m = Matrix::Zero(2 * l, n + l);
  m.topLeftCorner(l, n) = (bs - cs * ratios.asDiagonal()).transpose();
  m.bottomLeftCorner(l, n) = cs.transpose();
  m.bottomRightCorner(l, l) = -Matrix::Identity(l, l);
  Vector rhs = Vector::Zero(2 * l);
  rhs.tail(l).setOnes();
  const NnlsResult fit = nnls(m, rhs);
  if (fit.residual.cwiseAbs().maxCoeff() > 1e-9) return std::nullopt;
  Vector p = fit.x.head(n);
  if (!(p.sum() > 0.0)) return std::nullopt;
  return p / p.sum();
}

SupplyConstruction construct_supply(const Matrix& C, const Matrix& F, std::optional<double> a) {
  const Index l = C.cols();
  if (F.rows() != l || F.cols() != l) throw InputError("F must be l x l");
  SupplyConstruction out;
  out.y = F.rowwise().sum();
  if (!out.y.allFinite()) throw InputError("row sums of F must be finite");
  const Matrix delta = C * (F - Matrix(out.y.asDiagonal()));
  const double tol = 1e-12 * std::max(1.0, C.cwiseAbs().maxCoeff());

  if (a) {
    out.a = *a;
  } else {
    // Ratio test in both directions; ties go to the positive side.
    double up = std::numeric_limits<double>::infinity();
    double down = std::numeric_limits<double>::infinity();
    Index up_r = -1, up_c = -1;
    for (Index i = 0; i < l; ++i)
      for (Index k = 0; k < C.rows(); ++k) {
        const double dk = delta(k, i);
        if (dk < -tol) {
          const double bound = C(k, i) / -dk;
          if (bound < up) {
            up = bound;
            up_r = k;
            up_c = i;
          }
        } else if (dk > tol) {
          down = std::min(down, C(k, i) / dk);
        }
      }
    if (!std::isfinite(up) && !std::isfinite(down))
      out.a = 1.0;
    else
      out.a = up >= down ? (std::isfinite(up) ? up : 1.0) : -(std::isfinite(down) ? down : 1.0);
    if (out.a == 0.0) {
      std::ostringstream os;
      os << "no nonzero a keeps supply nonnegative (blocking entry row " << up_r + 1 << ", column "
         << up_c + 1 << ")";
      throw InfeasibleError(os.str(), up_r, up_c);
    }
  }
  out.B = C + out.a * delta;
  for (Index i = 0; i < l; ++i)
    for (Index k = 0; k < C.rows(); ++k) {
      double& v = out.B(k, i);
      if (v < 0.0 && v >= -tol * std::max(1.0, std::abs(out.a))) v = 0.0;
      if (v < 0.0) {
        std::ostringstream os;
        os << "supply entry (" << k + 1 << ", " << i + 1 << ") is negative: " << v;
        throw InfeasibleError(os.str(), k, i);
      }
    }
  return out;
}

Matrix construct_ideal_supply(const Matrix& C, const Vector& d, const Matrix& F1) {
  const Index l = C.cols();
  if (d.size() != l) throw InputError("d length does not match the number of agents");
  if (F1.rows() != l || F1.cols() != l) throw InputError("F1 must be l x l");
  if (!(d.minCoeff() > 0.0)) throw PreconditionError("d strictly positive", "some d_i <= 0");
  if (!price_from_D(C, d).found)
    throw PreconditionError("d in the cone of the rows of C", "nonnegative least squares residual too large");
  const double fscale = std::max(1.0, F1.cwiseAbs().maxCoeff());
  for (Index i = 0; i < l; ++i) {
    const double dot = d.dot(F1.col(i));
    if (std::abs(dot) > 1e-10 * d.norm() * fscale) {
      std::ostringstream os;
      os << "column " << i + 1 << " has <d, f> = " << dot;
      throw PreconditionError("columns of F1 orthogonal to d", os.str());
    }
    const double rs = F1.row(i).sum();
    if (std::abs(rs) > 1e-10 * fscale) {
      std::ostringstream os;
      os << "row " << i + 1 << " sums to " << rs;
      throw PreconditionError("rows of F1 sum to zero", os.str());
    }
  }
  Matrix b = C * F1 + C;
  const double tol = 1e-12 * std::max(1.0, C.cwiseAbs().maxCoeff()) * fscale;
  for (Index i = 0; i < l; ++i)
    for (Index k = 0; k < C.rows(); ++k) {
      if (b(k, i) < -tol) {
        std::ostringstream os;
        os << "entry (" << k + 1 << ", " << i + 1 << ") = " << b(k, i);
        throw PreconditionError("C F1 + C nonnegative", os.str());
      }
      if (b(k, i) < 0.0) b(k, i) = 0.0;
    }
  return b;
}

}  // namespace tradeeq
