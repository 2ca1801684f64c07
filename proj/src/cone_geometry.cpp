#include "tradeeq/cone_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tradeeq/error.hpp"

namespace tradeeq {

namespace {

constexpr long kMaxSubsets = 200000;
constexpr long kMaxSplitCandidates = 2000;
// Interior margin, in units of the membership tolerance.
constexpr double kInteriorMargin = 1e3;

bool in_cone(const Matrix& g, const Vector& b, double tol) {
  if (g.cols() == 0) return b.norm() <= tol;
  return nnls(g, b).residual_norm <= tol;
}

}  // namespace

ConeBasis::ConeBasis(Matrix v) : vectors(std::move(v)), rank(numerical_rank(vectors)) {}

const char* to_string(Membership m) {
  switch (m) {
    case Membership::interior:
      return "interior";
    case Membership::boundary:
      return "boundary";
    case Membership::outside:
      return "outside";
  }
  return "?";
}

BiorthogonalSystem biorthogonal_system(const Matrix& independent) {
  const Index n = independent.rows(), m = independent.cols();
  if (m > n) throw RankError("more vectors than the dimension", n, m);
  const Index rank = numerical_rank(independent);
  if (rank < m) throw RankError("vectors are linearly dependent", rank, m);

  BiorthogonalSystem sys;
  sys.given = m;
  sys.primal.resize(n, n);
  sys.primal.leftCols(m) = independent;

  // Projector onto the orthogonal complement of the current span; each step
  // appends the coordinate axis with the largest component there.
  Matrix proj = Matrix::Identity(n, n);
  if (m > 0) {
    Eigen::HouseholderQR<Matrix> qr(independent);
    const Matrix q = qr.householderQ() * Matrix::Identity(n, m);
    proj -= q * q.transpose();
  }
  for (Index step = m; step < n; ++step) {
    Index best = 0;
    double best_norm = -1.0;
    for (Index j = 0; j < n; ++j) {
      const double nj = proj.col(j).norm();
      if (nj > best_norm + 1e-14) {
        best_norm = nj;
        best = j;
      }
    }
    sys.extension_axes.push_back(best);
    sys.primal.col(step) = Vector::Unit(n, best);
    const Vector v = proj.col(best) / best_norm;
    proj -= v * v.transpose();
  }

  sys.dual = sys.primal.transpose().partialPivLu().solve(Matrix::Identity(n, n));
  sys.max_error =
      n == 0 ? 0.0 : (sys.primal.transpose() * sys.dual - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  return sys;
}

MembershipResult classify_membership(const BiorthogonalSystem& sys, const Vector& b) {
  const Index n = sys.primal.rows(), m = sys.given;
  if (b.size() != n) throw InputError("target dimension does not match the cone");
  MembershipResult out;
  out.alpha = sys.dual.transpose() * b;
  out.tolerance = cone_tolerance(sys.primal.leftCols(m), b);
  // Coefficients are compared in the units of b.
  auto scaled = [&](Index i) { return out.alpha(i) * sys.primal.col(i).norm(); };
  for (Index i = m; i < n; ++i)
    if (std::abs(scaled(i)) > out.tolerance) {
      out.verdict = Membership::outside;
      out.violated = i;
      return out;
    }
  for (Index i = 0; i < m; ++i)
    if (scaled(i) < -out.tolerance) {
      out.verdict = Membership::outside;
      out.violated = i;
      return out;
    }
  for (Index i = 0; i < m; ++i)
    if (scaled(i) <= out.tolerance) {
      out.verdict = Membership::boundary;
      out.violated = i;
      return out;
    }
  out.verdict = m > 0 ? Membership::interior : Membership::boundary;
  return out;
}

MembershipResult classify_membership(const Matrix& independent, const Vector& b) {
  return classify_membership(biorthogonal_system(independent), b);
}

IndexList generating_set(const Matrix& vectors) {
  const Index t = vectors.cols();
  const double tol = cone_tolerance(vectors);
  std::vector<bool> keep(static_cast<std::size_t>(t), false);
  bool any = false;
  for (Index j = 0; j < t; ++j)
    if (vectors.col(j).norm() > tol) {
      keep[static_cast<std::size_t>(j)] = true;
      any = true;
    }
  if (!any) throw InputError("all generators are zero");

  // Highest index first, so the lowest of a proportional pair survives.
  for (Index j = t - 1; j >= 0; --j) {
    if (!keep[static_cast<std::size_t>(j)]) continue;
    IndexList others;
    for (Index i = 0; i < t; ++i)
      if (i != j && keep[static_cast<std::size_t>(i)]) others.push_back(i);
    if (others.empty()) continue;
    const Matrix g = select_columns(vectors, others);
    if (in_cone(g, vectors.col(j), cone_tolerance(g, vectors.col(j))))
      keep[static_cast<std::size_t>(j)] = false;
  }
  IndexList out;
  for (Index j = 0; j < t; ++j)
    if (keep[static_cast<std::size_t>(j)]) out.push_back(j);
  return out;
}

IndexList generating_set(const ConeBasis& cone) { return generating_set(cone.vectors); }

ConeLocation locate_in_cone(const Matrix& generators, const Vector& b) {
  if (b.size() != generators.rows()) throw InputError("target dimension does not match the cone");
  ConeLocation out;
  out.tolerance = cone_tolerance(generators, b);
  if (generators.cols() == 0) {
    out.weights = Vector();
    out.residual = b.norm();
    out.verdict = out.residual <= out.tolerance ? Membership::boundary : Membership::outside;
    if (out.verdict == Membership::outside) out.certificate = b / out.residual;
    return out;
  }
  const NnlsResult fit = nnls(generators, b);
  out.weights = fit.x;
  out.residual = fit.residual_norm;
  if (fit.residual_norm > out.tolerance) {
    out.verdict = Membership::outside;
    out.certificate = fit.residual / fit.residual_norm;
    return out;
  }
  // b is in the relative interior iff every generator can carry positive
  // weight in some representation; averaging those gives x > 0. A generator
  // qualifies when b stays in the cone after a short step back along it.
  for (Index j = 0; j < generators.cols(); ++j) {
    const double gn = generators.col(j).norm();
    if (gn == 0.0) continue;
    const double step = kInteriorMargin * out.tolerance / gn;
    if (fit.x(j) > step) continue;
    if (!in_cone(generators, b - step * generators.col(j), out.tolerance)) {
      out.verdict = Membership::boundary;
      return out;
    }
  }
  out.verdict = Membership::interior;
  return out;
}

double max_shift_in_cone(const Matrix& generators, const Vector& b, const Vector& direction) {
  const double tol = cone_tolerance(generators, b);
  if (!in_cone(generators, b, tol)) return 0.0;
  const double dn = direction.norm();
  if (dn == 0.0) return std::numeric_limits<double>::infinity();
  double lo = 0.0;
  double hi = std::max(b.norm(), 1e-300) / dn;
  for (int k = 0; k < 200 && in_cone(generators, b - hi * direction, tol); ++k) {
    lo = hi;
    hi *= 2.0;
  }
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (in_cone(generators, b - mid * direction, tol))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

// ---------------------------------------------------------------------------

Vector PositiveSolutionFamily::combine(const Vector& gamma) const {
  if (gamma.size() != z.cols()) throw InputError("gamma has the wrong length");
  return z * gamma;
}

Vector PositiveSolutionFamily::gamma_from_free(const Vector& gamma_free) const {
  if (gamma_free.size() + 1 != z.cols()) throw InputError("gamma has the wrong length");
  Vector g(z.cols());
  g(0) = 1.0 - gamma_free.sum();
  g.tail(gamma_free.size()) = gamma_free;
  return g;
}

bool PositiveSolutionFamily::strictly_feasible(const Vector& gamma) const {
  if (gamma.size() != z.cols()) return false;
  if (std::abs(gamma.sum() - 1.0) > 1e-12) return false;
  const Vector free_part = gamma.tail(gamma.size() - 1);
  if (free_part.size() > 0 && free_part.minCoeff() <= 0.0) return false;
  const Vector lhs = gamma_lhs * free_part;
  for (Index k = 0; k < gamma_rhs.size(); ++k)
    if (!(lhs(k) < gamma_rhs(k))) return false;
  return true;
}

namespace {

std::string describe_subset(const IndexList& s) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i] + 1;
  os << "}";
  return os.str();
}

PositiveSolutionFamily build_family(const Matrix& C, const Vector& psi, const IndexList& subset,
                                    const BiorthogonalSystem& sys, const MembershipResult& mem) {
  const Index l = C.cols(), r = static_cast<Index>(subset.size());
  PositiveSolutionFamily fam;
  fam.subset = subset;
  std::vector<bool> in_subset(static_cast<std::size_t>(l), false);
  for (Index j : subset) in_subset[static_cast<std::size_t>(j)] = true;
  for (Index i = 0; i < l; ++i)
    if (!in_subset[static_cast<std::size_t>(i)]) fam.free.push_back(i);
  const Index q = static_cast<Index>(fam.free.size());

  fam.dual = sys.dual.leftCols(r);
  const Vector a = mem.alpha.head(r);
  fam.gamma_rhs = a;
  fam.ystar.resize(q);
  fam.gamma_lhs.resize(r, q);
  fam.z = Matrix::Zero(l, q + 1);
  for (Index k = 0; k < r; ++k) fam.z(subset[static_cast<std::size_t>(k)], 0) = a(k);

  for (Index f = 0; f < q; ++f) {
    const Index i = fam.free[static_cast<std::size_t>(f)];
    const Vector g = fam.dual.transpose() * C.col(i);
    double ystar = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < r; ++k) {
      const double floor = 1e-12 * C.col(i).norm() * fam.dual.col(k).norm();
      if (g(k) > floor) ystar = std::min(ystar, a(k) / g(k));
    }
    if (!std::isfinite(ystar)) ystar = 1.0;
    fam.ystar(f) = ystar;
    for (Index k = 0; k < r; ++k) {
      fam.gamma_lhs(k, f) = g(k) * ystar;
      fam.z(subset[static_cast<std::size_t>(k)], f + 1) = std::max(0.0, a(k) - g(k) * ystar);
    }
    fam.z(i, f + 1) = ystar;
  }

  // Uniform weights when they satisfy the strict inequalities; otherwise the
  // free weights are shrunk to half the ratio-test bound.
  if (q == 0) {
    fam.base_gamma = Vector::Ones(1);
  } else {
    const double u = 1.0 / static_cast<double>(q + 1);
    const Vector lhs = fam.gamma_lhs * Vector::Constant(q, u);
    double t_max = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < r; ++k)
      if (lhs(k) > 0.0) t_max = std::min(t_max, a(k) / lhs(k));
    const double t = t_max > 1.0 ? 1.0 : 0.5 * t_max;
    fam.base_gamma = fam.gamma_from_free(Vector::Constant(q, t * u));
  }
  fam.base_point = fam.combine(fam.base_gamma);
  fam.residual = relative_residual(C, fam.base_point, psi);
  return fam;
}

bool independent_columns(const Matrix& c, const IndexList& cols) {
  const Matrix s = select_columns(c, cols);
  return numerical_rank(s) == s.cols();
}

[[noreturn]] void throw_outside(const ConeLocation& loc) {
  throw ConeError("target lies outside the cone", ConeError::Kind::outside, -1, loc.certificate);
}

// First independent r-subset of `pool` whose cone holds psi on its boundary.
[[noreturn]] void throw_degenerate(const Matrix& C, const Vector& psi, const IndexList& pool,
                                   Index r) {
  IndexList found;
  MembershipResult found_mem;
  for_each_combination(static_cast<Index>(pool.size()), r, [&](const IndexList& idx) {
    IndexList cols;
    for (Index i : idx) cols.push_back(pool[static_cast<std::size_t>(i)]);
    if (!independent_columns(C, cols)) return true;
    const MembershipResult mem = classify_membership(select_columns(C, cols), psi);
    if (mem.verdict == Membership::boundary) {
      found = cols;
      found_mem = mem;
      return false;
    }
    return true;
  });
  std::ostringstream os;
  os << "target lies on the boundary of the cone";
  if (!found.empty())
    os << " (dual index " << found_mem.violated + 1 << " of subcone " << describe_subset(found)
       << ")";
  throw ConeError(os.str(), ConeError::Kind::degenerate_target, found.empty() ? -1 : found_mem.violated,
                  found_mem.alpha, found);
}

}  // namespace

PositiveSolutionFamily positive_solution_family(const Matrix& C, const Vector& psi,
                                                const IndexList& subset) {
  if (psi.size() != C.rows()) throw InputError("psi length does not match C");
  const Matrix cs = select_columns(C, subset);
  const BiorthogonalSystem sys = biorthogonal_system(cs);
  const MembershipResult mem = classify_membership(sys, psi);
  if (mem.verdict != Membership::interior) {
    std::ostringstream os;
    os << "target is " << to_string(mem.verdict) << " for subcone " << describe_subset(subset)
       << " (dual index " << mem.violated + 1 << ")";
    throw ConeError(os.str(),
                    mem.verdict == Membership::outside ? ConeError::Kind::outside
                                                       : ConeError::Kind::degenerate_target,
                    mem.violated, mem.alpha, subset);
  }
  // Every column must lie in the span of the subset for the family to
  // describe all solutions.
  if (numerical_rank(C) != static_cast<Index>(subset.size()))
    throw RankError("subset does not span the columns", static_cast<Index>(subset.size()),
                    numerical_rank(C));
  return build_family(C, psi, subset, sys, mem);
}

PositiveSolutionFamily positive_solution_family(const Matrix& C, const Vector& psi) {
  if (psi.size() != C.rows()) throw InputError("psi length does not match C");
  const ConeLocation loc = locate_in_cone(C, psi);
  if (loc.verdict == Membership::outside) throw_outside(loc);
  if (C.size() == 0 || C.cwiseAbs().maxCoeff() <= cone_tolerance(C))
    throw ConeError("C has no nonzero column to span a subcone", ConeError::Kind::no_interior_subcone, -1);
  const IndexList gens = generating_set(C);
  const Index r = numerical_rank(C);
  if (loc.verdict == Membership::boundary) throw_degenerate(C, psi, gens, r);

  IndexList nonzero;
  const double ztol = cone_tolerance(C);
  for (Index j = 0; j < C.cols(); ++j)
    if (C.col(j).norm() > ztol) nonzero.push_back(j);
  std::vector<bool> is_gen(static_cast<std::size_t>(C.cols()), false);
  for (Index j : gens) is_gen[static_cast<std::size_t>(j)] = true;

  long budget = kMaxSubsets;
  IndexList chosen;
  BiorthogonalSystem chosen_sys;
  MembershipResult chosen_mem;
  auto try_pool = [&](const IndexList& pool, bool skip_all_generators) {
    for_each_combination(static_cast<Index>(pool.size()), r, [&](const IndexList& idx) {
      if (--budget < 0) return false;
      IndexList cols;
      bool all_gen = true;
      for (Index i : idx) {
        const Index c = pool[static_cast<std::size_t>(i)];
        cols.push_back(c);
        all_gen = all_gen && is_gen[static_cast<std::size_t>(c)];
      }
      if (skip_all_generators && all_gen) return true;
      if (!independent_columns(C, cols)) return true;
      BiorthogonalSystem sys = biorthogonal_system(select_columns(C, cols));
      MembershipResult mem = classify_membership(sys, psi);
      if (mem.verdict != Membership::interior) return true;
      chosen = cols;
      chosen_sys = std::move(sys);
      chosen_mem = std::move(mem);
      return false;
    });
  };
  try_pool(gens, false);
  if (chosen.empty() && nonzero.size() > gens.size()) try_pool(nonzero, true);
  if (chosen.empty())
    throw ConeError(budget < 0 ? "subset search budget exhausted"
                               : "no subcone of full rank holds the target in its interior",
                    ConeError::Kind::no_interior_subcone, -1);
  return build_family(C, psi, chosen, chosen_sys, chosen_mem);
}

// ---------------------------------------------------------------------------

const char* to_string(PositiveSolution::Route r) {
  switch (r) {
    case PositiveSolution::Route::family:
      return "family";
    case PositiveSolution::Route::split:
      return "split";
    case PositiveSolution::Route::margin:
      return "margin";
  }
  return "?";
}

namespace {

struct Subcone {
  IndexList cols;
  Matrix dual;      // first r dual vectors
  Vector alpha;     // coefficients of psi
  Vector centroid;  // mean of the columns
  double tol = 0.0;
};

// Open interval of t > 0 keeping alpha + t * delta strictly positive.
// Coefficients within tol of zero count as zero.
bool positive_interval(const Vector& alpha, const Vector& delta, double tol, double& lo,
                       double& hi) {
  for (Index k = 0; k < alpha.size(); ++k) {
    const double a = std::abs(alpha(k)) <= tol ? 0.0 : alpha(k);
    const double d = std::abs(delta(k)) <= tol ? 0.0 : delta(k);
    if (a < 0.0) return false;
    if (a == 0.0) {
      if (d <= 0.0) return false;
    } else if (d < 0.0) {
      hi = std::min(hi, a / -d);
    }
  }
  return lo < hi;
}

bool try_split(const Matrix& C, const Vector& psi, PositiveSolution& out) {
  const IndexList gens = generating_set(C);
  const Index r = numerical_rank(C);
  std::vector<Subcone> cands;
  for_each_combination(static_cast<Index>(gens.size()), r, [&](const IndexList& idx) {
    IndexList cols;
    for (Index i : idx) cols.push_back(gens[static_cast<std::size_t>(i)]);
    if (!independent_columns(C, cols)) return true;
    const Matrix cs = select_columns(C, cols);
    const BiorthogonalSystem sys = biorthogonal_system(cs);
    const MembershipResult mem = classify_membership(sys, psi);
    if (mem.verdict == Membership::outside) return true;
    Subcone s;
    s.cols = cols;
    s.dual = sys.dual.leftCols(r);
    s.alpha = mem.alpha.head(r);
    s.centroid = cs.rowwise().mean();
    // Tolerance on coefficients, converted from the units of psi.
    s.tol = mem.tolerance / std::max(1e-300, cs.colwise().norm().minCoeff());
    cands.push_back(std::move(s));
    return static_cast<long>(cands.size()) < kMaxSplitCandidates;
  });

  for (std::size_t a = 0; a < cands.size(); ++a)
    for (std::size_t b = a + 1; b < cands.size(); ++b) {
      const Subcone& s1 = cands[a];
      const Subcone& s2 = cands[b];
      const Vector w = s1.centroid - s2.centroid;
      double lo = 0.0, hi = std::numeric_limits<double>::infinity();
      if (!positive_interval(s1.alpha, s1.dual.transpose() * w, s1.tol, lo, hi)) continue;
      if (!positive_interval(s2.alpha, -(s2.dual.transpose() * w), s2.tol, lo, hi)) continue;
      const double t = std::isfinite(hi) ? 0.5 * (lo + hi) : lo + psi.norm() / w.norm();
      const Vector psi1 = psi + t * w, psi2 = psi - t * w;
      try {
        const PositiveSolutionFamily f1 = positive_solution_family(C, psi1, s1.cols);
        const PositiveSolutionFamily f2 = positive_solution_family(C, psi2, s2.cols);
        Vector y = 0.5 * (f1.base_point + f2.base_point);
        if (y.minCoeff() <= 0.0) continue;
        out.y = std::move(y);
        out.route = PositiveSolution::Route::split;
        out.subsets[0] = s1.cols;
        out.subsets[1] = s2.cols;
        out.residual = relative_residual(C, out.y, psi);
        if (out.residual <= 1e-8) return true;
      } catch (const ConeError&) {
        continue;
      }
    }
  return false;
}

}  // namespace

PositiveSolution strictly_positive_solution(const Matrix& C, const Vector& psi) {
  PositiveSolution out;
  try {
    const PositiveSolutionFamily fam = positive_solution_family(C, psi);
    if (fam.base_point.minCoeff() > 0.0 && fam.residual <= 1e-8) {
      out.y = fam.base_point;
      out.route = PositiveSolution::Route::family;
      out.subsets[0] = fam.subset;
      out.residual = fam.residual;
      return out;
    }
  } catch (const ConeError& e) {
    if (e.kind() != ConeError::Kind::no_interior_subcone) throw;
  }

  if (C.size() > 0 && C.cwiseAbs().maxCoeff() > cone_tolerance(C) && try_split(C, psi, out)) return out;

  // y = x + delta with C x = psi - delta * C 1, x >= 0.
  const Vector s = C * Vector::Ones(C.cols());
  const double dmax = max_shift_in_cone(C, psi, s);
  if (!(dmax > 0.0))
    throw ConeError("no strictly positive solution", ConeError::Kind::degenerate_target, -1);
  const double delta = std::isfinite(dmax) ? 0.5 * dmax : 1.0;
  const NnlsResult fit = nnls(C, psi - delta * s);
  out.y = fit.x.array() + delta;
  out.route = PositiveSolution::Route::margin;
  out.residual = relative_residual(C, out.y, psi);
  if (out.residual > 1e-8)
    throw ConeError("no strictly positive solution within tolerance",
                    ConeError::Kind::degenerate_target, -1);
  return out;
}

}  // namespace tradeeq
