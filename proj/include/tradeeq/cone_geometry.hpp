#pragma once

#include "tradeeq/linalg.hpp"

namespace tradeeq {

/// Generators a_1..a_t stored as columns, with their numerical rank.
struct ConeBasis {
  Matrix vectors;
  Index rank = 0;

  explicit ConeBasis(Matrix v);
};

/// primal columns extend the given vectors to a basis of R^n; dual columns
/// satisfy <primal_i, dual_j> = delta_ij.
struct BiorthogonalSystem {
  Matrix primal;
  Matrix dual;
  Index given = 0;          // leading primal columns that came from the input
  IndexList extension_axes; // coordinate axes appended, in order
  double max_error = 0.0;   // max |<primal_i, dual_j> - delta_ij|
};

/// Throws RankError when the columns of `independent` are dependent.
BiorthogonalSystem biorthogonal_system(const Matrix& independent);

enum class Membership { interior, boundary, outside };

const char* to_string(Membership m);

struct MembershipResult {
  Membership verdict = Membership::outside;
  Vector alpha;         // <f_i, b> for all n dual vectors
  double tolerance = 0.0;
  Index violated = -1;  // first dual index that rules out interior
};

/// Membership of b in the cone of linearly independent columns. Interior
/// means relative interior: positive coefficients and b in the span.
MembershipResult classify_membership(const Matrix& independent, const Vector& b);
MembershipResult classify_membership(const BiorthogonalSystem& sys, const Vector& b);

/// Indices of a generating subset: no member lies in the cone of the others
/// and the cone is unchanged. Among positively proportional columns the
/// lowest index is kept.
IndexList generating_set(const Matrix& vectors);
IndexList generating_set(const ConeBasis& cone);

struct ConeLocation {
  Membership verdict = Membership::outside;
  Vector weights;       // nonnegative x with G x close to b
  double residual = 0.0;
  double tolerance = 0.0;
  Vector certificate;   // Outside only: y with G^T y <= 0 and <y,b> > 0
};

/// Membership of b in cone(G) for an arbitrary (possibly dependent) set of
/// generators, relative interior included.
ConeLocation locate_in_cone(const Matrix& generators, const Vector& b);

/// Largest delta with b - delta * direction in cone(G), by bisection.
/// Returns 0 when b itself is outside.
double max_shift_in_cone(const Matrix& generators, const Vector& b, const Vector& direction);

/// Strictly positive solutions of C y = psi parametrized over one subcone S
/// of r independent columns that holds psi in its interior:
///   y = sum_i gamma_i z_i, i over {r} and the free columns,
/// with sum(gamma) = 1, gamma_free > 0 and gamma_lhs * gamma_free < gamma_rhs.
struct PositiveSolutionFamily {
  IndexList subset;   // columns of S (size r)
  IndexList free;     // remaining columns (size l - r)
  Matrix dual;        // first r dual vectors of the biorthogonal system of S
  Matrix z;           // l x (l-r+1); column 0 is z_r, column 1+q belongs to free[q]
  Vector ystar;       // per free column
  Matrix gamma_lhs;   // r x (l-r): <C_i, f_k> y*_i
  Vector gamma_rhs;   // <psi, f_k>
  Vector base_gamma;  // l-r+1, column order of z
  Vector base_point;
  double residual = 0.0;  // relative residual of C * base_point

  /// y = z * gamma for a full weight vector (length l-r+1).
  Vector combine(const Vector& gamma) const;
  /// Weights for the free columns, gamma_r taken as 1 - sum.
  Vector gamma_from_free(const Vector& gamma_free) const;
  /// Strict positivity inequalities for a full weight vector.
  bool strictly_feasible(const Vector& gamma) const;
};

/// Searches r-subsets (generating columns first) for one holding psi in its
/// interior. Throws ConeError: outside, degenerate_target (psi on the
/// boundary of cone(C)) or no_interior_subcone.
PositiveSolutionFamily positive_solution_family(const Matrix& C, const Vector& psi);
/// Same, over a given independent subset that must hold psi in its interior.
PositiveSolutionFamily positive_solution_family(const Matrix& C, const Vector& psi,
                                                const IndexList& subset);

struct PositiveSolution {
  enum class Route { family, split, margin };
  Vector y;
  Route route = Route::family;
  IndexList subsets[2];  // subcones used by the family/split routes
  double residual = 0.0;
};

const char* to_string(PositiveSolution::Route r);

/// Strictly positive y with C y = psi. Tries the family, then a two-piece
/// split of psi across subcones, then a margin shift toward sum(C_i).
/// Throws ConeError when psi is not in the relative interior of cone(C).
PositiveSolution strictly_positive_solution(const Matrix& C, const Vector& psi);

}  // namespace tradeeq
