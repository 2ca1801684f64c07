#pragma once

#include <string>
#include <vector>

#include "tradeeq/equilibrium.hpp"
#include "tradeeq/linalg.hpp"

namespace tradeeq {

/// psi_bar = C y.
Vector real_consumption(const Matrix& C, const Vector& y);

/// Rows in I copied from B, rows off I replaced by y_i c_ki.
Matrix modified_supply(const Matrix& C, const Matrix& B, const Vector& y, const IndexList& I);

/// p0 rescaled on I so that sum_I psi_k p1_k = sum_I psi_k, and 1 off I.
/// Throws PreconditionError when p0 carries more than off_tol of its mass
/// off I or psi_k <= 0 on I.
Vector generalized_price(const Vector& p0, const Vector& psi, const IndexList& I,
                         double off_tol = 1e-12);

struct RecessionLevel {
  double R = 0.0;          // sum_{N\I}(psi - psi_bar) / sum_{N\I} psi
  double R_general = 0.0;  // <psi - psi_bar, p1> / <psi, p1>
};

/// psi_bar is taken equal to psi on I. R = 0 when I = N.
RecessionLevel recession_level(const Vector& psi, const Vector& psi_bar, const IndexList& I,
                               const Vector& p1);

struct RecessionReport {
  IndexList clearing_set;
  Index multiplicity = 0;
  Vector psi;
  Vector psi_bar;
  Matrix B0;
  Vector p1;
  double R = 0.0;
  double R_general = 0.0;
  double walras_residual = 0.0;
  /// Largest scaled change of the B0 excess demand when p1 is moved off I.
  double perturbation_change = 0.0;
  bool degeneracy_verified = false;
  std::vector<std::string> notes;
};

RecessionReport degeneracy_report(const EquilibriumSolution& sol, const Matrix& C, const Matrix& B,
                                  double tol_clear = 1e-6);

}  // namespace tradeeq
