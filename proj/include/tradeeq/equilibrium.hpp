#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tradeeq/kernels.hpp"
#include "tradeeq/linalg.hpp"

namespace tradeeq {

enum class Normalization { simplex, clearing_cost, raw };

const char* to_string(Normalization n);
Normalization parse_normalization(const std::string& s);

struct PriceVector {
  Vector p;
  Normalization normalization = Normalization::simplex;
};

/// eps_m = start * ratio^m, m = 0..steps-1.
struct EpsilonSchedule {
  double start = 1e-2;
  double ratio = 0.25;
  int steps = 13;

  std::vector<double> values() const;
  /// Throws InputError unless start > 0, 0 < ratio < 1 and steps >= 1.
  void validate() const;
};

struct SolverOptions {
  EpsilonSchedule schedule;
  double damping = 0.5;     // theta in (0, 1]
  double tol = 1e-6;        // excess_k <= tol * max(1, psi_k)
  double tol_clear = 1e-6;  // |excess_k| <= tol_clear * max(1, psi_k) puts k in I
  double tol_inner = 1e-12; // max |G(p) - p| per epsilon
  long max_iterations = 200000;  // per epsilon
  Normalization normalization = Normalization::simplex;
  Exec exec = Exec::automatic;

  void validate() const;
};

struct EquilibriumSolution {
  PriceVector p0;
  IndexList clearing_set;  // I, 0-based
  Vector y;                // <b_i,p0> / <C_i,p0>
  Vector excess;
  long iterations = 0;
  double final_epsilon = 0.0;
  double residual = 0.0;        // fixed-point residual at the final epsilon
  double walras_residual = 0.0; // |<psi_bar,p0> - <psi,p0>| / <psi,p0>
  std::vector<std::string> warnings;
};

/// d_k = sum_i c_ki <b_i,p>/<C_i,p> - psi_k. Throws InputError naming the
/// first agent with <C_i,p> = 0.
Vector excess_demand(const Matrix& C, const Matrix& B, const Vector& p,
                     Exec exec = Exec::automatic);

struct EquilibriumCheck {
  bool equilibrium = false;
  IndexList clearing_set;
  IndexList violations;  // goods with excess above tolerance
  Vector excess;
};

EquilibriumCheck is_equilibrium(const Matrix& C, const Matrix& B, const Vector& p,
                                double tol = 1e-6, double tol_clear = 1e-6);

/// Damped iteration of the regularized price map along the epsilon
/// schedule, warm-started. Throws PreconditionError for psi_k = 0 or a C
/// without positive row and column sums, and ConvergenceError when the
/// final epsilon hits the iteration cap or the limit is not an equilibrium.
EquilibriumSolution solve_fixed_point(const Matrix& C, const Matrix& B,
                                      const SolverOptions& opts = {});

/// Solution record for given prices; throws PreconditionError unless p is
/// an equilibrium under opts' tolerances.
EquilibriumSolution evaluate_at(const Matrix& C, const Matrix& B, const Vector& p,
                                const SolverOptions& opts = {});

struct IdealCheck {
  bool ideal = false;
  bool full_clearing = false;  // every good clears at p
  Index worst_agent = -1;
  double worst_balance = 0.0;  // <p, b_i - C_i> / <p, C_i> at worst_agent
  Vector balances;             // <p, b_i - C_i>
};

IdealCheck check_ideal(const Matrix& C, const Matrix& B, const Vector& p);

struct IdealExistence {
  bool exists = false;
  Vector p0;
  std::string route;   // "factor" or "direct"
  std::string reason;  // when absent
};

/// Throws PreconditionError when sum_i (b_i - C_i) != 0.
IdealExistence exists_ideal(const Matrix& C, const Matrix& B);

struct BatchResult {
  std::optional<EquilibriumSolution> solution;
  std::string error;
};

/// Independent solves, parallel over instances.
std::vector<BatchResult> solve_batch(const std::vector<std::pair<Matrix, Matrix>>& instances,
                                     const SolverOptions& opts = {});

}  // namespace tradeeq
