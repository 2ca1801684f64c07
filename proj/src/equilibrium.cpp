#include "tradeeq/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tradeeq/consistency.hpp"
#include "tradeeq/error.hpp"

namespace tradeeq {

const char* to_string(Normalization n) {
  switch (n) {
    case Normalization::simplex:
      return "simplex";
    case Normalization::clearing_cost:
      return "clearing-cost";
    case Normalization::raw:
      return "raw";
  }
  return "?";
}

Normalization parse_normalization(const std::string& s) {
  if (s == "simplex") return Normalization::simplex;
  if (s == "clearing-cost") return Normalization::clearing_cost;
  if (s == "raw") return Normalization::raw;
  throw InputError("unknown normalization '" + s + "'", "normalization");
}

std::vector<double> EpsilonSchedule::values() const {
  validate();
  std::vector<double> out;
  double eps = start;
  for (int m = 0; m < steps; ++m, eps *= ratio) out.push_back(eps);
  return out;
}

void EpsilonSchedule::validate() const {
  if (!(start > 0.0) || !std::isfinite(start)) throw InputError("epsilon start must be positive", "eps-start");
  if (!(ratio > 0.0 && ratio < 1.0)) throw InputError("epsilon ratio must lie in (0,1)", "eps-ratio");
  if (steps < 1) throw InputError("epsilon steps must be at least 1", "eps-steps");
}

void SolverOptions::validate() const {
  schedule.validate();
  if (!(damping > 0.0 && damping <= 1.0)) throw InputError("damping must lie in (0,1]", "damping");
  if (!(tol > 0.0)) throw InputError("tol must be positive", "tol");
  if (!(tol_clear > 0.0)) throw InputError("tol-clear must be positive", "tol-clear");
  if (!(tol_inner > 0.0)) throw InputError("tol-inner must be positive", "tol-inner");
  if (max_iterations < 1) throw InputError("iteration cap must be positive", "max-iterations");
}

Vector excess_demand(const Matrix& C, const Matrix& B, const Vector& p, Exec exec) {
  if (B.rows() != C.rows() || B.cols() != C.cols()) throw InputError("C and B must have the same shape");
  if (p.size() != C.rows()) throw InputError("price vector length does not match the goods");
  Vector cost, income;
  kernels::agent_values(C, B, p, cost, income, exec);
  for (Index i = 0; i < cost.size(); ++i)
    if (!(cost(i) > 0.0)) {
      std::ostringstream os;
      os << "demand cost <C_i,p> is zero for agent " << i + 1;
      throw InputError(os.str(), "agent " + std::to_string(i + 1));
    }
  const Vector psi = B.rowwise().sum();
  Vector out;
  kernels::excess_demand(C, B, psi, p, out, exec);
  return out;
}

EquilibriumCheck is_equilibrium(const Matrix& C, const Matrix& B, const Vector& p, double tol,
                                double tol_clear) {
  EquilibriumCheck out;
  out.excess = excess_demand(C, B, p);
  const Vector psi = B.rowwise().sum();
  out.equilibrium = true;
  for (Index k = 0; k < psi.size(); ++k) {
    const double scale = std::max(1.0, psi(k));
    if (out.excess(k) > tol * scale) {
      out.equilibrium = false;
      out.violations.push_back(k);
    }
    if (std::abs(out.excess(k)) <= tol_clear * scale) out.clearing_set.push_back(k);
  }
  return out;
}

namespace {

void check_solver_inputs(const Matrix& C, const Matrix& B, const Vector& psi,
                         std::vector<std::string>& warnings) {
  if (B.rows() != C.rows() || B.cols() != C.cols()) throw InputError("C and B must have the same shape");
  if (C.size() == 0) throw InputError("empty instance");
  if (!C.allFinite() || !B.allFinite()) throw InputError("non-finite matrix entry");
  if (C.minCoeff() < 0.0 || B.minCoeff() < 0.0) throw InputError("negative matrix entry");
  for (Index k = 0; k < psi.size(); ++k)
    if (!(psi(k) > 0.0)) {
      std::ostringstream os;
      os << "psi_" << k + 1 << " = 0, the price map divides by it";
      throw PreconditionError("aggregate supply positive", os.str());
    }
  if (C.minCoeff() > 0.0) return;
  if (C.rowwise().sum().minCoeff() > 0.0 && C.colwise().sum().minCoeff() > 0.0) {
    warnings.push_back("C has zero entries; convergence is not covered by the existence result");
    return;
  }
  throw PreconditionError("C with positive row and column sums",
                          "some good has no demand or some agent demands nothing");
}

void apply_normalization(Vector& p, Normalization norm, const Vector& psi, const IndexList& clearing) {
  if (norm == Normalization::clearing_cost && !clearing.empty()) {
    double num = 0.0, den = 0.0;
    for (Index k : clearing) {
      num += psi(k);
      den += psi(k) * p(k);
    }
    if (den > 0.0) p *= num / den;
  } else {
    p /= p.sum();
  }
}

// Fills every derived field from p (simplex-normalized on entry).
void finish_solution(const Matrix& C, const Matrix& B, const Vector& psi, Vector p,
                     const SolverOptions& opts, EquilibriumSolution& sol) {
  const EquilibriumCheck chk = is_equilibrium(C, B, p, opts.tol, opts.tol_clear);
  sol.excess = chk.excess;
  sol.clearing_set = chk.clearing_set;
  Vector cost, income;
  kernels::agent_values(C, B, p, cost, income, opts.exec);
  sol.y = income.cwiseQuotient(cost);
  const Vector psi_bar = C * sol.y;
  const double scale = psi.dot(p);
  sol.walras_residual = std::abs(psi_bar.dot(p) - scale) / scale;
  apply_normalization(p, opts.normalization, psi, sol.clearing_set);
  sol.p0.p = std::move(p);
  sol.p0.normalization = opts.normalization;
}

}  // namespace

EquilibriumSolution solve_fixed_point(const Matrix& C, const Matrix& B, const SolverOptions& opts) {
  opts.validate();
  EquilibriumSolution sol;
  const Vector psi = B.rowwise().sum();
  check_solver_inputs(C, B, psi, sol.warnings);
  const Index n = C.rows();
  const double theta = opts.damping;

  Vector p = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector g(n);
  const std::vector<double> eps_list = opts.schedule.values();
  for (std::size_t m = 0; m < eps_list.size(); ++m) {
    const double eps = eps_list[m];
    const bool last = m + 1 == eps_list.size();
    long it = 0;
    double r = 0.0;
    while (true) {
      kernels::regularized_map(C, B, psi, p, eps, g, opts.exec);
      r = (g - p).cwiseAbs().maxCoeff();
      if (r <= opts.tol_inner) break;
      if (it >= opts.max_iterations) break;
      p = (1.0 - theta) * p + theta * g;
      p /= p.sum();
      ++it;
    }
    sol.iterations += it;
    sol.final_epsilon = eps;
    sol.residual = r;
    if (r > opts.tol_inner) {
      std::ostringstream os;
      os << "iteration cap reached at epsilon " << eps << " (residual " << r << ")";
      if (last) throw ConvergenceError(os.str(), r, sol.iterations);
      sol.warnings.push_back(os.str());
    }
  }

  const EquilibriumCheck raw = is_equilibrium(C, B, p, opts.tol, opts.tol_clear);
  if (!raw.equilibrium) {
    double worst = 0.0;
    for (Index k : raw.violations) worst = std::max(worst, raw.excess(k) / std::max(1.0, psi(k)));
    std::ostringstream os;
    os << "limit point is not an equilibrium (max scaled excess " << worst << ")";
    throw ConvergenceError(os.str(), worst, sol.iterations);
  }
  if (raw.clearing_set.empty())
    throw ConvergenceError("limit point clears no market", 0.0, sol.iterations);

  // Prices off the clearing set tend to zero with epsilon; snap them when
  // the snapped vector is still an equilibrium with the same clearing set.
  if (static_cast<Index>(raw.clearing_set.size()) < n) {
    Vector snapped = Vector::Zero(n);
    for (Index k : raw.clearing_set) snapped(k) = p(k);
    bool keep = snapped.sum() > 0.0;
    if (keep) {
      snapped /= snapped.sum();
      keep = (C.transpose() * snapped).minCoeff() > 0.0;
    }
    if (keep) {
      const EquilibriumCheck chk = is_equilibrium(C, B, snapped, opts.tol, opts.tol_clear);
      keep = chk.equilibrium && chk.clearing_set == raw.clearing_set;
    }
    if (keep)
      p = snapped;
    else
      sol.warnings.push_back("prices off the clearing set kept unsnapped");
  }
  finish_solution(C, B, psi, p, opts, sol);
  return sol;
}

EquilibriumSolution evaluate_at(const Matrix& C, const Matrix& B, const Vector& p,
                                const SolverOptions& opts) {
  opts.validate();
  if (p.size() != C.rows() || p.minCoeff() < 0.0 || !(p.sum() > 0.0))
    throw InputError("prices must be nonnegative and nonzero");
  const EquilibriumCheck chk = is_equilibrium(C, B, p, opts.tol, opts.tol_clear);
  if (!chk.equilibrium) throw PreconditionError("equilibrium prices", "excess demand above tolerance");
  if (chk.clearing_set.empty()) throw PreconditionError("equilibrium prices", "no market clears");
  EquilibriumSolution sol;
  finish_solution(C, B, B.rowwise().sum(), p / p.sum(), opts, sol);
  return sol;
}

IdealCheck check_ideal(const Matrix& C, const Matrix& B, const Vector& p) {
  if (B.rows() != C.rows() || B.cols() != C.cols()) throw InputError("C and B must have the same shape");
  if (p.size() != C.rows()) throw InputError("price vector length does not match the goods");
  IdealCheck out;
  const Vector cost = C.transpose() * p;
  out.balances = (B - C).transpose() * p;
  out.ideal = true;
  double worst = -1.0;
  for (Index i = 0; i < cost.size(); ++i) {
    const double rel = cost(i) > 0.0 ? std::abs(out.balances(i)) / cost(i)
                                     : std::numeric_limits<double>::infinity();
    if (!(cost(i) > 0.0) || std::abs(out.balances(i)) > 1e-8 * cost(i)) out.ideal = false;
    if (rel > worst) {
      worst = rel;
      out.worst_agent = i;
      out.worst_balance = cost(i) > 0.0 ? out.balances(i) / cost(i) : out.balances(i);
    }
  }
  if ((cost.array() > 0.0).all()) {
    const EquilibriumCheck chk = is_equilibrium(C, B, p);
    out.full_clearing = static_cast<Index>(chk.clearing_set.size()) == C.rows();
  }
  return out;
}

IdealExistence exists_ideal(const Matrix& C, const Matrix& B) {
  if (B.rows() != C.rows() || B.cols() != C.cols()) throw InputError("C and B must have the same shape");
  const Vector gap = (B - C).rowwise().sum();
  const double scale = 1.0 + C.rowwise().sum().cwiseAbs().maxCoeff();
  if (gap.cwiseAbs().maxCoeff() > 1e-9 * scale) {
    std::ostringstream os;
    os << "max |sum_i (b_i - C_i)| = " << gap.cwiseAbs().maxCoeff();
    throw PreconditionError("aggregate supply equals aggregate demand", os.str());
  }
  IdealExistence out;
  std::string reasons;
  try {
    const Factorization f = factor_supply(C, B, std::nullopt, FreeParameterRule{0.5, true});
    const DVector d = solve_D(f);
    const PriceFromD pd = price_from_D(C, d.d);
    if (!pd.found) {
      reasons = "d is outside the cone of the rows of C";
    } else if (check_ideal(C, B, pd.p0).ideal) {
      out.exists = true;
      out.p0 = pd.p0 / pd.p0.sum();
      out.route = "factor";
      return out;
    } else {
      reasons = "recovered prices leave nonzero balances";
    }
  } catch (const Error& e) {
    reasons = e.what();
  }
  // The factorization is one choice among many; search the prices directly.
  if (auto p = prices_for_ratios(C, B, Vector::Ones(C.cols()))) {
    if (check_ideal(C, B, *p).ideal) {
      out.exists = true;
      out.p0 = *p;
      out.route = "direct";
      return out;
    }
  }
  out.reason = reasons.empty() ? "no nonnegative prices balance every agent"
                               : reasons + "; no nonnegative prices balance every agent";
  return out;
}

std::vector<BatchResult> solve_batch(const std::vector<std::pair<Matrix, Matrix>>& instances,
                                     const SolverOptions& opts) {
  std::vector<BatchResult> out(instances.size());
  SolverOptions inner = opts;
  inner.exec = Exec::serial;
  const auto count = static_cast<long long>(instances.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    const auto& [c, b] = instances[static_cast<std::size_t>(i)];
    try {
      out[static_cast<std::size_t>(i)].solution = solve_fixed_point(c, b, inner);
    } catch (const std::exception& e) {
      out[static_cast<std::size_t>(i)].error = e.what();
    }
  }
  return out;
}

}  // namespace tradeeq
