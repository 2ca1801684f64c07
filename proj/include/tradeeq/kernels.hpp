#pragma once

#include <cstdint>
#include <vector>

#include "tradeeq/linalg.hpp"

namespace tradeeq {

/// Execution policy for the data-parallel kernels.
enum class Exec { serial, parallel, automatic };

namespace kernels {

/// True when the library was built with OpenMP.
bool parallel_available();
int max_threads();

/// Work size (goods x agents) from which `Exec::automatic` picks OpenMP.
inline constexpr Index kParallelThreshold = 1 << 14;

bool use_parallel(Exec exec, Index work);

// Every kernel computes each output element in a fixed summation order, so
// the serial and OpenMP variants agree bit for bit.

/// cost_i = <C_i, p>, income_i = <b_i, p>.
void agent_values(const Matrix& c, const Matrix& b, const Vector& p, Vector& cost, Vector& income,
                  Exec exec = Exec::automatic);

/// Regularized price map on the simplex:
///   f_k = (1/psi_k) sum_i (p_k c_ki + eps) / (<C_i,p> + n eps) * <b_i,p>,
///   out = f / sum(f).
/// Returns sum(f) before normalization.
double regularized_map(const Matrix& c, const Matrix& b, const Vector& psi, const Vector& p,
                       double eps, Vector& out, Exec exec = Exec::automatic);

/// out_k = sum_i c_ki <b_i,p>/<C_i,p> - psi_k. Caller guarantees <C_i,p> > 0.
void excess_demand(const Matrix& c, const Matrix& b, const Vector& psi, const Vector& p,
                   Vector& out, Exec exec = Exec::automatic);

/// Flow aggregation on integer ticks. `flow` is M x M x n row-major
/// (exporter, importer, good). Outputs are n x M row-major:
/// imports(s,k) = sum_j flow[j][k][s], exports(s,k) = sum_j flow[k][j][s].
void accumulate_flows(const std::vector<std::int64_t>& flow, Index countries, Index goods,
                      std::vector<std::int64_t>& imports, std::vector<std::int64_t>& exports,
                      Exec exec = Exec::automatic);

namespace serial {
void agent_values(const Matrix& c, const Matrix& b, const Vector& p, Vector& cost, Vector& income);
double regularized_map(const Matrix& c, const Matrix& b, const Vector& psi, const Vector& p,
                       double eps, Vector& out);
void excess_demand(const Matrix& c, const Matrix& b, const Vector& psi, const Vector& p,
                   Vector& out);
void accumulate_flows(const std::vector<std::int64_t>& flow, Index countries, Index goods,
                      std::vector<std::int64_t>& imports, std::vector<std::int64_t>& exports);
}  // namespace serial

namespace omp {
void agent_values(const Matrix& c, const Matrix& b, const Vector& p, Vector& cost, Vector& income);
double regularized_map(const Matrix& c, const Matrix& b, const Vector& psi, const Vector& p,
                       double eps, Vector& out);
void excess_demand(const Matrix& c, const Matrix& b, const Vector& psi, const Vector& p,
                   Vector& out);
void accumulate_flows(const std::vector<std::int64_t>& flow, Index countries, Index goods,
                      std::vector<std::int64_t>& imports, std::vector<std::int64_t>& exports);
}  // namespace omp

}  // namespace kernels
}  // namespace tradeeq
