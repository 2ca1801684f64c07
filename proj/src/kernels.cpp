#include "tradeeq/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tradeeq::kernels {

bool parallel_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

bool use_parallel(Exec exec, Index work) {
  switch (exec) {
    case Exec::serial:
      return false;
    case Exec::parallel:
      return true;
    case Exec::automatic:
      return parallel_available() && max_threads() > 1 && work >= kParallelThreshold;
  }
  return false;
}

void agent_values(const Matrix& c, const Matrix& b, const Vector& p, Vector& cost, Vector& income,
                  Exec exec) {
  if (use_parallel(exec, c.size()))
    omp::agent_values(c, b, p, cost, income);
  else
    serial::agent_values(c, b, p, cost, income);
}

double regularized_map(const Matrix& c, const Matrix& b, const Vector& psi, const Vector& p,
                       double eps, Vector& out, Exec exec) {
  return use_parallel(exec, c.size()) ? omp::regularized_map(c, b, psi, p, eps, out)
                                      : serial::regularized_map(c, b, psi, p, eps, out);
}

void excess_demand(const Matrix& c, const Matrix& b, const Vector& psi, const Vector& p,
                   Vector& out, Exec exec) {
  if (use_parallel(exec, c.size()))
    omp::excess_demand(c, b, psi, p, out);
  else
    serial::excess_demand(c, b, psi, p, out);
}

void accumulate_flows(const std::vector<std::int64_t>& flow, Index countries, Index goods,
                      std::vector<std::int64_t>& imports, std::vector<std::int64_t>& exports,
                      Exec exec) {
  if (use_parallel(exec, countries * countries * goods))
    omp::accumulate_flows(flow, countries, goods, imports, exports);
  else
    serial::accumulate_flows(flow, countries, goods, imports, exports);
}

// ---------------------------------------------------------------------------
// Serial reference implementations.

namespace serial {

void agent_values(const Matrix& c, const Matrix& b, const Vector& p, Vector& cost,
                  Vector& income) {
  const Index n = c.rows(), l = c.cols();
  cost.resize(l);
  income.resize(l);
  for (Index i = 0; i < l; ++i) {
    double sc = 0.0, sb = 0.0;
    for (Index k = 0; k < n; ++k) {
      sc += c(k, i) * p(k);
      sb += b(k, i) * p(k);
    }
    cost(i) = sc;
    income(i) = sb;
  }
}

double regularized_map(const Matrix& c, const Matrix& b, const Vector& psi, const Vector& p,
                       double eps, Vector& out) {
  const Index n = c.rows(), l = c.cols();
  Vector cost, income;
  agent_values(c, b, p, cost, income);
  const double shift = static_cast<double>(n) * eps;
  out.resize(n);
  for (Index k = 0; k < n; ++k) {
    double acc = 0.0;
    for (Index i = 0; i < l; ++i) acc += (p(k) * c(k, i) + eps) / (cost(i) + shift) * income(i);
    out(k) = acc / psi(k);
  }
  double total = 0.0;
  for (Index k = 0; k < n; ++k) total += out(k);
  for (Index k = 0; k < n; ++k) out(k) /= total;
  return total;
}

void excess_demand(const Matrix& c, const Matrix& b, const Vector& psi, const Vector& p,
                   Vector& out) {
  const Index n = c.rows(), l = c.cols();
  Vector cost, income;
  agent_values(c, b, p, cost, income);
  out.resize(n);
  for (Index k = 0; k < n; ++k) {
    double acc = 0.0;
    for (Index i = 0; i < l; ++i) acc += c(k, i) * (income(i) / cost(i));
    out(k) = acc - psi(k);
  }
}

void accumulate_flows(const std::vector<std::int64_t>& flow, Index countries, Index goods,
                      std::vector<std::int64_t>& imports, std::vector<std::int64_t>& exports) {
  const auto m = static_cast<std::size_t>(countries), g = static_cast<std::size_t>(goods);
  imports.assign(g * m, 0);
  exports.assign(g * m, 0);
  for (std::size_t s = 0; s < g; ++s)
    for (std::size_t k = 0; k < m; ++k) {
      std::int64_t in = 0, out = 0;
      for (std::size_t j = 0; j < m; ++j) {
        in += flow[(j * m + k) * g + s];
        out += flow[(k * m + j) * g + s];
      }
      imports[s * m + k] = in;
      exports[s * m + k] = out;
    }
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP variants. Parallel over output elements; each element keeps the
// serial summation order.

namespace omp {

void agent_values(const Matrix& c, const Matrix& b, const Vector& p, Vector& cost,
                  Vector& income) {
  const Index n = c.rows(), l = c.cols();
  cost.resize(l);
  income.resize(l);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < l; ++i) {
    double sc = 0.0, sb = 0.0;
    for (Index k = 0; k < n; ++k) {
      sc += c(k, i) * p(k);
      sb += b(k, i) * p(k);
    }
    cost(i) = sc;
    income(i) = sb;
  }
}

double regularized_map(const Matrix& c, const Matrix& b, const Vector& psi, const Vector& p,
                       double eps, Vector& out) {
  const Index n = c.rows(), l = c.cols();
  Vector cost, income;
  agent_values(c, b, p, cost, income);
  const double shift = static_cast<double>(n) * eps;
  out.resize(n);
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < n; ++k) {
    double acc = 0.0;
    for (Index i = 0; i < l; ++i) acc += (p(k) * c(k, i) + eps) / (cost(i) + shift) * income(i);
    out(k) = acc / psi(k);
  }
  double total = 0.0;
  for (Index k = 0; k < n; ++k) total += out(k);
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < n; ++k) out(k) /= total;
  return total;
}

void excess_demand(const Matrix& c, const Matrix& b, const Vector& psi, const Vector& p,
                   Vector& out) {
  const Index n = c.rows(), l = c.cols();
  Vector cost, income;
  agent_values(c, b, p, cost, income);
  out.resize(n);
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < n; ++k) {
    double acc = 0.0;
    for (Index i = 0; i < l; ++i) acc += c(k, i) * (income(i) / cost(i));
    out(k) = acc - psi(k);
  }
}

void accumulate_flows(const std::vector<std::int64_t>& flow, Index countries, Index goods,
                      std::vector<std::int64_t>& imports, std::vector<std::int64_t>& exports) {
  const auto m = static_cast<std::size_t>(countries), g = static_cast<std::size_t>(goods);
  imports.assign(g * m, 0);
  exports.assign(g * m, 0);
  const auto cells = static_cast<long long>(g * m);
#pragma omp parallel for schedule(static)
  for (long long cell = 0; cell < cells; ++cell) {
    const auto s = static_cast<std::size_t>(cell) / m;
    const auto k = static_cast<std::size_t>(cell) % m;
    std::int64_t in = 0, out = 0;
    for (std::size_t j = 0; j < m; ++j) {
      in += flow[(j * m + k) * g + s];
      out += flow[(k * m + j) * g + s];
    }
    imports[s * m + k] = in;
    exports[s * m + k] = out;
  }
}

}  // namespace omp

}  // namespace tradeeq::kernels
