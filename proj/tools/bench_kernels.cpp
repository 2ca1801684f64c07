// Serial versus OpenMP timing of the hot kernels and of the full solver.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "tradeeq/equilibrium.hpp"
#include "tradeeq/kernels.hpp"

using namespace tradeeq;

namespace {

template <class F>
double best_ms(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const Index n = argc > 1 ? std::atol(argv[1]) : 400;
  const Index l = argc > 2 ? std::atol(argv[2]) : 400;
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Matrix C(n, l), B(n, l);
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < l; ++i) {
      C(k, i) = u(rng);
      B(k, i) = u(rng);
    }
  const Vector psi = B.rowwise().sum();
  const Vector p = Vector::Constant(n, 1.0 / n);
  Vector out_s(n), out_p(n);

  std::printf("threads %d, parallel build %s, n=%ld l=%ld\n", kernels::max_threads(),
              kernels::parallel_available() ? "yes" : "no", static_cast<long>(n), static_cast<long>(l));
  std::printf("%-18s %12s %12s %8s %s\n", "kernel", "serial ms", "omp ms", "speedup", "identical");

  const double ts = best_ms(20, [&] { kernels::serial::regularized_map(C, B, psi, p, 1e-3, out_s); });
  const double tp = best_ms(20, [&] { kernels::omp::regularized_map(C, B, psi, p, 1e-3, out_p); });
  std::printf("%-18s %12.3f %12.3f %8.2f %s\n", "regularized_map", ts, tp, ts / tp,
              out_s == out_p ? "yes" : "no");

  const double es = best_ms(20, [&] { kernels::serial::excess_demand(C, B, psi, p, out_s); });
  const double ep = best_ms(20, [&] { kernels::omp::excess_demand(C, B, psi, p, out_p); });
  std::printf("%-18s %12.3f %12.3f %8.2f %s\n", "excess_demand", es, ep, es / ep, out_s == out_p ? "yes" : "no");

  const Index M = 40, goods = 64;
  std::vector<std::int64_t> flow(static_cast<std::size_t>(M * M * goods));
  std::uniform_int_distribution<std::int64_t> ticks(0, 1 << 20);
  for (Index k = 0; k < M; ++k)
    for (Index j = 0; j < M; ++j)
      for (Index s = 0; s < goods; ++s)
        flow[static_cast<std::size_t>((k * M + j) * goods + s)] = k == j ? 0 : ticks(rng);
  std::vector<std::int64_t> im_s, ex_s, im_p, ex_p;
  const double as = best_ms(20, [&] { kernels::serial::accumulate_flows(flow, M, goods, im_s, ex_s); });
  const double ap = best_ms(20, [&] { kernels::omp::accumulate_flows(flow, M, goods, im_p, ex_p); });
  std::printf("%-18s %12.3f %12.3f %8.2f %s\n", "accumulate_flows", as, ap, as / ap,
              im_s == im_p && ex_s == ex_p ? "yes" : "no");

  const Index ns = 60;
  Matrix Cs = C.topLeftCorner(ns, ns), Bs = B.topLeftCorner(ns, ns);
  SolverOptions so;
  so.exec = Exec::serial;
  SolverOptions po = so;
  po.exec = Exec::parallel;
  EquilibriumSolution a, b;
  const double ss = best_ms(3, [&] { a = solve_fixed_point(Cs, Bs, so); });
  const double sp = best_ms(3, [&] { b = solve_fixed_point(Cs, Bs, po); });
  std::printf("%-18s %12.3f %12.3f %8.2f %s\n", "solve_fixed_point", ss, sp, ss / sp,
              a.p0.p == b.p0.p ? "yes" : "no");
  return 0;
}
