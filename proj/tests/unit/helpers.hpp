#pragma once

#include <initializer_list>
#include <random>

#include "tradeeq/linalg.hpp"

namespace testing {

using tradeeq::Matrix;
using tradeeq::Vector;

/// Matrix from columns, the layout used by the agent-per-column examples.
inline Matrix cols(std::initializer_list<std::initializer_list<double>> columns) {
  const auto l = static_cast<Eigen::Index>(columns.size());
  const auto n = static_cast<Eigen::Index>(columns.begin()->size());
  Matrix m(n, l);
  Eigen::Index j = 0;
  for (const auto& c : columns) {
    Eigen::Index i = 0;
    for (double v : c) m(i++, j) = v;
    ++j;
  }
  return m;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Matrix uniform(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testing
