#include "tradeeq/recession.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tradeeq/error.hpp"

namespace tradeeq {

namespace {

std::vector<bool> membership(const IndexList& I, Index n) {
  std::vector<bool> in(static_cast<std::size_t>(n), false);
  for (Index k : I) {
    if (k < 0 || k >= n) throw InputError("clearing set index out of range");
    in[static_cast<std::size_t>(k)] = true;
  }
  return in;
}

}  // namespace

Vector real_consumption(const Matrix& C, const Vector& y) {
  if (y.size() != C.cols()) throw InputError("y length does not match the number of agents");
  return C * y;
}

Matrix modified_supply(const Matrix& C, const Matrix& B, const Vector& y, const IndexList& I) {
  if (B.rows() != C.rows() || B.cols() != C.cols()) throw InputError("C and B must have the same shape");
  if (y.size() != C.cols()) throw InputError("y length does not match the number of agents");
  if (I.empty()) throw InputError("clearing set must not be empty");
  const auto in = membership(I, C.rows());
  Matrix b0 = B;
  for (Index k = 0; k < C.rows(); ++k)
    if (!in[static_cast<std::size_t>(k)]) b0.row(k) = C.row(k).cwiseProduct(y.transpose());
  return b0;
}

Vector generalized_price(const Vector& p0, const Vector& psi, const IndexList& I, double off_tol) {
  const Index n = p0.size();
  if (psi.size() != n) throw InputError("psi length does not match the prices");
  if (I.empty()) throw InputError("clearing set must not be empty");
  const auto in = membership(I, n);
  double on = 0.0, off = 0.0;
  for (Index k = 0; k < n; ++k) (in[static_cast<std::size_t>(k)] ? on : off) += std::abs(p0(k));
  if (!(on > 0.0)) throw PreconditionError("prices supported on I", "no mass on the clearing set");
  if (off > off_tol * (on + off)) {
    std::ostringstream os;
    os << "mass " << off / (on + off) << " off the clearing set";
    throw PreconditionError("prices supported on I", os.str());
  }
  double num = 0.0, den = 0.0;
  for (Index k : I) {
    if (!(psi(k) > 0.0)) throw PreconditionError("psi positive on I", "psi_" + std::to_string(k + 1) + " <= 0");
    num += psi(k);
    den += psi(k) * (p0(k) / on);
  }
  const double tau = num / den;
  Vector p1 = Vector::Ones(n);
  for (Index k : I) p1(k) = tau * (p0(k) / on);
  double check = 0.0;
  for (Index k : I) check += psi(k) * p1(k);
  if (std::abs(check - num) > 1e-12 * num) throw Error("clearing-cost identity failed");
  return p1;
}

RecessionLevel recession_level(const Vector& psi, const Vector& psi_bar, const IndexList& I,
                               const Vector& p1) {
  const Index n = psi.size();
  if (psi_bar.size() != n || p1.size() != n) throw InputError("vector lengths differ");
  const auto in = membership(I, n);
  RecessionLevel out;
  if (static_cast<Index>(I.size()) == n) return out;
  Vector gap = psi - psi_bar;
  for (Index k : I) gap(k) = 0.0;
  double num = 0.0, den = 0.0;
  for (Index k = 0; k < n; ++k)
    if (!in[static_cast<std::size_t>(k)]) {
      num += gap(k);
      den += psi(k);
    }
  if (!(den > 0.0)) throw PreconditionError("positive supply off I", "denominator of R is not positive");
  out.R = num / den;
  const double full = psi.dot(p1);
  if (!(full > 0.0)) throw PreconditionError("positive supply cost", "<psi, p1> is not positive");
  out.R_general = gap.dot(p1) / full;
  return out;
}

RecessionReport degeneracy_report(const EquilibriumSolution& sol, const Matrix& C, const Matrix& B,
                                  double tol_clear) {
  const Index n = C.rows();
  RecessionReport rep;
  rep.clearing_set = sol.clearing_set;
  if (rep.clearing_set.empty()) throw PreconditionError("nonempty clearing set", "I is empty");
  rep.multiplicity = n - static_cast<Index>(rep.clearing_set.size());
  rep.psi = B.rowwise().sum();
  rep.psi_bar = real_consumption(C, sol.y);
  const auto in = membership(rep.clearing_set, n);
  for (Index k = 0; k < n; ++k) {
    const double scale = std::max(1.0, rep.psi(k));
    const double gap = rep.psi(k) - rep.psi_bar(k);
    const bool on = in[static_cast<std::size_t>(k)];
    if (on && std::abs(gap) > tol_clear * scale)
      rep.notes.push_back("real consumption differs from supply on clearing good " + std::to_string(k + 1));
    if (!on && !(gap > 0.0))
      rep.notes.push_back("real consumption reaches supply off the clearing set at good " + std::to_string(k + 1));
  }
  rep.B0 = modified_supply(C, B, sol.y, rep.clearing_set);
  rep.p1 = generalized_price(sol.p0.p, rep.psi, rep.clearing_set);
  const RecessionLevel level = recession_level(rep.psi, rep.psi_bar, rep.clearing_set, rep.p1);
  rep.R = level.R;
  rep.R_general = level.R_general;
  const double pp = rep.psi.dot(sol.p0.p);
  rep.walras_residual = std::abs(rep.psi_bar.dot(sol.p0.p) - pp) / pp;

  // Moving p1 off I must leave the modified system's excess demand unchanged.
  const Vector base = excess_demand(C, rep.B0, rep.p1);
  Vector moved = rep.p1;
  for (Index k = 0; k < n; ++k)
    if (!in[static_cast<std::size_t>(k)])
      moved(k) = 1.0 + static_cast<double>(k + 1) / static_cast<double>(n + 1);
  const Vector shifted = excess_demand(C, rep.B0, moved);
  for (Index k = 0; k < n; ++k)
    rep.perturbation_change = std::max(rep.perturbation_change,
                                       std::abs(shifted(k) - base(k)) / std::max(1.0, rep.psi(k)));
  rep.degeneracy_verified = rep.perturbation_change <= 1e-10;
  if (!rep.degeneracy_verified) rep.notes.push_back("off-I prices are not free in the modified system");
  return rep;
}

}  // namespace tradeeq
