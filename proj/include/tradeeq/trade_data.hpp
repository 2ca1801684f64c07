#pragma once

#include <string>
#include <vector>

#include "tradeeq/kernels.hpp"
#include "tradeeq/linalg.hpp"

namespace tradeeq {

/// Bilateral flows in currency units. flow[k][j][s] is the value of good s
/// exported from country k to country j, stored row-major.
struct TradeFlowTensor {
  std::vector<std::string> countries;
  std::vector<std::string> goods;
  std::vector<double> flow;

  TradeFlowTensor() = default;
  TradeFlowTensor(std::vector<std::string> countries, std::vector<std::string> goods);

  Index num_countries() const { return static_cast<Index>(countries.size()); }
  Index num_goods() const { return static_cast<Index>(goods.size()); }

  double& at(Index exporter, Index importer, Index good);
  double at(Index exporter, Index importer, Index good) const;

  /// Throws InputError naming the first offending cell.
  void validate() const;
};

struct CostMatrices {
  std::vector<std::string> countries;
  std::vector<std::string> goods;
  Matrix C;        // goods x countries, imports
  Matrix B;        // goods x countries, exports
  Vector psi;      // row sums of B
  Vector incomes;  // column sums of B
  Vector balances; // incomes minus column sums of C
  double balance_residual = 0.0;  // sum of balances
  std::vector<std::string> warnings;

  Index num_goods() const { return C.rows(); }
  Index num_countries() const { return C.cols(); }
};

/// Builds C and B from one flow tensor. Values are aggregated on a
/// power-of-two grid fine enough that every partial sum is an exact double,
/// so the balances sum to exactly zero.
CostMatrices build_cost_matrices(const TradeFlowTensor& flows, Exec exec = Exec::automatic);

enum class BalanceCheck { strict, warn };

/// Builds C from the import records and B from the export records of two
/// independently reported tensors over the same labels. A nonzero balance
/// sum raises InputError in strict mode and is recorded as a warning
/// otherwise.
CostMatrices build_cost_matrices(const TradeFlowTensor& imports, const TradeFlowTensor& exports,
                                 BalanceCheck check, Exec exec = Exec::automatic);

/// Completes psi, incomes and balances from C and B.
CostMatrices make_cost_matrices(Matrix C, Matrix B, std::vector<std::string> countries = {},
                                std::vector<std::string> goods = {});

struct ShareVector {
  std::vector<std::string> labels;
  Vector shares;
  /// Indices into labels/shares, largest share first, ties by index.
  IndexList descending;
};

struct ShareReport {
  ShareVector country_demand;
  ShareVector country_supply;
  ShareVector goods_demand;
  ShareVector goods_supply;
};

/// Throws InputError when C or B is all zero.
ShareReport shares(const CostMatrices& cm);

}  // namespace tradeeq
