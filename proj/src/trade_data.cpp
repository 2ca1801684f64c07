#include "tradeeq/trade_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "tradeeq/error.hpp"

namespace tradeeq {

TradeFlowTensor::TradeFlowTensor(std::vector<std::string> c, std::vector<std::string> g)
    : countries(std::move(c)), goods(std::move(g)) {
  flow.assign(countries.size() * countries.size() * goods.size(), 0.0);
}

double& TradeFlowTensor::at(Index exporter, Index importer, Index good) {
  const auto m = countries.size(), n = goods.size();
  return flow[(static_cast<std::size_t>(exporter) * m + static_cast<std::size_t>(importer)) * n +
              static_cast<std::size_t>(good)];
}

double TradeFlowTensor::at(Index exporter, Index importer, Index good) const {
  const auto m = countries.size(), n = goods.size();
  return flow[(static_cast<std::size_t>(exporter) * m + static_cast<std::size_t>(importer)) * n +
              static_cast<std::size_t>(good)];
}

namespace {

std::string cell_name(const TradeFlowTensor& t, Index k, Index j, Index s) {
  std::ostringstream os;
  os << "flow[" << t.countries[static_cast<std::size_t>(k)] << "]["
     << t.countries[static_cast<std::size_t>(j)] << "][" << t.goods[static_cast<std::size_t>(s)]
     << "]";
  return os.str();
}

}  // namespace

void TradeFlowTensor::validate() const {
  const Index m = num_countries(), n = num_goods();
  if (m < 2) throw InputError("at least two countries are required", "countries");
  if (n < 1) throw InputError("at least one good is required", "goods");
  if (flow.size() != static_cast<std::size_t>(m * m * n))
    throw InputError("flow array size does not match M*M*n", "flow");
  for (Index k = 0; k < m; ++k)
    for (Index j = 0; j < m; ++j)
      for (Index s = 0; s < n; ++s) {
        const double v = at(k, j, s);
        if (!std::isfinite(v)) throw InputError("non-finite flow value", cell_name(*this, k, j, s));
        if (v < 0.0) throw InputError("negative flow value", cell_name(*this, k, j, s));
        if (k == j && v != 0.0) throw InputError("self-trade flow", cell_name(*this, k, j, s));
      }
}

namespace {

double total_flow(const TradeFlowTensor& t) {
  double total = 0.0;
  for (double v : t.flow) total += v;
  return total;
}

// Grid exponent e such that total * 2^e < 2^50: every tick sum then stays
// below 2^52 and converts to double exactly.
int grid_exponent(double total) {
  if (!(total > 0.0)) return 0;
  return 49 - std::ilogb(total);
}

std::vector<std::int64_t> to_ticks(const TradeFlowTensor& t, int e) {
  std::vector<std::int64_t> out(t.flow.size());
  for (std::size_t i = 0; i < t.flow.size(); ++i) out[i] = std::llround(std::ldexp(t.flow[i], e));
  return out;
}

Matrix ticks_to_matrix(const std::vector<std::int64_t>& ticks, Index rows, Index cols, int e) {
  Matrix out(rows, cols);
  for (Index s = 0; s < rows; ++s)
    for (Index k = 0; k < cols; ++k)
      out(s, k) = std::ldexp(static_cast<double>(ticks[static_cast<std::size_t>(s * cols + k)]), -e);
  return out;
}

// psi, incomes and balances summed in ticks, hence exact.
void fill_totals(CostMatrices& cm, const std::vector<std::int64_t>& c_ticks,
                 const std::vector<std::int64_t>& b_ticks, int e) {
  const Index n = cm.C.rows(), m = cm.C.cols();
  cm.psi.resize(n);
  cm.incomes.resize(m);
  cm.balances.resize(m);
  for (Index s = 0; s < n; ++s) {
    std::int64_t acc = 0;
    for (Index k = 0; k < m; ++k) acc += b_ticks[static_cast<std::size_t>(s * m + k)];
    cm.psi(s) = std::ldexp(static_cast<double>(acc), -e);
  }
  std::int64_t residual = 0;
  for (Index k = 0; k < m; ++k) {
    std::int64_t in = 0, out = 0;
    for (Index s = 0; s < n; ++s) {
      in += c_ticks[static_cast<std::size_t>(s * m + k)];
      out += b_ticks[static_cast<std::size_t>(s * m + k)];
    }
    cm.incomes(k) = std::ldexp(static_cast<double>(out), -e);
    cm.balances(k) = std::ldexp(static_cast<double>(out - in), -e);
    residual += out - in;
  }
  cm.balance_residual = std::ldexp(static_cast<double>(residual), -e);
}

}  // namespace

CostMatrices build_cost_matrices(const TradeFlowTensor& flows, Exec exec) {
  flows.validate();
  const Index m = flows.num_countries(), n = flows.num_goods();
  const int e = grid_exponent(total_flow(flows));
  const auto ticks = to_ticks(flows, e);
  std::vector<std::int64_t> c_ticks, b_ticks;
  kernels::accumulate_flows(ticks, m, n, c_ticks, b_ticks, exec);

  CostMatrices cm;
  cm.countries = flows.countries;
  cm.goods = flows.goods;
  cm.C = ticks_to_matrix(c_ticks, n, m, e);
  cm.B = ticks_to_matrix(b_ticks, n, m, e);
  fill_totals(cm, c_ticks, b_ticks, e);
  return cm;
}

CostMatrices build_cost_matrices(const TradeFlowTensor& imports, const TradeFlowTensor& exports,
                                 BalanceCheck check, Exec exec) {
  imports.validate();
  exports.validate();
  if (imports.countries != exports.countries || imports.goods != exports.goods)
    throw InputError("import and export tensors use different labels");
  const Index m = imports.num_countries(), n = imports.num_goods();
  const int e = grid_exponent(std::max(total_flow(imports), total_flow(exports)));

  std::vector<std::int64_t> c_ticks, b_ticks, unused;
  kernels::accumulate_flows(to_ticks(imports, e), m, n, c_ticks, unused, exec);
  kernels::accumulate_flows(to_ticks(exports, e), m, n, unused, b_ticks, exec);

  CostMatrices cm;
  cm.countries = imports.countries;
  cm.goods = imports.goods;
  cm.C = ticks_to_matrix(c_ticks, n, m, e);
  cm.B = ticks_to_matrix(b_ticks, n, m, e);
  fill_totals(cm, c_ticks, b_ticks, e);
  if (cm.balance_residual != 0.0) {
    std::ostringstream os;
    os.precision(17);
    os << "balances do not sum to zero (residual " << cm.balance_residual << ")";
    if (check == BalanceCheck::strict) throw InputError(os.str(), "balances");
    cm.warnings.push_back(os.str());
  }
  return cm;
}

CostMatrices make_cost_matrices(Matrix C, Matrix B, std::vector<std::string> countries,
                                std::vector<std::string> goods) {
  if (C.rows() != B.rows() || C.cols() != B.cols())
    throw InputError("C and B must have the same shape");
  const Index n = C.rows(), m = C.cols();
  if (countries.empty())
    for (Index k = 0; k < m; ++k) countries.push_back("c" + std::to_string(k + 1));
  if (goods.empty())
    for (Index s = 0; s < n; ++s) goods.push_back("g" + std::to_string(s + 1));
  if (static_cast<Index>(countries.size()) != m || static_cast<Index>(goods.size()) != n)
    throw InputError("label count does not match matrix shape");
  CostMatrices cm;
  cm.countries = std::move(countries);
  cm.goods = std::move(goods);
  cm.C = std::move(C);
  cm.B = std::move(B);
  cm.psi = cm.B.rowwise().sum();
  cm.incomes = cm.B.colwise().sum().transpose();
  cm.balances = cm.incomes - cm.C.colwise().sum().transpose();
  cm.balance_residual = cm.balances.sum();
  return cm;
}

namespace {

ShareVector make_shares(const std::vector<std::string>& labels, const Vector& totals) {
  ShareVector out;
  out.labels = labels;
  double sum = 0.0;
  for (Index i = 0; i < totals.size(); ++i) sum += totals(i);
  out.shares = totals / sum;
  out.descending.resize(static_cast<std::size_t>(totals.size()));
  for (Index i = 0; i < totals.size(); ++i) out.descending[static_cast<std::size_t>(i)] = i;
  std::stable_sort(out.descending.begin(), out.descending.end(),
                   [&](Index a, Index b) { return out.shares(a) > out.shares(b); });
  return out;
}

}  // namespace

ShareReport shares(const CostMatrices& cm) {
  if (!(cm.C.sum() > 0.0)) throw InputError("demand matrix C is all zero", "C");
  if (!(cm.B.sum() > 0.0)) throw InputError("supply matrix B is all zero", "B");
  ShareReport r;
  r.country_demand = make_shares(cm.countries, cm.C.colwise().sum().transpose());
  r.country_supply = make_shares(cm.countries, cm.B.colwise().sum().transpose());
  r.goods_demand = make_shares(cm.goods, cm.C.rowwise().sum());
  r.goods_supply = make_shares(cm.goods, cm.B.rowwise().sum());
  return r;
}

}  // namespace tradeeq
