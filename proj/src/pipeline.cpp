#include "tradeeq/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "tradeeq/error.hpp"
#include "tradeeq/io.hpp"

namespace tradeeq {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConvergenceError*>(&e)) return kExitNoConvergence;
  if (dynamic_cast<const InputError*>(&e) || dynamic_cast<const PreconditionError*>(&e) ||
      dynamic_cast<const RankError*>(&e) || dynamic_cast<const ConeError*>(&e) ||
      dynamic_cast<const InfeasibleError*>(&e))
    return kExitInput;
  return kExitFailure;
}

PipelineResult run_pipeline(const CostMatrices& cm, const SolverOptions& opts) {
  PipelineResult r;
  r.solution = solve_fixed_point(cm.C, cm.B, opts);
  r.report = degeneracy_report(r.solution, cm.C, cm.B, opts.tol_clear);
  if ((cm.C.colwise().sum().array() > 0.0).all())
    r.excess_current = excess_demand(cm.C, cm.B, Vector::Ones(cm.C.rows()), opts.exec);
  return r;
}

namespace {

std::size_t label_width(const std::vector<std::string>& labels) {
  std::size_t w = 0;
  for (const auto& s : labels) w = std::max(w, s.size());
  return w;
}

void labelled_block(std::ostringstream& os, const std::vector<std::string>& labels, const Vector& v) {
  const std::size_t w = label_width(labels);
  for (Index i = 0; i < v.size(); ++i) {
    const std::string& s = labels[static_cast<std::size_t>(i)];
    os << "  " << s << std::string(w - s.size() + 2, ' ') << io::format_number(v(i)) << '\n';
  }
}

std::string index_set(const IndexList& idx) {
  std::string out = "{";
  for (std::size_t i = 0; i < idx.size(); ++i) out += (i ? "," : "") + std::to_string(idx[i] + 1);
  return out + "}";
}

}  // namespace

std::string format_balances(const CostMatrices& cm) {
  std::ostringstream os;
  labelled_block(os, cm.countries, cm.balances);
  return os.str();
}

std::string format_report(const CostMatrices& cm, const PipelineResult& r, std::optional<int> year) {
  std::ostringstream os;
  os << "Trade equilibrium report";
  if (year) os << " for " << *year;
  os << "\ncountries: " << cm.num_countries() << ", goods: " << cm.num_goods() << '\n';
  os << "Current prices are the unit baseline p = 1 for every good.\n\n";

  os << "1. Trade balances at current prices\n";
  labelled_block(os, cm.countries, cm.balances);
  os << "   sum of balances: " << io::format_number(cm.balance_residual) << "\n\n";

  os << "2. Excess demand at current prices\n";
  if (r.excess_current)
    labelled_block(os, cm.goods, *r.excess_current);
  else
    os << "  undefined: some country has no demand\n";
  os << '\n';

  os << "3. Equilibrium price vector p0 (" << to_string(r.solution.p0.normalization) << ")\n";
  labelled_block(os, cm.goods, r.solution.p0.p);
  os << '\n';

  os << "4. Excess demand at p0\n";
  labelled_block(os, cm.goods, r.solution.excess);
  os << '\n';

  os << "5. Satisfaction vector y\n";
  labelled_block(os, cm.countries, r.solution.y);
  os << '\n';

  os << "6. Generalized relative price vector p1\n";
  labelled_block(os, cm.goods, r.report.p1);
  os << '\n';

  os << "7. Recession level\n";
  os << "  clearing set I = " << index_set(r.report.clearing_set) << '\n';
  os << "  multiplicity of degeneracy = " << r.report.multiplicity << '\n';
  os << "  R = " << io::format_number(r.report.R) << '\n';
  os << "  R (price weighted) = " << io::format_number(r.report.R_general) << '\n';

  os << "\nsolver: iterations " << r.solution.iterations << ", final epsilon "
     << io::format_number(r.solution.final_epsilon) << ", fixed-point residual "
     << io::format_number(r.solution.residual) << '\n';
  for (const auto& w : cm.warnings) os << "warning: " << w << '\n';
  for (const auto& w : r.solution.warnings) os << "warning: " << w << '\n';
  for (const auto& n : r.report.notes) os << "note: " << n << '\n';
  return os.str();
}

std::string recession_csv_header() { return "year,n,I,multiplicity,R,R_general,iterations,status\n"; }

std::string recession_csv_row(int year, const CostMatrices& cm, const PipelineResult* r,
                              const std::string& status) {
  std::ostringstream os;
  os << year << ',' << cm.num_goods() << ',';
  if (r) {
    std::string set;
    for (std::size_t i = 0; i < r->report.clearing_set.size(); ++i)
      set += (i ? " " : "") + std::to_string(r->report.clearing_set[i] + 1);
    os << '"' << set << "\"," << r->report.multiplicity << ',' << io::format_number(r->report.R) << ','
       << io::format_number(r->report.R_general) << ',' << r->solution.iterations;
  } else {
    os << ",,,,";
  }
  os << ',' << status << '\n';
  return os.str();
}

}  // namespace tradeeq
