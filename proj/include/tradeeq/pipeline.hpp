#pragma once

#include <exception>
#include <optional>
#include <string>

#include "tradeeq/equilibrium.hpp"
#include "tradeeq/recession.hpp"
#include "tradeeq/trade_data.hpp"

namespace tradeeq {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInput = 2,
  kExitNoConvergence = 3,
  kExitFailure = 4,
};

/// Maps a library exception to the CLI exit code.
int exit_code_for(const std::exception& e);

struct PipelineResult {
  EquilibriumSolution solution;
  RecessionReport report;
  /// Excess demand at p = 1 for every good; absent when some agent has no demand.
  std::optional<Vector> excess_current;
};

PipelineResult run_pipeline(const CostMatrices& cm, const SolverOptions& opts);

/// Balance block: one `label value` line per country.
std::string format_balances(const CostMatrices& cm);

/// Plain-text report with the seven numbered blocks.
std::string format_report(const CostMatrices& cm, const PipelineResult& r,
                          std::optional<int> year = std::nullopt);

/// `year,n,I,multiplicity,R,R_general,iterations,status` header row.
std::string recession_csv_header();
std::string recession_csv_row(int year, const CostMatrices& cm, const PipelineResult* r,
                              const std::string& status);

}  // namespace tradeeq
