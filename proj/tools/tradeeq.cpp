// tradeeq: ingest trade flows, solve for equilibrium prices, report recession levels.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tradeeq/error.hpp"
#include "tradeeq/io.hpp"
#include "tradeeq/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tradeeq;

namespace {

struct IngestArgs {
  std::string input;
  std::string imports;
  std::string balance_mode = "warn";
  std::string countries;
  std::string goods;
};

struct RunConfig {
  std::string input;
  std::string out = ".";
  double eps_start = 1e-2;
  double eps_ratio = 0.25;
  int eps_steps = 13;
  double damping = 0.5;
  double tol = 1e-6;
  double tol_clear = 1e-6;
  double tol_inner = 1e-12;
  std::optional<int> year;
  std::string normalization = "simplex";

  SolverOptions solver() const {
    SolverOptions o;
    o.schedule = {eps_start, eps_ratio, eps_steps};
    o.damping = damping;
    o.tol = tol;
    o.tol_clear = tol_clear;
    o.tol_inner = tol_inner;
    o.normalization = parse_normalization(normalization);
    o.validate();
    return o;
  }
};

void add_solver_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--eps-start", cfg.eps_start, "first regularization epsilon")->capture_default_str();
  cmd->add_option("--eps-ratio", cfg.eps_ratio, "epsilon reduction factor in (0,1)")->capture_default_str();
  cmd->add_option("--eps-steps", cfg.eps_steps, "number of epsilon stages")->capture_default_str();
  cmd->add_option("--damping", cfg.damping, "damping theta in (0,1]")->capture_default_str();
  cmd->add_option("--tol", cfg.tol, "excess demand tolerance")->capture_default_str();
  cmd->add_option("--tol-clear", cfg.tol_clear, "market clearing tolerance")->capture_default_str();
  cmd->add_option("--tol-inner", cfg.tol_inner, "fixed-point step tolerance")->capture_default_str();
  cmd->add_option("--normalization", cfg.normalization, "simplex, clearing-cost or raw")
      ->check(CLI::IsMember({"simplex", "clearing-cost", "raw"}))
      ->capture_default_str();
}

io::CsvOptions csv_options(const IngestArgs& a, std::optional<int> year) {
  io::CsvOptions o;
  if (!a.countries.empty()) o.countries = io::read_label_file(a.countries);
  if (!a.goods.empty()) o.goods = io::read_label_file(a.goods);
  o.year = year;
  return o;
}

std::map<int, CostMatrices> ingest(const IngestArgs& a, std::optional<int> year) {
  io::CsvOptions opts = csv_options(a, year);
  const auto exports = io::read_flows_csv_file(a.input, opts);
  if (exports.empty()) throw InputError("no rows for the requested year", a.input);
  std::map<int, CostMatrices> out;
  if (a.imports.empty()) {
    for (const auto& [y, t] : exports) out.emplace(y, build_cost_matrices(t));
    return out;
  }
  // Both files must share label orders, so pin them to the export file's.
  opts.countries = exports.begin()->second.countries;
  opts.goods = exports.begin()->second.goods;
  opts.role = io::ReporterRole::importer;
  const auto imports = io::read_flows_csv_file(a.imports, opts);
  const BalanceCheck check = a.balance_mode == "strict" ? BalanceCheck::strict : BalanceCheck::warn;
  for (const auto& [y, t] : exports) {
    auto it = imports.find(y);
    if (it == imports.end()) throw InputError("year " + std::to_string(y) + " missing from imports", a.imports);
    TradeFlowTensor ex = t;
    if (ex.countries != opts.countries || ex.goods != opts.goods) {
      // Later years may list labels in a different order; reread with the pinned order.
      io::CsvOptions pinned = opts;
      pinned.role = io::ReporterRole::exporter;
      pinned.year = y;
      ex = io::read_flows_csv_file(a.input, pinned).at(y);
    }
    out.emplace(y, build_cost_matrices(it->second, ex, check));
  }
  return out;
}

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

int cmd_ingest(const IngestArgs& a, const RunConfig& cfg) {
  const auto years = ingest(a, cfg.year);
  ensure_dir(cfg.out);
  for (const auto& [y, cm] : years) {
    io::write_json_file(path_in(cfg.out, "matrices_" + std::to_string(y) + ".json"), io::to_json(cm, y));
    std::cout << "Trade balances at current prices, " << y << '\n' << format_balances(cm);
    for (const auto& w : cm.warnings) std::cout << "warning: " << w << '\n';
  }
  return kExitOk;
}

std::optional<int> stored_year(const nlohmann::json& j) {
  if (j.contains("year") && j.at("year").is_number_integer()) return j.at("year").get<int>();
  return std::nullopt;
}

int cmd_solve(const RunConfig& cfg) {
  const SolverOptions opts = cfg.solver();
  const nlohmann::json doc = io::read_json_file(cfg.input);
  const CostMatrices cm = io::cost_matrices_from_json(doc);
  const PipelineResult r = run_pipeline(cm, opts);
  ensure_dir(cfg.out);
  io::write_json_file(path_in(cfg.out, "solution.json"), io::to_json(r.solution));
  io::write_json_file(path_in(cfg.out, "report.json"), io::to_json(r.report));
  const std::string text = format_report(cm, r, stored_year(doc));
  io::write_text_file(path_in(cfg.out, "report.txt"), text);
  std::cout << text;
  return kExitOk;
}

int cmd_shares(const RunConfig& cfg) {
  const CostMatrices cm = io::cost_matrices_from_json(io::read_json_file(cfg.input));
  const ShareReport rep = shares(cm);
  ensure_dir(cfg.out);
  const std::pair<const char*, const ShareVector*> files[] = {
      {"country_demand.csv", &rep.country_demand},
      {"country_supply.csv", &rep.country_supply},
      {"goods_demand.csv", &rep.goods_demand},
      {"goods_supply.csv", &rep.goods_supply},
  };
  for (const auto& [name, v] : files) {
    std::ostringstream os;
    io::write_share_csv(os, *v);
    io::write_text_file(path_in(cfg.out, name), os.str());
  }
  io::write_json_file(path_in(cfg.out, "shares.json"), io::to_json(rep));
  return kExitOk;
}

int cmd_report(const IngestArgs& a, const RunConfig& cfg) {
  const SolverOptions opts = cfg.solver();
  const auto years = ingest(a, cfg.year);
  std::vector<std::pair<int, const CostMatrices*>> todo;
  for (const auto& [y, cm] : years) todo.emplace_back(y, &cm);

  std::vector<std::optional<PipelineResult>> results(todo.size());
  std::vector<std::string> status(todo.size(), "ok");
  std::vector<int> codes(todo.size(), kExitOk);
  SolverOptions inner = opts;
  inner.exec = Exec::serial;

#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(todo.size()); ++i) {
    try {
      results[i] = run_pipeline(*todo[i].second, inner);
    } catch (const std::exception& e) {
      status[i] = e.what();
      codes[i] = exit_code_for(e);
    }
  }

  ensure_dir(cfg.out);
  std::string csv = recession_csv_header();
  int code = kExitOk;
  for (std::size_t i = 0; i < todo.size(); ++i) {
    const auto& [y, cm] = todo[i];
    const std::string dir = path_in(cfg.out, std::to_string(y));
    ensure_dir(dir);
    io::write_json_file(path_in(dir, "matrices.json"), io::to_json(*cm, y));
    if (results[i]) {
      io::write_json_file(path_in(dir, "solution.json"), io::to_json(results[i]->solution));
      io::write_json_file(path_in(dir, "report.json"), io::to_json(results[i]->report));
      io::write_text_file(path_in(dir, "report.txt"), format_report(*cm, *results[i], y));
    } else {
      std::cerr << "year " << y << ": " << status[i] << '\n';
      code = std::max(code, codes[i]);
    }
    std::string s = status[i];
    for (char& c : s)
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    csv += recession_csv_row(y, *cm, results[i] ? &*results[i] : nullptr, s);
  }
  io::write_text_file(path_in(cfg.out, "recession.csv"), csv);
  std::cout << csv;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trade equilibrium prices and recession levels from bilateral trade flows"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  RunConfig cfg;

  auto add_ingest_flags = [&](CLI::App* cmd) {
    cmd->add_option("--input", ingest_args.input, "flows CSV (year,reporter,partner,product,value)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--imports", ingest_args.imports, "optional CSV of importer-reported flows for C")
        ->check(CLI::ExistingFile);
    cmd->add_option("--balance-mode", ingest_args.balance_mode, "strict or warn when the balances do not sum to 0")
        ->check(CLI::IsMember({"strict", "warn"}))
        ->capture_default_str();
    cmd->add_option("--countries", ingest_args.countries, "file listing country labels in order")
        ->check(CLI::ExistingFile);
    cmd->add_option("--goods", ingest_args.goods, "file listing good labels in order")->check(CLI::ExistingFile);
    cmd->add_option("--out", cfg.out, "output directory")->capture_default_str();
    cmd->add_option("--year", cfg.year, "process only this year");
  };

  CLI::App* ingest_cmd = app.add_subcommand("ingest", "build cost matrices from a flows CSV");
  add_ingest_flags(ingest_cmd);

  CLI::App* solve_cmd = app.add_subcommand("solve", "solve one matrices file and write the report");
  solve_cmd->add_option("--input", cfg.input, "matrices JSON from ingest")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--out", cfg.out, "output directory")->capture_default_str();
  add_solver_flags(solve_cmd, cfg);

  CLI::App* shares_cmd = app.add_subcommand("shares", "demand and supply shares of countries and goods");
  shares_cmd->add_option("--input", cfg.input, "matrices JSON from ingest")->required()->check(CLI::ExistingFile);
  shares_cmd->add_option("--out", cfg.out, "output directory")->capture_default_str();

  CLI::App* report_cmd = app.add_subcommand("report", "ingest, solve and report every year of a flows CSV");
  add_ingest_flags(report_cmd);
  add_solver_flags(report_cmd, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(ingest_args, cfg);
    if (*solve_cmd) return cmd_solve(cfg);
    if (*shares_cmd) return cmd_shares(cfg);
    if (*report_cmd) return cmd_report(ingest_args, cfg);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitUsage;
}
