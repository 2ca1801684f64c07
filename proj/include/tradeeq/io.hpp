#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tradeeq/equilibrium.hpp"
#include "tradeeq/recession.hpp"
#include "tradeeq/trade_data.hpp"

namespace tradeeq::io {

inline constexpr int kSchemaVersion = 1;

/// Which side of each row the reporter is on.
enum class ReporterRole { exporter, importer };

struct CsvOptions {
  /// Fixed label orders; labels not listed are reported as unknown. When
  /// empty, labels are taken in order of first appearance.
  std::vector<std::string> countries;
  std::vector<std::string> goods;
  ReporterRole role = ReporterRole::exporter;
  std::optional<int> year;  // keep only this year
};

/// Parses `year,reporter,partner,product,value` rows into one tensor per
/// year. All problems are collected and thrown together as SchemaError.
std::map<int, TradeFlowTensor> read_flows_csv(std::istream& in, const CsvOptions& opts = {});
std::map<int, TradeFlowTensor> read_flows_csv_file(const std::string& path,
                                                   const CsvOptions& opts = {});

/// One label per non-empty line.
std::vector<std::string> read_label_file(const std::string& path);

/// Shortest round-trip decimal form.
std::string format_number(double v);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);
nlohmann::json indices_to_json(const IndexList& idx);  // 1-based

nlohmann::json to_json(const CostMatrices& cm, std::optional<int> year = std::nullopt);
CostMatrices cost_matrices_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EquilibriumSolution& sol);
nlohmann::json to_json(const RecessionReport& rep);
nlohmann::json to_json(const ShareReport& rep);

/// `label,share` rows in descending order.
void write_share_csv(std::ostream& out, const ShareVector& v);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace tradeeq::io
