#include "tradeeq/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "tradeeq/error.hpp"

namespace tradeeq::io {

using nlohmann::json;

namespace {

bool split_csv_line(const std::string& line, std::vector<std::string>& fields) {
  fields.clear();
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return !quoted;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && first != last;
}

bool parse_int(const std::string& s, int& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty();
}

// Label -> index, growing in order of first appearance unless fixed.
struct LabelIndex {
  std::vector<std::string> labels;
  std::unordered_map<std::string, Index> index;
  bool fixed = false;

  explicit LabelIndex(const std::vector<std::string>& init) : labels(init), fixed(!init.empty()) {
    for (std::size_t i = 0; i < labels.size(); ++i) index.emplace(labels[i], static_cast<Index>(i));
  }
  Index lookup(const std::string& s) {
    const auto it = index.find(s);
    if (it != index.end()) return it->second;
    if (fixed) return -1;
    labels.push_back(s);
    return index.emplace(s, static_cast<Index>(labels.size() - 1)).first->second;
  }
};

struct Row {
  int line;
  int year;
  Index exporter, importer, good;
  double value;
};

}  // namespace

std::map<int, TradeFlowTensor> read_flows_csv(std::istream& in, const CsvOptions& opts) {
  std::vector<std::string> problems;
  std::string line;
  std::vector<std::string> fields;
  int line_no = 0;

  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    split_csv_line(line, fields);
    for (auto& f : fields) f = trim(f);
    const std::vector<std::string> expected{"year", "reporter", "partner", "product", "value"};
    if (fields != expected)
      throw SchemaError({"row " + std::to_string(line_no) +
                         ": header must be year,reporter,partner,product,value"});
    have_header = true;
    break;
  }
  if (!have_header) throw SchemaError({"empty input: missing header row"});

  LabelIndex countries(opts.countries), goods(opts.goods);
  std::vector<Row> rows;
  std::map<std::tuple<int, Index, Index, Index>, int> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::string where = "row " + std::to_string(line_no) + ": ";
    if (!split_csv_line(line, fields)) {
      problems.push_back(where + "unterminated quote");
      continue;
    }
    if (fields.size() != 5) {
      problems.push_back(where + "expected 5 fields, found " + std::to_string(fields.size()));
      continue;
    }
    for (auto& f : fields) f = trim(f);
    Row r{line_no, 0, -1, -1, -1, 0.0};
    if (!parse_int(fields[0], r.year)) {
      problems.push_back(where + "invalid year '" + fields[0] + "'");
      continue;
    }
    if (opts.year && r.year != *opts.year) continue;
    const Index reporter = countries.lookup(fields[1]);
    const Index partner = countries.lookup(fields[2]);
    r.good = goods.lookup(fields[3]);
    bool ok = true;
    if (reporter < 0) problems.push_back(where + "unknown country '" + fields[1] + "'"), ok = false;
    if (partner < 0) problems.push_back(where + "unknown country '" + fields[2] + "'"), ok = false;
    if (r.good < 0) problems.push_back(where + "unknown product '" + fields[3] + "'"), ok = false;
    if (!parse_double(fields[4], r.value)) {
      problems.push_back(where + "invalid value '" + fields[4] + "'");
      ok = false;
    } else if (!std::isfinite(r.value)) {
      problems.push_back(where + "non-finite value");
      ok = false;
    } else if (r.value < 0.0) {
      problems.push_back(where + "negative value");
      ok = false;
    }
    if (!ok) continue;
    if (reporter == partner) {
      problems.push_back(where + "self-trade for country '" + fields[1] + "'");
      continue;
    }
    r.exporter = opts.role == ReporterRole::exporter ? reporter : partner;
    r.importer = opts.role == ReporterRole::exporter ? partner : reporter;
    const auto key = std::make_tuple(r.year, r.exporter, r.importer, r.good);
    const auto [it, inserted] = seen.emplace(key, line_no);
    if (!inserted) {
      problems.push_back(where + "duplicate of row " + std::to_string(it->second));
      continue;
    }
    rows.push_back(r);
  }
  if (!problems.empty()) throw SchemaError(problems);
  if (rows.empty()) throw SchemaError({"no data rows"});

  std::map<int, TradeFlowTensor> out;
  for (const Row& r : rows) {
    auto it = out.find(r.year);
    if (it == out.end()) it = out.emplace(r.year, TradeFlowTensor(countries.labels, goods.labels)).first;
    it->second.at(r.exporter, r.importer, r.good) = r.value;
  }
  return out;
}

std::map<int, TradeFlowTensor> read_flows_csv_file(const std::string& path, const CsvOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'", path);
  return read_flows_csv(in, opts);
}

std::vector<std::string> read_label_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'", path);
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    line = trim(line);
    if (line.empty()) continue;
    if (!seen.insert(line).second) throw InputError("duplicate label '" + line + "'", path);
    out.push_back(line);
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json matrix_to_json(const Matrix& m) {
  json data = json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
  const Index rows = j.at("rows").get<Index>(), cols = j.at("cols").get<Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols))
    throw InputError("matrix data does not match its shape");
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)].get<double>();
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

json indices_to_json(const IndexList& idx) {
  json out = json::array();
  for (Index i : idx) out.push_back(i + 1);
  return out;
}

json to_json(const CostMatrices& cm, std::optional<int> year) {
  json j{{"schema_version", kSchemaVersion},
         {"kind", "cost_matrices"},
         {"countries", cm.countries},
         {"goods", cm.goods},
         {"C", matrix_to_json(cm.C)},
         {"B", matrix_to_json(cm.B)},
         {"psi", vector_to_json(cm.psi)},
         {"incomes", vector_to_json(cm.incomes)},
         {"balances", vector_to_json(cm.balances)},
         {"balance_residual", cm.balance_residual},
         {"warnings", cm.warnings}};
  if (year) j["year"] = *year;
  return j;
}

CostMatrices cost_matrices_from_json(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion)
      throw InputError("unsupported schema_version", "schema_version");
    if (j.at("kind").get<std::string>() != "cost_matrices")
      throw InputError("not a cost matrices document", "kind");
    CostMatrices cm = make_cost_matrices(matrix_from_json(j.at("C")), matrix_from_json(j.at("B")),
                                         j.at("countries").get<std::vector<std::string>>(),
                                         j.at("goods").get<std::vector<std::string>>());
    if (!cm.C.allFinite() || !cm.B.allFinite() || cm.C.minCoeff() < 0.0 || cm.B.minCoeff() < 0.0)
      throw InputError("matrices must be finite and nonnegative");
    if (j.contains("balances")) {
      // Keep the exact stored balances (they may come from tick sums).
      cm.balances = vector_from_json(j.at("balances"));
      cm.psi = vector_from_json(j.at("psi"));
      cm.incomes = vector_from_json(j.at("incomes"));
      cm.balance_residual = j.value("balance_residual", cm.balances.sum());
    }
    if (j.contains("warnings")) cm.warnings = j.at("warnings").get<std::vector<std::string>>();
    return cm;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed matrices document: ") + e.what());
  }
}

json to_json(const EquilibriumSolution& sol) {
  return json{{"schema_version", kSchemaVersion},
              {"kind", "equilibrium_solution"},
              {"p0", vector_to_json(sol.p0.p)},
              {"normalization", to_string(sol.p0.normalization)},
              {"I", indices_to_json(sol.clearing_set)},
              {"y", vector_to_json(sol.y)},
              {"excess", vector_to_json(sol.excess)},
              {"residual", sol.residual},
              {"iterations", sol.iterations},
              {"epsilon", sol.final_epsilon},
              {"walras_residual", sol.walras_residual},
              {"warnings", sol.warnings}};
}

json to_json(const RecessionReport& rep) {
  return json{{"schema_version", kSchemaVersion},
              {"kind", "recession_report"},
              {"I", indices_to_json(rep.clearing_set)},
              {"multiplicity", rep.multiplicity},
              {"psi", vector_to_json(rep.psi)},
              {"psi_bar", vector_to_json(rep.psi_bar)},
              {"B0", matrix_to_json(rep.B0)},
              {"p1", vector_to_json(rep.p1)},
              {"R", rep.R},
              {"R_general", rep.R_general},
              {"walras_residual", rep.walras_residual},
              {"perturbation_change", rep.perturbation_change},
              {"degeneracy_verified", rep.degeneracy_verified},
              {"notes", rep.notes}};
}

namespace {

json share_json(const ShareVector& v) {
  json rows = json::array();
  for (Index i : v.descending)
    rows.push_back(json{{"label", v.labels[static_cast<std::size_t>(i)]}, {"share", v.shares(i)}});
  return rows;
}

}  // namespace

json to_json(const ShareReport& rep) {
  return json{{"schema_version", kSchemaVersion},
              {"kind", "share_report"},
              {"country_demand", share_json(rep.country_demand)},
              {"country_supply", share_json(rep.country_supply)},
              {"goods_demand", share_json(rep.goods_demand)},
              {"goods_supply", share_json(rep.goods_supply)}};
}

void write_share_csv(std::ostream& out, const ShareVector& v) {
  out << "label,share\n";
  for (Index i : v.descending) {
    const std::string& label = v.labels[static_cast<std::size_t>(i)];
    if (label.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : label) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      out << q << '"';
    } else {
      out << label;
    }
    out << ',' << format_number(v.shares(i)) << '\n';
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'", path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid JSON: ") + e.what(), path);
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path + "'");
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace tradeeq::io
