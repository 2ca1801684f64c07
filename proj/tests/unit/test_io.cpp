#include <doctest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "tradeeq/error.hpp"
#include "tradeeq/io.hpp"
#include "tradeeq/pipeline.hpp"

using namespace tradeeq;
using testing::cols;
using testing::vec;

namespace {

std::vector<std::string> schema_problems(const std::string& text, const io::CsvOptions& opts = {}) {
  std::istringstream in(text);
  try {
    io::read_flows_csv(in, opts);
  } catch (const SchemaError& e) {
    return e.problems();
  }
  return {};
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("two-country CSV matches direct construction") {
    std::istringstream in("year,reporter,partner,product,value\n2019,A,B,g,3\n2019,B,A,g,5\n");
    const auto years = io::read_flows_csv(in);
    REQUIRE(years.size() == 1);
    const TradeFlowTensor& t = years.at(2019);
    TradeFlowTensor ref({"A", "B"}, {"g"});
    ref.at(0, 1, 0) = 3;
    ref.at(1, 0, 0) = 5;
    CHECK(t.flow == ref.flow);
    const CostMatrices a = build_cost_matrices(t), b = build_cost_matrices(ref);
    CHECK(a.C == b.C);
    CHECK(a.B == b.B);
  }

  TEST_CASE("importer role swaps the sides") {
    io::CsvOptions o;
    o.role = io::ReporterRole::importer;
    std::istringstream in("year,reporter,partner,product,value\n2019,A,B,g,3\n");
    const auto t = io::read_flows_csv(in, o).at(2019);
    CHECK(t.at(1, 0, 0) == 3);
  }

  TEST_CASE("schema errors carry row numbers") {
    CHECK(schema_problems("") == std::vector<std::string>{"empty input: missing header row"});
    CHECK(schema_problems("year,reporter,partner,product,value\n") == std::vector<std::string>{"no data rows"});
    CHECK(schema_problems("a,b,c\n1,2,3\n").front().rfind("row 1:", 0) == 0);
    const auto p = schema_problems(
        "year,reporter,partner,product,value\n"
        "2019,A,B,g,3\n"
        "2019,A,B,g,4\n"
        "x,A,B,g,1\n"
        "2019,A,A,g,1\n"
        "2019,A,B,g,-1\n"
        "2019,A,B\n"
        "2019,A,B,h,nan\n");
    REQUIRE(p.size() == 6);
    CHECK(p[0] == "row 3: duplicate of row 2");
    CHECK(p[1].rfind("row 4: invalid year", 0) == 0);
    CHECK(p[2].rfind("row 5: self-trade", 0) == 0);
    CHECK(p[3] == "row 6: negative value");
    CHECK(p[4] == "row 7: expected 5 fields, found 3");
    CHECK(p[5].rfind("row 8:", 0) == 0);
    io::CsvOptions fixed;
    fixed.countries = {"A", "B"};
    fixed.goods = {"g"};
    const auto q = schema_problems("year,reporter,partner,product,value\n2019,A,Z,g,1\n2019,A,B,q,1\n", fixed);
    REQUIRE(q.size() == 2);
    CHECK(q[0] == "row 2: unknown country 'Z'");
    CHECK(q[1] == "row 3: unknown product 'q'");
  }

  TEST_CASE("quotes, BOM, CRLF and year filter") {
    std::istringstream in(
        "\xEF\xBB\xBFyear,reporter,partner,product,value\r\n"
        "2018,\"Korea, Rep.\",B,g,1\r\n"
        "2019,\"Korea, Rep.\",B,g,2\r\n");
    io::CsvOptions o;
    o.year = 2019;
    const auto years = io::read_flows_csv(in, o);
    REQUIRE(years.size() == 1);
    CHECK(years.at(2019).countries.front() == "Korea, Rep.");
    CHECK(years.at(2019).at(0, 1, 0) == 2);
  }

  TEST_CASE("synthetic 19 x 16 CSV round trip") {
    std::mt19937_64 rng(89);
    std::uniform_int_distribution<int> cents(0, 10000000);
    std::ostringstream csv;
    csv << "year,reporter,partner,product,value\n";
    TradeFlowTensor ref(std::vector<std::string>(19), std::vector<std::string>(16));
    for (int k = 0; k < 19; ++k) ref.countries[k] = "C" + std::to_string(k);
    for (int s = 0; s < 16; ++s) ref.goods[s] = "G" + std::to_string(s);
    for (Index k = 0; k < 19; ++k)
      for (Index j = 0; j < 19; ++j)
        for (Index s = 0; s < 16; ++s)
          if (k != j) {
            const double v = cents(rng) / 100.0;
            ref.at(k, j, s) = v;
            csv << 2020 << ',' << ref.countries[k] << ',' << ref.countries[j] << ',' << ref.goods[s] << ','
                << io::format_number(v) << '\n';
          }
    std::istringstream in(csv.str());
    const auto t = io::read_flows_csv(in).at(2020);
    CHECK(t.flow == ref.flow);
    const CostMatrices cm = build_cost_matrices(t);
    CHECK(cm.C.rows() == 16);
    CHECK(cm.C.cols() == 19);
    CHECK(cm.balances.sum() == 0.0);
  }

  TEST_CASE("number formatting is shortest round-trip") {
    CHECK(io::format_number(0.1) == "0.1");
    CHECK(io::format_number(0.5) == "0.5");
    CHECK(io::format_number(2.0) == "2");
    CHECK(std::stod(io::format_number(1.0 / 3)) == 1.0 / 3);
  }

  TEST_CASE("matrices JSON round trip") {
    const CostMatrices cm = make_cost_matrices(cols({{1, 2}, {3, 4.5}}), cols({{0.25, 1}, {2, 3}}), {"a", "b"}, {"x", "y"});
    const auto j = io::to_json(cm, 2017);
    CHECK(j.at("schema_version") == io::kSchemaVersion);
    CHECK(j.at("year") == 2017);
    const CostMatrices back = io::cost_matrices_from_json(j);
    CHECK(back.C == cm.C);
    CHECK(back.B == cm.B);
    CHECK(back.countries == cm.countries);
    CHECK(back.balances == cm.balances);
    auto bad = j;
    bad["schema_version"] = 99;
    CHECK_THROWS_AS(io::cost_matrices_from_json(bad), InputError);
    bad = j;
    bad.erase("C");
    CHECK_THROWS_AS(io::cost_matrices_from_json(bad), InputError);
  }

  TEST_CASE("solution JSON uses one-based clearing indices") {
    const Matrix C = cols({{1, 1}}), B = cols({{2, 1}});
    const auto sol = solve_fixed_point(C, B);
    const auto j = io::to_json(sol);
    CHECK(j.at("I") == nlohmann::json::array({2}));
    CHECK(j.at("normalization") == "simplex");
    const auto r = io::to_json(degeneracy_report(sol, C, B));
    CHECK(r.at("R") == 0.5);
    CHECK(r.at("multiplicity") == 1);
  }

  TEST_CASE("share CSV") {
    const ShareReport s = shares(make_cost_matrices(cols({{1, 0}, {2, 1}}), cols({{1, 1}, {1, 1}}), {"a", "b"}));
    std::ostringstream os;
    io::write_share_csv(os, s.country_demand);
    CHECK(os.str() == "label,share\nb,0.75\na,0.25\n");
  }
}

TEST_SUITE("pipeline") {
  TEST_CASE("report blocks for the single-agent instance") {
    const CostMatrices cm = make_cost_matrices(cols({{1, 1}}), cols({{2, 1}}));
    const PipelineResult r = run_pipeline(cm, {});
    const std::string text = format_report(cm, r, 2020);
    std::size_t at = 0;
    for (const char* h : {"1. ", "2. ", "3. ", "4. ", "5. ", "6. ", "7. "}) {
      const auto pos = text.find(std::string("\n") + h, at);
      REQUIRE(pos != std::string::npos);
      at = pos + 1;
    }
    CHECK(text.find("clearing set I = {2}") != std::string::npos);
    CHECK(text.find("R = 0.5\n") != std::string::npos);
    CHECK(text.find("multiplicity of degeneracy = 1") != std::string::npos);
    REQUIRE(r.excess_current);
    CHECK(*r.excess_current == vec({-0.5, 0.5}));
    CHECK(text == format_report(cm, run_pipeline(cm, {}), 2020));
  }

  TEST_CASE("B = C report") {
    const Matrix C = cols({{2, 1}, {1, 2}});
    const CostMatrices cm = make_cost_matrices(C, C);
    const PipelineResult r = run_pipeline(cm, {});
    CHECK(r.report.R == 0.0);
    CHECK(r.report.multiplicity == 0);
  }

  TEST_CASE("exit codes") {
    CHECK(exit_code_for(InputError("x")) == kExitInput);
    CHECK(exit_code_for(PreconditionError("a", "b")) == kExitInput);
    CHECK(exit_code_for(ConvergenceError("x", 1.0, 5)) == kExitNoConvergence);
    CHECK(exit_code_for(std::runtime_error("x")) == kExitFailure);
  }
}
