#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "lgw/io.hpp"
#include "lgw/report.hpp"

using namespace lgw;

TEST_CASE("dictionary CSV round trip")
{
    MatrixXd a(2, 3);
    a << 1, -0.5, 1e-300, 0.1, 3.0 / 7.0, -2e10;
    const auto path = std::filesystem::temp_directory_path() / "lgw_io_dict.csv";
    io::write_dictionary(path.string(), Dictionary(a));
    const Dictionary back = io::read_dictionary(path.string());
    CHECK(back.points() == a);
    std::filesystem::remove(path);
}

TEST_CASE("dictionary reader enforces the header")
{
    std::istringstream ok("# n=2 m=2\n1,0\n0,1\n");
    CHECK(io::parse_matrix_csv(ok, true) == MatrixXd::Identity(2, 2));

    std::istringstream missing("1,0\n0,1\n");
    CHECK_THROWS_AS(io::parse_matrix_csv(missing, true), ParseError);

    std::istringstream rows("# n=3 m=2\n1,0\n0,1\n");
    CHECK_THROWS_AS(io::parse_matrix_csv(rows, true), DimensionMismatch);

    std::istringstream ragged("# n=2 m=2\n1,0\n0\n");
    CHECK_THROWS_AS(io::parse_matrix_csv(ragged, true), DimensionMismatch);

    std::istringstream junk("# n=1 m=2\n1,abc\n");
    CHECK_THROWS_AS(io::parse_matrix_csv(junk, true), ParseError);
}

TEST_CASE("vector reader accepts mixed separators")
{
    std::istringstream in("# theta\n0.25, 0.25\n0.5\n");
    const VectorXd v = io::parse_vector(in);
    REQUIRE(v.size() == 3);
    CHECK(v[2] == 0.5);
}

TEST_CASE("format_double round trips")
{
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) {
        const std::string s = io::format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("format_cell")
{
    CHECK(format_cell(Cell{0.5}) == "0.5");
    CHECK(format_cell(Cell{std::int64_t{-3}}) == "-3");
    CHECK(format_cell(Cell{true}) == "true");
    CHECK(format_cell(Cell{std::string("a")}) == "a");
    CHECK(format_cell(Cell{std::numeric_limits<double>::quiet_NaN()}) == "nan");
    CHECK(format_cell(Cell{-std::numeric_limits<double>::infinity()}) == "-inf");
    CHECK(std::stod(format_cell(Cell{0.1 + 0.2})) == 0.1 + 0.2);
}

TEST_CASE("empty table gives a header-only CSV")
{
    Table t;
    t.columns = {"a", "b"};
    std::ostringstream out;
    write_csv(out, t);
    CHECK(out.str() == "a,b\n");
}

TEST_CASE("CSV keeps row order and parses back")
{
    Table t;
    t.columns = {"replicate", "value", "flag"};
    for (int r = 0; r < 5; ++r)
        t.add_row({std::int64_t{r}, 1.0 / (r + 1), r % 2 == 0});
    std::ostringstream out;
    write_csv(out, t);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "replicate,value,flag");
    for (int r = 0; r < 5; ++r) {
        std::getline(in, line);
        std::istringstream row(line);
        std::string a, b, c;
        std::getline(row, a, ',');
        std::getline(row, b, ',');
        std::getline(row, c, ',');
        CHECK(std::stoi(a) == r);
        CHECK(std::stod(b) == 1.0 / (r + 1));
        CHECK(c == (r % 2 == 0 ? "true" : "false"));
    }
}

TEST_CASE("JSON mirrors the CSV rows")
{
    Table t;
    t.columns = {"name", "x", "ok"};
    t.add_row({std::string("first \"q\""), 0.1, true});
    t.add_row({std::string("second"), std::numeric_limits<double>::infinity(), false});
    std::ostringstream out;
    write_json(out, t);
    const auto j = nlohmann::json::parse(out.str());
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 2);
    CHECK(j[0]["name"] == "first \"q\"");
    CHECK(j[0]["x"].get<double>() == 0.1);
    CHECK(j[0]["ok"] == true);
    CHECK(j[1]["x"].is_null());
}

TEST_CASE("add_row rejects wrong width")
{
    Table t;
    t.columns = {"a"};
    CHECK_THROWS_AS(t.add_row({1.0, 2.0}), DimensionMismatch);
}

TEST_CASE("emit_report writes the requested format")
{
    Table t;
    t.columns = {"a"};
    t.add_row({1.5});
    const auto dir = std::filesystem::temp_directory_path();
    const auto csv = dir / "lgw_report.csv";
    const auto json = dir / "lgw_report.json";
    emit_report(t, csv.string(), ReportFormat::Csv);
    emit_report(t, json.string(), ReportFormat::Json);
    std::ifstream a(csv), b(json);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == "a\n1.5\n");
    CHECK(nlohmann::json::parse(sb.str())[0]["a"] == 1.5);
    std::filesystem::remove(csv);
    std::filesystem::remove(json);
    CHECK(parse_report_format("json") == ReportFormat::Json);
    CHECK_THROWS(parse_report_format("xml"));
}
