#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "lgw/error.hpp"
#include "lgw/experiments.hpp"

using namespace lgw;

namespace {

ExperimentConfig config(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

std::string csv(const Table& t)
{
    std::ostringstream out;
    write_csv(out, t);
    return out.str();
}

} // namespace

TEST_CASE("config parsing")
{
    const auto cfg = config("# comment\nkind = rates-sweep\nseed = 9  # trailing\nns = 10, 100\n\nMs=5\n");
    CHECK(cfg.kind == "rates-sweep");
    CHECK(cfg.seed == 9);
    CHECK(cfg.output_path == "rates-sweep.csv");
    CHECK(cfg.grid("ns") == std::vector<double>{10, 100});
    CHECK(cfg.integer("Ms") == 5);
    CHECK(cfg.number("sigma", 1.0) == 1.0);
    CHECK_THROWS_AS(cfg.number("sigma"), InvalidInput);
    CHECK(cfg.flag("missing", true));

    CHECK(config("kind = rates-sweep\nformat = json\n").output_path == "rates-sweep.json");
    CHECK_THROWS_AS(config("kind = rates-sweep\nns = 1\nns = 2\n"), ParseError);
    CHECK_THROWS_AS(config("kind = rates-sweep\nbogus = 1\n"), ParseError);
    CHECK_THROWS_AS(config("ns = 1\n"), ParseError);
    CHECK_THROWS_AS(config("kind = rates-sweep\nns\n"), ParseError);
    CHECK_THROWS_AS(config("kind = rates-sweep\nns =\n"), ParseError);
    CHECK_THROWS_AS(config("kind = nope\n"), InvalidInput);
    CHECK_THROWS_AS(config("kind = rates-sweep\nMs = 1.5\n").integer("Ms"), ParseError);
    CHECK_THROWS_AS(config("kind = rates-sweep\nsigma = x\n").number("sigma"), ParseError);
}

TEST_CASE("coverage_tolerance")
{
    const double p = std::exp(-2.0);
    CHECK(coverage_tolerance(2.0, 500) == doctest::Approx(p + 3.0 * std::sqrt(p * (1 - p) / 500)));
    CHECK(coverage_tolerance(2.0, 1000000) == doctest::Approx(p).epsilon(0.01));
    CHECK(coverage_tolerance(0.0, 10) == doctest::Approx(1.0));
}

TEST_CASE("small width sandwich")
{
    const auto res = run_experiment(
        config("kind = width-sandwich\nseed = 1\ndictionary = signed-identity\nn = 8\nradii = 0.5\n"
               "samples = 200\nkappa = 1\n"));
    CHECK(res.table.rows.size() == 1);
    CHECK(res.passed());
}

TEST_CASE("segment width matches E|g|")
{
    const auto res = run_experiment(config(
        "kind = width-sandwich\nseed = 2\ndictionary = segment\nn = 1\nradii = 2\nsamples = 4000\n"
        "reference_width = 0.7978845608028654\n"));
    CHECK(res.passed());
}

TEST_CASE("small oracle coverage runs")
{
    for (const char* kind : {"lasso-oracle", "agg-oracle"}) {
        CAPTURE(kind);
        const auto res = run_experiment(config(std::string("kind = ") + kind +
                                               "\nseed = 3\nn = 20\nM = 30\nsigma = 0.5\nx = 2\n"
                                               "replicates = 20\ntarget = outside\n"));
        CHECK(res.table.rows.size() == 20);
        CHECK(res.passed());
    }
}

TEST_CASE("small density run")
{
    const auto res = run_experiment(
        config("kind = density-oracle\nseed = 4\ndictionary = two-bin\ntruth = uniform\nn = 200\n"
               "replicates = 300\nx = 2\n"));
    CHECK(res.table.rows.size() == 300);
    CHECK(res.passed());
}

TEST_CASE("small Maurey run")
{
    const auto res = run_experiment(
        config("kind = maurey-check\nseed = 5\ninstances = 2\nM = 8\nn = 3\nm = 1, 4\ntrials = 500\n"));
    CHECK(res.passed());
}

TEST_CASE("small persistence run")
{
    const auto res = run_experiment(
        config("kind = persistence-run\nseed = 6\nM = 10\nR = 1\nsigma = 0.5\nns = 20, 40\nreplicates = 3\n"
               "compute_rates = false\n"));
    CHECK(res.table.rows.size() == 2);
}

TEST_CASE("rates sweep")
{
    const auto res = run_experiment(config("kind = rates-sweep\nns = 10, 1000\nMs = 10, 10000\n"));
    CHECK(res.table.rows.size() == 4);
    CHECK(res.passed());
}

TEST_CASE("reports do not depend on the thread count")
{
    for (const char* text :
         {"kind = width-sandwich\nseed = 8\ndictionary = signed-identity\nn = 6\nradii = 0.3, 0.6\n"
          "samples = 100\nkappa = 1\n",
          "kind = lasso-oracle\nseed = 8\nn = 15\nM = 20\nsigma = 0.5\nx = 2\nreplicates = 10\n"
          "target = outside\n",
          "kind = maurey-check\nseed = 8\ninstances = 2\nM = 6\nn = 2\nm = 2\ntrials = 300\n"}) {
        const auto cfg = config(text);
        CAPTURE(cfg.kind);
        CHECK(csv(run_experiment(cfg, 1).table) == csv(run_experiment(cfg, 8).table));
    }
}

TEST_CASE("fixed point width check")
{
    const auto c = fixed_point_width_check(64, 128, 0.1, 1.0, 200, SeededStream{9, 0});
    CHECK(c.side_condition);
    CHECK(c.rhs == doctest::Approx(0.5 * c.t_star_sq));
    CHECK(c.lhs > 0.0);
    CHECK(c.passed == (c.lhs <= c.rhs + 3.0 * c.lhs_stderr));
    CHECK_THROWS_AS(fixed_point_width_check(64, 7, 0.1, 1.0, 10, SeededStream{9, 0}), InvalidInput);
}
