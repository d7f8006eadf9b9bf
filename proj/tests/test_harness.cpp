#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <cstdlib>
#include <tuple>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "confound_ope/harness.hpp"
#include "confound_ope/plot.hpp"
#include "test_support.hpp"

using namespace confound_ope;
using namespace confound_ope::harness;

namespace {

SweepConfig small_config() {
    SweepConfig c;
    c.alpha_values = {0.9};
    c.epsilon_min = 0.1;
    c.epsilon_max = 0.3;
    c.epsilon_step = 0.1;
    c.num_samples = 5'000;
    c.replications = 2;
    c.master_seed = 99;
    return c;
}

std::string to_csv(const std::vector<SweepCell>& cells) {
    std::ostringstream os;
    write_cells_csv(os, cells);
    return os.str();
}

KeyValueConfig kv_from(const std::string& text) {
    std::istringstream in(text);
    return KeyValueConfig::parse(in);
}

std::size_t count(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
    return n;
}

} // namespace

TEST_CASE("estimator names round trip") {
    for (auto e : all_estimators()) CHECK(estimator_from_string(to_string(e)) == e);
    CHECK_THROWS_AS(estimator_from_string("bogus"), ValidationError);
}

TEST_CASE("default grid") {
    const auto grid = SweepConfig{}.epsilon_grid();
    REQUIRE(grid.size() == 50);
    CHECK(grid.front() == 0.01);
    CHECK(grid[4] == 0.05);
    CHECK(grid.back() == 0.5);
}

TEST_CASE("config parsing") {
    const auto kv = kv_from(
        "# sweep\n"
        "alpha_values = 0.6, 0.9\n"
        "epsilon_min = 0.05\n"
        "epsilon_max = 0.25\n"
        "epsilon_step = 0.05\n"
        "num_samples = 1000\n"
        "replications = 3\n"
        "master_seed = 7\n"
        "estimators = dm, snips\n"
        "workers = 2\n");
    const auto c = sweep_config_from(kv);
    CHECK(c.alpha_values == std::vector<double>{0.6, 0.9});
    CHECK(c.epsilon_grid().size() == 5);
    CHECK(c.num_samples == 1000);
    CHECK(c.replications == 3);
    CHECK(c.master_seed == 7);
    CHECK(c.estimators == std::vector<Estimator>{Estimator::DirectMethod, Estimator::Snips});
    CHECK(c.workers == 2);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(sweep_config_from(kv_from("nonsense = 1\n")), ValidationError);
    CHECK_THROWS_AS(sweep_config_from(kv_from("num_samples = 0\n")), ValidationError);
    CHECK_THROWS_AS(sweep_config_from(kv_from("alpha_values = 1.5\n")), ValidationError);
    CHECK_THROWS_AS(sweep_config_from(kv_from("epsilon_min = 0.4\nepsilon_max = 0.2\n")),
                    ValidationError);
    CHECK_THROWS_AS(sweep_config_from(kv_from("epsilon_step = 0\n")), ValidationError);
    CHECK_THROWS_AS(sweep_config_from(kv_from("estimators = dm, nope\n")), ValidationError);
    CHECK_THROWS_AS(sweep_config_from(kv_from("replications = 0\n")), ValidationError);
    CHECK_THROWS_AS(load_sweep_config("/nonexistent/sweep.cfg"), IoError);
}

TEST_CASE("bundled config loads") {
    const auto c = load_sweep_config(std::string(CONFOUND_OPE_SOURCE_DIR) + "/configs/sweep.cfg");
    CHECK(c.alpha_values == std::vector<double>{0.6, 0.75, 0.9});
    CHECK(c.epsilon_grid().size() == 50);
    CHECK(c.num_samples == 2'000'000);
    CHECK(c.replications == 1);
}

TEST_CASE("sweep shape and content") {
    const auto c = small_config();
    const auto cells = run_sweep(c);
    CHECK(cells.size() == 1 * 3 * 2 * all_estimators().size());
    const testing::GuidingExample g{0.9, 0.1};
    for (const auto& cell : cells) {
        CHECK(cell.true_difference == doctest::Approx(0.7 - 0.1).epsilon(1e-12));
        CHECK(cell.difference == doctest::Approx(cell.value_a1 - cell.value_a0).epsilon(1e-12));
        CHECK(cell.diagnostics_pass);
        if (cell.estimator == Estimator::OracleAsymptotic && cell.epsilon == 0.1) {
            CHECK(cell.value_a0 == doctest::Approx(g.observational_a0()).epsilon(1e-12));
            CHECK(cell.value_a1 == doctest::Approx(g.observational_a1()).epsilon(1e-12));
        }
    }
}

TEST_CASE("sweep determinism and worker independence") {
    auto c = small_config();
    const std::string serial = to_csv(run_sweep(c));
    CHECK(to_csv(run_sweep(c)) == serial);
    c.workers = 3;
    CHECK(to_csv(run_sweep(c)) == serial);
    c.workers = 0;
    CHECK(to_csv(run_sweep(c)) == serial);
    c.master_seed = 100;
    CHECK(to_csv(run_sweep(c)) != serial);
}

TEST_CASE("cells CSV") {
    CHECK(to_csv({}) ==
          "alpha,epsilon,replicate,estimator,value_a1,value_a0,difference,true_difference,diagnostics_pass\n");

    SweepCell one;
    one.alpha = 0.9;
    one.epsilon = 0.05;
    one.estimator = Estimator::IpsEstimated;
    one.value_a1 = 0.7;
    one.value_a0 = 0.5;
    one.difference = 0.7 - 0.5;
    one.true_difference = 0.6;
    one.diagnostics_pass = true;
    const std::string s = to_csv({one});
    CHECK(count(s, "\n") == 2);
    CHECK(s.find("\n0.90000000000000002,0.050000000000000003,0,ips_estimated,") != std::string::npos);
    CHECK(s.substr(s.size() - 5) == "true\n");

    const auto cells = run_sweep(small_config());
    std::istringstream in(to_csv(cells));
    const auto back = read_cells_csv(in);
    REQUIRE(back.size() == cells.size());
    CHECK(to_csv(back) == to_csv(cells));

    std::istringstream bad_header("a,b\n");
    CHECK_THROWS_AS(read_cells_csv(bad_header), ValidationError);
    CHECK_THROWS_AS(read_cells_csv(std::string("/nonexistent/cells.csv")), IoError);
}

TEST_CASE("cells CSV rows are sorted") {
    auto cells = run_sweep(small_config());
    std::reverse(cells.begin(), cells.end());
    std::istringstream in(to_csv(cells));
    const auto back = read_cells_csv(in);
    for (std::size_t i = 1; i < back.size(); ++i) {
        const auto& p = back[i - 1];
        const auto& q = back[i];
        const auto key = [](const SweepCell& c) {
            return std::tuple(c.alpha, c.epsilon, to_string(c.estimator), c.replicate);
        };
        CHECK(key(p) < key(q));
    }
}

TEST_CASE("seed from environment") {
    ::unsetenv("CONFOUND_OPE_SEED");
    CHECK_FALSE(seed_from_environment().has_value());
    ::setenv("CONFOUND_OPE_SEED", "12345", 1);
    CHECK(seed_from_environment() == 12345u);
    ::setenv("CONFOUND_OPE_SEED", "twelve", 1);
    CHECK_THROWS_AS(seed_from_environment(), ValidationError);
    ::unsetenv("CONFOUND_OPE_SEED");
}

TEST_CASE("plot") {
    auto c = small_config();
    c.alpha_values = {0.6, 0.75, 0.9};
    c.replications = 1;
    const auto cells = run_sweep(c);
    std::ostringstream os;
    plot::render_plot(os, cells);
    const std::string svg = os.str();
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\"") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count(svg, "data-alpha=") == 3);
    CHECK(count(svg, "class=\"curve\"") == 3 * all_estimators().size());
    CHECK(count(svg, "region-positive") >= 3);
    CHECK(count(svg, "region-negative") >= 3);
    CHECK(count(svg, "<polygon") == 0); // no bands with one replicate

    std::ostringstream again;
    plot::render_plot(again, cells);
    CHECK(again.str() == svg);

    std::ostringstream banded;
    plot::render_plot(banded, run_sweep(small_config()));
    CHECK(count(banded.str(), "data-alpha=") == 1);
    CHECK(count(banded.str(), "<polygon") > 0);

    std::ostringstream empty;
    CHECK_THROWS_AS(plot::render_plot(empty, {}), ValidationError);
}
