#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "eastlab/lab.hpp"

using namespace eastlab;
using namespace eastlab::lab;

TEST_CASE("length scale") {
    CHECK(length_scale(1.0, 0.25, 1.0) == 4);
    CHECK(length_scale(2.0, 0.25, 1.0) == 8);
    CHECK(length_scale(1.0, 0.1, 0.5) == 4);
    CHECK(length_scale(1.0, 0.2, 1.0) == 5);  // 1/0.2 is 5.000000000000001 in floating point
    CHECK(length_scale(0.1, 0.5, 1.0) == 1);
}

TEST_CASE("grid merge") {
    Grid g = merge_grid(default_grid("equivalence"), R"({"L": [2, 3], "q": [0.1], "pairs": [[1, 2]], "seed": 9})");
    CHECK(g.L == std::vector<int>{2, 3});
    CHECK(g.q == std::vector<double>{0.1});
    CHECK(g.pairs == std::vector<std::pair<int, int>>{{1, 2}});
    CHECK(g.seed == 9);
    CHECK_THROWS_AS(merge_grid(g, R"({"bogus": 1})"), std::invalid_argument);
    CHECK_THROWS(merge_grid(g, "[1, 2]"));
    CHECK_THROWS_AS(default_grid("nothing"), std::invalid_argument);
    for (const auto& s : scenario_names()) CHECK_NOTHROW(default_grid(s));
}

TEST_CASE("equivalence row for the two-state chain") {
    Grid g;
    g.L = {1};
    g.q = {0.3};
    Report r = scenario_equivalence(g);
    REQUIRE(r.rows.size() == 1);
    const auto& row = r.rows[0];
    CHECK(std::get<double>(row[2]) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::get<double>(row[3]) == doctest::Approx(std::log(2.8)).epsilon(1e-8));
    CHECK(std::get<double>(row[4]) == doctest::Approx(1 / 0.7).epsilon(1e-10));
    CHECK(std::get<double>(row[5]) == doctest::Approx(std::log(4.0) / 0.7).epsilon(1e-8));
    CHECK(r.passed());
}

TEST_CASE("equivalence flags the single failing point of the chain") {
    Grid g;
    g.L = {1, 2};
    g.q = {0.3, 0.4};
    Report r = scenario_equivalence(g);
    CHECK(!r.passed());
    int failing = 0;
    for (const auto& v : r.verdicts)
        if (!v.pass) {
            ++failing;
            CHECK(v.detail.find("(L=1, q=0.4)") != std::string::npos);
        }
    CHECK(failing == 1);
}

TEST_CASE("output is deterministic and well formed") {
    Grid g = default_grid("exponential_law");
    g.q = {0.3};
    g.trials = 500;
    Report a = scenario_exponential_law(g), b = scenario_exponential_law(g);
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.to_json() == b.to_json());
    auto j = nlohmann::json::parse(a.to_json());
    CHECK(j["scenario"] == "exponential_law");
    CHECK(j["rows"].size() == a.rows.size());
    CHECK(j["columns"].size() == a.columns.size());
    g.seed = 2;
    CHECK(scenario_exponential_law(g).to_csv() != a.to_csv());
}

TEST_CASE("csv quoting and row width") {
    Report r;
    r.columns = {"a", "b"};
    r.add_row({std::string("x,y"), 1.5});
    r.add_row({std::string("say \"hi\""), 2LL});
    CHECK(r.to_csv() == "a,b\n\"x,y\",1.5\n\"say \"\"hi\"\"\",2\n");
    CHECK_THROWS_AS(r.add_row({1LL}), std::logic_error);
}

TEST_CASE("soft verdicts do not fail a report by default") {
    Report r;
    r.check("hard", true);
    r.check("soft", false, "", false);
    CHECK(r.passed());
    CHECK(!r.passed(true));
    Report s;
    s.absorb(r);
    CHECK(s.verdicts.size() == 2);
}

TEST_CASE("cached relaxation time matches a fresh solve") {
    CHECK(trel_cached(4, 0.25) == exact::relaxation_time(ModelParams(4, 0.25)));
    CHECK(trel_cached(4, 0.25) == doctest::Approx(49.36).epsilon(1e-3));
    CHECK(&timescales_cached(3, 0.2) == &timescales_cached(3, 0.2));
}

TEST_CASE("quick batteries pass") {
    CHECK(check_two_state_anchors().passed());
    CHECK(check_reachable_sets().passed());
    CHECK(check_block_ladder().passed());
    CHECK(check_astar(10).passed());
    CHECK_THROWS_AS(verify("nothing"), std::invalid_argument);
}
