#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "eastlab/exact.hpp"

namespace eastlab::lab {

using Cell = std::variant<long long, double, std::string>;

struct Verdict {
    std::string property;
    bool hard = true;  // soft verdicts are trends or Monte Carlo checks
    bool pass = false;
    std::string detail;
};

// report-only quantities; never used as verdicts
struct Fit {
    std::string name;
    double value = 0.0;
    std::string note;
};

struct Report {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<Verdict> verdicts;
    std::vector<Fit> fits;

    void add_row(std::vector<Cell> row);
    Verdict& check(const std::string& property, bool pass, std::string detail = "", bool hard = true);
    void absorb(const Report& other);  // verdicts and fits only

    bool passed(bool include_soft = false) const;
    std::string to_csv() const;
    std::string to_json() const;
    std::string verdict_table() const;
};

struct Grid {
    std::vector<int> L;
    std::vector<double> q;
    std::vector<double> gamma;
    std::vector<double> d;
    std::vector<double> eps;
    std::vector<std::pair<int, int>> pairs;
    std::uint64_t seed = 1;
    int trials = 0;
};

std::vector<std::string> scenario_names();
std::vector<std::string> suite_names();

Grid default_grid(const std::string& scenario);
// overrides fields present in a JSON object (keys as in Grid, pairs as [[L, L'], ...])
Grid merge_grid(Grid base, const std::string& json_text);

// ceil(d / q^gamma) with a guard against rounding just above an integer
int length_scale(double d, double q, double gamma);

double trel_cached(int L, double q);
const exact::TimescaleReport& timescales_cached(int L, double q);

Report scenario_equivalence(const Grid& g);
Report scenario_paletti(const Grid& g);
Report scenario_separation(const Grid& g);
Report scenario_heterogeneity(const Grid& g);
Report scenario_exponential_law(const Grid& g);
Report run_scenario(const std::string& name, const Grid& g);

// property batteries, numbered as in the acceptance list
Report check_time_scale_chain();
Report check_two_state_anchors();
Report check_hitting_comparisons();
Report check_survival_bounds();
Report check_monotonicity(int iterative_max_L = 16);
Report check_astar(int max_L = 16);
Report check_boundary_structure();
Report check_dirichlet_of_astar();
Report check_variational_bounds();
Report check_reachable_sets();
Report check_block_ladder();
Report check_potential_theory();
Report check_monte_carlo();
Report check_desk_scale_trends();

Report check_core();
Report check_flows();
Report check_capacity();

Report verify(const std::string& suite);

}  // namespace eastlab::lab
