#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "eastlab/bottleneck.hpp"
#include "eastlab/exact.hpp"
#include "eastlab/graphical.hpp"
#include "eastlab/lab.hpp"
#include "eastlab/network.hpp"

using namespace eastlab;
using nlohmann::ordered_json;

namespace {

struct Options {
    std::string name;
    int L = 4;
    double q = 0.2;
    double gamma = 0.5;
    double d = 1.0;
    double horizon = 10.0;
    std::string grid;
    std::string config;
    std::uint64_t seed = 1;
    int trials = 0;
    std::string out;
    std::string format = "csv";
    bool allow_wide_q = false;
};

void emit(const Options& o, const std::string& text) {
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot write " + o.out);
    f << text;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string render(const Options& o, const lab::Report& r) {
    if (o.format == "json") return r.to_json();
    return r.to_csv();
}

// key/value output for the single-point subcommands
std::string render_kv(const Options& o, const ordered_json& j) {
    if (o.format == "json") return j.dump(2) + "\n";
    std::string head, row;
    for (auto it = j.begin(); it != j.end(); ++it) {
        head += (head.empty() ? "" : ",") + it.key();
        std::string v = it->is_string() ? it->get<std::string>() : it->dump();
        row += (it == j.begin() ? "" : ",") + v;
    }
    return head + "\n" + row + "\n";
}

int run_scenario(const Options& o) {
    lab::Grid g = lab::default_grid(o.name);
    if (!o.grid.empty()) g = lab::merge_grid(g, read_file(o.grid));
    g.seed = o.seed;
    if (o.trials > 0) g.trials = o.trials;
    lab::Report r = lab::run_scenario(o.name, g);
    emit(o, render(o, r));
    std::cerr << r.verdict_table();
    return r.passed() ? 0 : 1;
}

int run_verify(const Options& o) {
    lab::Report r = lab::verify(o.name);
    if (o.format == "json")
        emit(o, r.to_json());
    else
        emit(o, r.verdict_table());
    return r.passed() ? 0 : 1;
}

int run_exact(const Options& o) {
    ModelParams mp(o.L, o.q, o.allow_wide_q);
    exact::TimescaleReport t = exact::timescales(mp, o.L <= 10);
    ordered_json j;
    j["L"] = o.L;
    j["q"] = o.q;
    j["trel"] = t.trel;
    j["method_trel"] = t.method_trel;
    j["resid_trel"] = t.resid_trel;
    j["thit"] = t.thit;
    j["resid_thit"] = t.resid_thit;
    if (t.has_tmix) {
        j["tmix"] = t.tmix;
        j["tquant"] = t.tquant;
    }
    emit(o, render_kv(o, j));
    return 0;
}

int run_simulate(const Options& o) {
    ModelParams mp(o.L, o.q, o.allow_wide_q);
    Configuration eta = o.config.empty() ? Configuration::ones_then_zero(o.L) : Configuration::parse(o.config);
    if (eta.L != o.L) mp = ModelParams(eta.L, o.q, o.allow_wide_q);
    if (o.trials > 0) {
        auto hs = hitting_trials(eta, HitTarget{mp.L, 1}, mp, o.seed, o.trials);
        lab::Report r;
        r.name = "hitting";
        r.columns = {"trial", "time", "capped"};
        for (std::size_t i = 0; i < hs.size(); ++i) r.add_row({(long long)i, hs[i].time, (long long)hs[i].capped});
        emit(o, render(o, r));
        return 0;
    }
    NoiseField nf(mp, o.seed);
    Trajectory tr = evolve(eta, nf, o.horizon);
    if (o.format == "json") {
        ordered_json j;
        j["initial"] = tr.initial.str();
        j["final"] = tr.final.str();
        j["horizon"] = tr.horizon;
        auto& ev = j["events"] = ordered_json::array();
        for (const auto& e : tr.events) ev.push_back({{"time", e.time}, {"site", e.site}, {"spin", e.newspin}, {"legal", e.legal}});
        emit(o, j.dump(2) + "\n");
    } else {
        emit(o, tr.export_tsv());
    }
    return 0;
}

int run_astar(const Options& o) {
    ordered_json j;
    if (!o.config.empty()) {
        Configuration eta = Configuration::parse(o.config);
        DetRun run = det_dynamics(eta);
        j["config"] = eta.str();
        j["in_astar"] = in_Astar(eta);
        j["final"] = run.final.str();
        j["stages_fired"] = (long long)run.fired.size();
        emit(o, render_kv(o, j));
        return 0;
    }
    auto m = astar_bitmap(o.L);
    long long size = 0;
    for (auto v : m) size += v;
    j["L"] = o.L;
    j["astar_size"] = size;
    j["boundary_size"] = (long long)boundary_Astar(o.L).size();
    ModelParams mp(o.L, o.q, o.allow_wide_q);
    j["q"] = o.q;
    j["dirichlet"] = dirichlet_of_indicator(m, mp);
    j["ratio_bound"] = bottleneck_lower_bound(mp, m);
    emit(o, render_kv(o, j));
    return 0;
}

int run_flows(const Options& o) {
    ModelParams mp(o.L, o.q, o.allow_wide_q);
    exact::StateSet A(std::size_t(1) << o.L, 0), B = exact::site_is(o.L, o.L, 1);
    A[ones_then_zero_id(o.L)] = 1;
    network::CapacityResult c = network::capacity_both(mp, A, B);
    network::IdentityCheck id = network::hitting_capacity_identity(mp, ones_then_zero_id(o.L), B);
    network::Sandwich s = network::cicerchie(mp);
    network::Flow th = network::equilibrium_flow(mp, A, B);
    ordered_json j;
    j["L"] = o.L;
    j["q"] = o.q;
    j["capacity"] = c.jump_chain;
    j["capacity_dirichlet"] = c.dirichlet;
    j["flow_energy"] = network::flow_energy(network::Network(mp), th);
    j["thit"] = id.lhs;
    j["identity_rhs"] = id.rhs;
    j["identity_residual"] = id.residual;
    j["thit_times_capacity"] = s.product;
    j["lower"] = s.lower_exact;
    j["upper"] = s.upper;
    emit(o, render_kv(o, j));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"East model laboratory"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* c) {
        c->add_option("--L", o.L, "number of sites")->check(CLI::Range(1, kMaxSites));
        c->add_option("--q", o.q, "vacancy density");
        c->add_flag("--allow-wide-q", o.allow_wide_q, "accept q outside the default range");
        c->add_option("--seed", o.seed, "random seed");
        c->add_option("--trials", o.trials, "Monte Carlo trials");
        c->add_option("--out", o.out, "output file (default stdout)");
        c->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    };

    auto* sc = app.add_subcommand("scenario", "run a scenario grid");
    sc->add_option("name", o.name, "scenario")->required()->check(CLI::IsMember(lab::scenario_names()));
    sc->add_option("--grid", o.grid, "JSON file overriding grid fields");
    sc->add_option("--gamma", o.gamma, "unused for scenarios; grids carry gamma");
    sc->add_option("--d", o.d, "unused for scenarios; grids carry d");
    common(sc);

    auto* ve = app.add_subcommand("verify", "run a property suite");
    ve->add_option("suite", o.name, "suite")->required()->check(CLI::IsMember(lab::suite_names()));
    common(ve);

    auto* ex = app.add_subcommand("exact", "exact time scales at one point");
    common(ex);

    auto* si = app.add_subcommand("simulate", "graphical construction run");
    si->add_option("--config", o.config, "initial configuration, sites 1..L as 0/1");
    si->add_option("--t", o.horizon, "time horizon");
    common(si);

    auto* as = app.add_subcommand("astar", "A* membership and deterministic dynamics");
    as->add_option("--config", o.config, "configuration, sites 1..L as 0/1");
    common(as);

    auto* fl = app.add_subcommand("flows", "capacity, resistance and flow checks");
    common(fl);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*sc) return run_scenario(o);
        if (*ve) return run_verify(o);
        if (*ex) return run_exact(o);
        if (*si) return run_simulate(o);
        if (*as) return run_astar(o);
        if (*fl) return run_flows(o);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
