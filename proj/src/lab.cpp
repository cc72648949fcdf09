#include "eastlab/lab.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "eastlab/bottleneck.hpp"
#include "eastlab/graphical.hpp"
#include "eastlab/network.hpp"

namespace eastlab::lab {

namespace {

const std::vector<double> kGridQ = {0.05, 0.1, 0.2, 0.3, 0.4};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt_point(int L, double q) { return "(L=" + std::to_string(L) + ", q=" + fmt(q) + ")"; }

// collects failing points for one property
struct Tally {
    long long checked = 0;
    std::vector<std::string> failures;
    double worst = -std::numeric_limits<double>::infinity();  // max of lhs/rhs - 1

    void see(bool ok, const std::string& where, double slack = std::numeric_limits<double>::quiet_NaN()) {
        ++checked;
        if (!std::isnan(slack)) worst = std::max(worst, slack);
        if (!ok) failures.push_back(where);
    }
    std::string detail() const {
        std::string s = std::to_string(checked) + " checks";
        if (std::isfinite(worst)) s += ", max rel excess " + fmt(worst);
        if (!failures.empty()) {
            s += ", failing:";
            for (std::size_t i = 0; i < failures.size() && i < 6; ++i) s += " " + failures[i];
            if (failures.size() > 6) s += " ...";
        }
        return s;
    }
    bool ok() const { return failures.empty(); }
};

// lhs <= rhs with relative slack
bool leq(double lhs, double rhs, double rel = 1e-9, double abs_tol = 0.0) {
    return lhs <= rhs + rel * std::abs(rhs) + abs_tol;
}
double excess(double lhs, double rhs) { return rhs != 0.0 ? lhs / rhs - 1.0 : lhs; }

double pi_of(StateId s, const ModelParams& mp) {
    int z = mp.L - std::popcount(s);
    return std::pow(mp.q, z) * std::pow(mp.p(), mp.L - z);
}

struct MeanSe {
    double mean = 0.0, se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe r;
    if (v.empty()) return r;
    double s = 0.0;
    for (double x : v) s += x;
    r.mean = s / double(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.se = v.size() > 1 ? std::sqrt(ss / double(v.size() - 1) / double(v.size())) : 0.0;
    return r;
}

// sup |F_n - (1 - e^{-x})| for a sample of x values
double ks_exponential(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const double n = double(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double F = 1.0 - std::exp(-x[i]);
        d = std::max({d, std::abs(double(i + 1) / n - F), std::abs(F - double(i) / n)});
    }
    return d;
}

// exact sup_t |P(tau > t E tau) - e^{-t}| on a fine grid
double ks_exact(const ModelParams& mp) {
    const int L = mp.L;
    double T = exact::T_hit(mp);
    exact::SurvivalCurve S(mp, ones_then_zero_id(L), exact::site_is(L, L, 1));
    const double h = 0.002;
    auto v = S.on_grid(h * T, 5000);
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) d = std::max(d, std::abs(v[i] - std::exp(-h * double(i))));
    return d;
}

std::vector<double> distribution_at(const ModelParams& mp, StateId start, double t) {
    exact::Generator g = exact::build_generator(mp);
    Eigen::MatrixXd P = exact::expm_uniformized(g.dense(), g.max_holding_rate() + 1.0, t);
    std::vector<double> out(g.size());
    for (StateId s = 0; s < g.size(); ++s) out[s] = P(Eigen::Index(start), Eigen::Index(s));
    return out;
}

// least-squares slope of y on x
double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

long long binom2(int n) { return (long long)n * (n - 1) / 2; }

double envelope(int L, double q) {
    int n = ModelParams(L, q).n();
    return std::tgamma(n + 1.0) / (std::pow(q, n) * std::pow(2.0, double(binom2(n))));
}

std::string csv_cell(const Cell& c) {
    if (auto p = std::get_if<long long>(&c)) return std::to_string(*p);
    if (auto p = std::get_if<double>(&c)) return fmt(*p);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

}  // namespace

// ---------------------------------------------------------------- Report

void Report::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width differs from header in " + name);
    rows.push_back(std::move(row));
}

Verdict& Report::check(const std::string& property, bool pass, std::string detail, bool hard) {
    verdicts.push_back({property, hard, pass, std::move(detail)});
    return verdicts.back();
}

void Report::absorb(const Report& other) {
    verdicts.insert(verdicts.end(), other.verdicts.begin(), other.verdicts.end());
    fits.insert(fits.end(), other.fits.begin(), other.fits.end());
}

bool Report::passed(bool include_soft) const {
    for (const auto& v : verdicts)
        if ((v.hard || include_soft) && !v.pass) return false;
    return true;
}

std::string Report::to_csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_cell(r[i]);
        os << '\n';
    }
    return os.str();
}

std::string Report::to_json() const {
    nlohmann::ordered_json j;
    j["scenario"] = name;
    j["columns"] = columns;
    auto& rs = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json o;
        for (std::size_t i = 0; i < r.size(); ++i)
            std::visit([&](const auto& v) { o[columns[i]] = v; }, r[i]);
        rs.push_back(o);
    }
    auto& vs = j["verdicts"] = nlohmann::ordered_json::array();
    for (const auto& v : verdicts)
        vs.push_back({{"property", v.property}, {"kind", v.hard ? "hard" : "soft"}, {"pass", v.pass}, {"detail", v.detail}});
    auto& fs = j["fits"] = nlohmann::ordered_json::array();
    for (const auto& f : fits) fs.push_back({{"name", f.name}, {"value", f.value}, {"note", f.note}, {"kind", "fit"}});
    j["passed"] = passed();
    return j.dump(2) + "\n";
}

std::string Report::verdict_table() const {
    std::size_t w = 8;
    for (const auto& v : verdicts) w = std::max(w, v.property.size());
    std::ostringstream os;
    auto pad = [&](const std::string& s) { return s + std::string(w - std::min(w, s.size()), ' '); };
    os << pad("property") << "  kind  result  detail\n";
    for (const auto& v : verdicts)
        os << pad(v.property) << "  " << (v.hard ? "hard" : "soft") << "  " << (v.pass ? "PASS  " : "FAIL  ") << "  "
           << v.detail << '\n';
    for (const auto& f : fits) os << pad(f.name) << "  fit   " << fmt(f.value) << "  " << f.note << '\n';
    return os.str();
}

// ---------------------------------------------------------------- grids

std::vector<std::string> scenario_names() { return {"equivalence", "paletti", "separation", "heterogeneity", "exponential_law"}; }

std::vector<std::string> suite_names() {
    return {"core", "coupling", "equo", "dominare", "paletti", "astar", "gamma", "flows", "capacity", "all"};
}

Grid default_grid(const std::string& scenario) {
    Grid g;
    if (scenario == "equivalence") {
        g.L = {1, 2, 3, 4, 5, 6, 7, 8};
        g.q = kGridQ;
    } else if (scenario == "paletti") {
        g.L = {2, 4, 8, 16};
        g.q = {0.05, 0.1, 0.15, 0.2, 0.3};
    } else if (scenario == "separation") {
        g.pairs = {{1, 2}, {2, 3}, {4, 5}, {2, 4}, {8, 9}, {3, 4}, {5, 8}, {6, 7}};
        g.q = {0.3, 0.25, 0.2, 0.15, 0.125, 0.1, 0.075, 0.05};
        g.gamma = {0.25, 0.5, 0.75};
        g.d = {0.5, 2.0};
    } else if (scenario == "heterogeneity") {
        g.q = {0.1};
        g.gamma = {0.5};
        g.d = {1.0};
        g.eps = {0.1, 0.3, 0.5, 0.7, 1.0};
        g.trials = 10000;
    } else if (scenario == "exponential_law") {
        g.q = {0.3, 0.2, 0.1, 0.04};
        g.gamma = {0.5};
        g.d = {1.0};
        g.trials = 20000;
    } else {
        throw std::invalid_argument("unknown scenario: " + scenario);
    }
    return g;
}

Grid merge_grid(Grid g, const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    if (!j.is_object()) throw std::invalid_argument("grid file must hold a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k == "L")
            g.L = it->get<std::vector<int>>();
        else if (k == "q")
            g.q = it->get<std::vector<double>>();
        else if (k == "gamma")
            g.gamma = it->get<std::vector<double>>();
        else if (k == "d")
            g.d = it->get<std::vector<double>>();
        else if (k == "eps")
            g.eps = it->get<std::vector<double>>();
        else if (k == "pairs")
            g.pairs = it->get<std::vector<std::pair<int, int>>>();
        else if (k == "seed")
            g.seed = it->get<std::uint64_t>();
        else if (k == "trials")
            g.trials = it->get<int>();
        else
            throw std::invalid_argument("unknown grid key: " + k);
    }
    return g;
}

int length_scale(double d, double q, double gamma) {
    double x = d / std::pow(q, gamma);
    double r = std::round(x);
    if (std::abs(x - r) < 1e-9 * std::max(1.0, x)) return std::max(1, int(r));
    return std::max(1, int(std::ceil(x)));
}

// ---------------------------------------------------------------- caches

double trel_cached(int L, double q) {
    static std::mutex mu;
    static std::map<std::pair<int, double>, double> memo;
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = memo.find({L, q});
        if (it != memo.end()) return it->second;
    }
    double v = exact::relaxation_time(ModelParams(L, q));
    std::lock_guard<std::mutex> lk(mu);
    memo[{L, q}] = v;
    return v;
}

const exact::TimescaleReport& timescales_cached(int L, double q) {
    static std::mutex mu;
    static std::map<std::pair<int, double>, exact::TimescaleReport> memo;
    std::lock_guard<std::mutex> lk(mu);
    auto it = memo.find({L, q});
    if (it == memo.end()) it = memo.emplace(std::make_pair(L, q), exact::timescales(ModelParams(L, q), L <= 10)).first;
    return it->second;
}

// ---------------------------------------------------------------- scenarios

Report scenario_equivalence(const Grid& g) {
    Report r;
    r.name = "equivalence";
    r.columns = {"L", "q", "trel", "tmix", "thit", "tquant", "method_trel", "resid_trel", "resid_thit",
                 "lower_ok", "trel_le_tmix", "tmix_le_4thit", "quantile_ok", "status"};
    Tally lower, relmix, mixhit, quant, ln2;
    for (int L : g.L)
        for (double q : g.q) {
            if (L > 10) {
                r.add_row({(long long)L, q, 0.0, 0.0, 0.0, 0.0, std::string("-"), 0.0, 0.0, 0LL, 0LL, 0LL, 0LL,
                           std::string("skipped")});
                continue;
            }
            const auto& t = timescales_cached(L, q);
            std::string at = fmt_point(L, q);
            bool a = leq(std::pow(1 - q, L) * t.thit, t.trel);
            bool b = leq(t.trel, t.tmix);
            bool c = leq(t.tmix, 4 * t.thit);
            bool d = t.tquant > 0.0 && leq(0.25 * t.thit, t.tquant) && leq(t.tquant, 4 * t.thit) && leq(t.tmix, t.tquant);
            lower.see(a, at, excess(std::pow(1 - q, L) * t.thit, t.trel));
            relmix.see(b, at, excess(t.trel, t.tmix));
            mixhit.see(c, at, excess(t.tmix, 4 * t.thit));
            quant.see(d, at);
            ln2.see(leq(std::log(2.0) * t.trel, t.tmix), at);
            r.add_row({(long long)L, q, t.trel, t.tmix, t.thit, t.tquant, t.method_trel, t.resid_trel, t.resid_thit,
                       (long long)a, (long long)b, (long long)c, (long long)d, std::string("ok")});
        }
    r.check("hitting time scaled by (1-q)^L is below relaxation time", lower.ok(), lower.detail());
    r.check("relaxation time below mixing time", relmix.ok(), relmix.detail());
    r.check("mixing time below four hitting times", mixhit.ok(), mixhit.detail());
    r.check("quantile time within [thit/4, 4 thit] and above mixing time", quant.ok(), quant.detail());
    r.check("mixing time at least ln2 times relaxation time", ln2.ok(), ln2.detail());
    return r;
}

Report scenario_paletti(const Grid& g) {
    Report r;
    r.name = "paletti";
    r.columns = {"L", "q", "n", "trel", "envelope", "log_ratio", "astar_bound", "bound_ok"};
    Tally var;
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> series;
    double alpha = 0.0, alpha_p = 0.0;
    for (int L : g.L)
        for (double q : g.q) {
            ModelParams mp(L, q);
            double trel = trel_cached(L, q);
            double e = envelope(L, q);
            double lr = std::log(trel / e);
            double bound = bottleneck_lower_bound(mp, astar_bitmap(L));
            bool ok = leq(bound, trel);
            var.see(ok, fmt_point(L, q), excess(bound, trel));
            r.add_row({(long long)L, q, (long long)mp.n(), trel, e, lr, bound, (long long)ok});
            series[L].first.push_back(std::log(1.0 / q));
            series[L].second.push_back(lr);
            if (q < 1.0) {
                alpha = std::max(alpha, lr / std::log(q));
                alpha_p = std::max(alpha_p, lr / std::log(1.0 / q));
            }
        }
    r.check("relaxation time above the A* bottleneck ratio bound", var.ok(), var.detail());
    Tally ladder;
    for (double q : {0.1, 0.2, 0.3}) {
        BlockLadder bl = block_ladder(3, q);
        for (int i = 0; i + 1 < int(bl.ell.size()); ++i) {
            double lo = trel_cached(int(bl.ell[i]), q), hi = trel_cached(int(bl.ell[i + 1]), q);
            ladder.see(leq(hi, bl.factor[i] * lo), "(ell=" + std::to_string(bl.ell[i]) + ", q=" + fmt(q) + ")",
                       excess(hi, bl.factor[i] * lo));
        }
    }
    r.check("block ladder gap recursion on (3, 5, 8)", ladder.ok(), ladder.detail());
    r.fits.push_back({"alpha_lower", alpha, "smallest alpha with envelope * q^alpha <= trel on the grid"});
    r.fits.push_back({"alpha_upper", alpha_p, "smallest alpha' with trel <= envelope * q^-alpha' on the grid"});
    for (const auto& [L, xy] : series)
        if (xy.first.size() > 1)
            r.fits.push_back({"slope_L" + std::to_string(L), slope(xy.first, xy.second),
                              "least-squares slope of log(trel/envelope) against log(1/q)"});
    return r;
}

Report scenario_separation(const Grid& g) {
    Report r;
    r.name = "separation";
    r.columns = {"family", "L", "Lp", "q", "trel_L", "trel_Lp", "ratio", "separating"};
    std::vector<double> qs = g.q;
    std::sort(qs.begin(), qs.end(), std::greater<double>());
    auto ceil_log2 = [](int L) { return ModelParams(L, 0.1).n(); };
    Tally increasing, monotone_ratio;
    for (auto [L, Lp] : g.pairs) {
        const bool sep = ceil_log2(Lp) > ceil_log2(L);
        std::vector<double> ratios, logs;
        for (double q : qs) {
            double a = trel_cached(L, q), b = trel_cached(Lp, q);
            ratios.push_back(b / a);
            logs.push_back(std::log(1.0 / q));
            monotone_ratio.see(Lp < L || leq(a, b, 1e-12), fmt_point(Lp, q));
            r.add_row({std::string("fixed"), (long long)L, (long long)Lp, q, a, b, b / a, (long long)sep});
        }
        std::string pair = "(" + std::to_string(L) + "," + std::to_string(Lp) + ")";
        if (sep) {
            bool inc = true;
            for (std::size_t i = 1; i < ratios.size(); ++i) inc = inc && ratios[i] > ratios[i - 1];
            increasing.see(inc, pair);
        }
        std::vector<double> lr;
        for (double x : ratios) lr.push_back(std::log(x));
        r.fits.push_back({"log_slope" + pair, slope(logs, lr),
                          std::string(sep ? "separating" : "same dyadic scale") + " pair, slope of log ratio against log(1/q)"});
    }
    r.check("ratio grows as q decreases for pairs on different dyadic scales", increasing.ok(), increasing.detail(), false);

    // equilibrium scale: lengths d/q against 1/q
    Tally bounded;
    for (double q : {0.25, 0.2, 0.15, 0.125}) {
        int L1 = length_scale(1.0, q, 1.0);
        double base = trel_cached(L1, q);
        for (double d : g.d) {
            int Ld = length_scale(d, q, 1.0);
            if (Ld > 16) continue;
            double v = trel_cached(Ld, q);
            monotone_ratio.see(d < 1.0 || leq(base, v, 1e-12), fmt_point(Ld, q));
            monotone_ratio.see(d > 1.0 || leq(v, base, 1e-12), fmt_point(Ld, q));
            r.add_row({"d=" + fmt(d) + "/q", (long long)L1, (long long)Ld, q, base, v, v / base, 0LL});
            if (d > 1.0) bounded.see(v / base < 20.0, fmt_point(Ld, q), v / base / 20.0 - 1.0);
        }
    }
    r.check("relaxation time ratio at lengths 2/q and 1/q stays below 20", bounded.ok(), bounded.detail(), false);
    r.check("relaxation time non-decreasing in L on every compared pair", monotone_ratio.ok(), monotone_ratio.detail());

    // mesoscopic lengths: smallest stretch factor with a monotone ratio trend
    const int cap = 14;
    for (double gam : g.gamma) {
        double found = 0.0;
        for (double lam : {1.5, 2.0, 3.0}) {
            std::vector<double> ratios;
            for (double q : qs) {
                int L = length_scale(1.0, q, gam), Lp = int(std::ceil(lam * L));
                if (Lp > cap) continue;
                double a = trel_cached(L, q), b = trel_cached(Lp, q);
                ratios.push_back(b / a);
                r.add_row({"gamma=" + fmt(gam) + ",lambda=" + fmt(lam), (long long)L, (long long)Lp, q, a, b, b / a,
                           (long long)(ceil_log2(Lp) > ceil_log2(L))});
            }
            bool inc = ratios.size() >= 3;
            for (std::size_t i = 1; i < ratios.size(); ++i) inc = inc && ratios[i] > ratios[i - 1];
            if (inc && found == 0.0) found = lam;
        }
        r.fits.push_back({"lambda_observed(gamma=" + fmt(gam) + ")", found,
                          "observation: smallest tried stretch with a monotone ratio on the grid (0 if none)"});
    }
    return r;
}

Report scenario_heterogeneity(const Grid& g) {
    Report r;
    r.name = "heterogeneity";
    r.columns = {"part", "q", "gamma", "d", "eps", "L", "t", "exact", "mc", "mc_se", "trials"};
    const int trials = g.trials > 0 ? g.trials : 10000;
    for (double q : g.q)
        for (double gam : g.gamma)
            for (double d : g.d) {
                const double D = d / std::pow(q, gam);
                // part (ii): a long initial domain keeps its right vacancy
                const int L = length_scale(d, q, gam);
                if (L > 10 || L > 1.0 / q + 1e-9) continue;
                ModelParams mp(L, q);
                const Configuration eta = Configuration::ones_then_zero(L);
                std::vector<double> surv_exact;
                double prev = 2.0;
                bool monotone = true;
                for (double e : g.eps) {
                    int Le = length_scale(e * d, q, gam);
                    double t = trel_cached(Le, q);
                    auto dist = distribution_at(mp, eta.bits, t);
                    double ex = 0.0;
                    for (StateId s = 0; s < dist.size(); ++s)
                        if (!spin_bits(s, L)) ex += dist[s];
                    std::vector<double> hits(trials);
#pragma omp parallel for schedule(dynamic, 64)
                    for (int i = 0; i < trials; ++i) {
                        NoiseField nf(mp, derive_seed(g.seed, std::uint64_t(i)));
                        hits[i] = evolve(eta, nf, t, true).final.spin(L) == 0 ? 1.0 : 0.0;
                    }
                    MeanSe m = mean_se(hits);
                    r.add_row({std::string("ii"), q, gam, d, e, (long long)L, t, ex, m.mean, m.se, (long long)trials});
                    monotone = monotone && ex <= prev + 1e-12;
                    prev = ex;
                    surv_exact.push_back(ex);
                    if (e <= 0.3 + 1e-12)
                        r.check("vacancy at the end of a long domain survives with frequency >= 0.9 (" + fmt_point(L, q) +
                                    ", eps=" + fmt(e) + ")",
                                m.mean >= 0.9, "mc " + fmt(m.mean) + " +- " + fmt(m.se) + ", exact " + fmt(ex), false);
                }
                r.check("survival decreases as eps grows (" + fmt_point(L, q) + ")", monotone, "exact values", false);

                // part (i): close vacancy pairs at the relaxation time of the domain scale
                const int L2 = std::min(2 * L, 10);
                ModelParams m2(L2, q);
                double t = trel_cached(L, q);
                exact::Generator gen = exact::build_generator(m2);
                Eigen::MatrixXd P = exact::expm_uniformized(gen.dense(), gen.max_holding_rate() + 1.0, t);
                for (double e : g.eps) {
                    const int w = int(std::floor(e * D + 1e-9));
                    auto close_pair = [&](StateId s) {
                        StateId z = ~s & all_ones(L2);
                        for (int k = 1; k <= w; ++k)
                            if (z & (z >> k)) return true;
                        return false;
                    };
                    Eigen::VectorXd ind = Eigen::VectorXd::Zero(Eigen::Index(gen.size()));
                    for (StateId s = 0; s < gen.size(); ++s) ind[Eigen::Index(s)] = close_pair(s) ? 1.0 : 0.0;
                    Eigen::VectorXd pr = P * ind;
                    Eigen::Index arg = 0;
                    double sup = pr.maxCoeff(&arg);
                    const Configuration start(StateId(arg), L2);
                    std::vector<double> hits(trials);
#pragma omp parallel for schedule(dynamic, 64)
                    for (int i = 0; i < trials; ++i) {
                        NoiseField nf(m2, derive_seed(g.seed + 1, std::uint64_t(i)));
                        hits[i] = close_pair(evolve(start, nf, t, true).final.bits) ? 1.0 : 0.0;
                    }
                    MeanSe m = mean_se(hits);
                    r.add_row({std::string("i"), q, gam, d, e, (long long)L2, t, sup, m.mean, m.se, (long long)trials});
                    r.check("close vacancy pair frequency at the worst start matches the exact value (eps=" + fmt(e) + ")",
                            std::abs(m.mean - sup) <= 4 * m.se + 1e-12, "mc " + fmt(m.mean) + ", exact " + fmt(sup), false);
                }
            }
    // single-site refresh: a legal ring at an occupied site empties it with probability q
    {
        ModelParams mp(8, 0.2);
        const int runs = 200;
        std::vector<double> ones(runs), zeros(runs);
#pragma omp parallel for schedule(dynamic, 8)
        for (int i = 0; i < runs; ++i) {
            std::uint64_t sd = derive_seed(g.seed + 17, std::uint64_t(i));
            Configuration eta = Configuration::ones(8);
            for (int x = 1; x <= 8; ++x) eta.set(x, counter_uniform(sd, 1000 + x, 0) < mp.p() ? 1 : 0);
            NoiseField nf(mp, sd);
            Trajectory tr = evolve(eta, nf, 200.0);
            Configuration c = tr.initial;
            for (const auto& ev : tr.events) {
                if (ev.legal && c.spin(ev.site) == 1) {
                    ones[i] += 1.0;
                    zeros[i] += ev.newspin == 0;
                }
                if (ev.legal) c.set(ev.site, ev.newspin);
            }
        }
        double n1 = std::accumulate(ones.begin(), ones.end(), 0.0), n0 = std::accumulate(zeros.begin(), zeros.end(), 0.0);
        double f = n0 / n1, se = std::sqrt(0.2 * 0.8 / n1);
        r.add_row({std::string("single-site"), 0.2, 0.0, 0.0, 0.0, 8LL, 200.0, 0.2, f, se, (long long)runs});
        r.check("occupied site empties at a legal ring with frequency at most q", f <= 0.2 + 3 * se,
                "frequency " + fmt(f) + " +- " + fmt(se), false);
    }
    return r;
}

Report scenario_exponential_law(const Grid& g) {
    Report r;
    r.name = "exponential_law";
    r.columns = {"q", "gamma", "d", "L", "thit", "ks_exact", "mc_mean", "mc_se", "ks_mc", "trials"};
    const int trials = g.trials > 0 ? g.trials : 20000;
    for (double gam : g.gamma)
        for (double d : g.d) {
            std::vector<double> qs = g.q;
            std::sort(qs.begin(), qs.end(), std::greater<double>());
            std::vector<double> kse;
            for (double q : qs) {
                int L = length_scale(d, q, gam);
                if (L > 10) continue;
                ModelParams mp(L, q);
                double T = exact::T_hit(mp);
                double ke = ks_exact(mp);
                auto hs = hitting_trials(Configuration::ones_then_zero(L), HitTarget{L, 1}, mp,
                                         derive_seed(g.seed, std::uint64_t(L) * 1000 + std::uint64_t(q * 1e6)), trials);
                std::vector<double> t, x;
                for (const auto& h : hs) t.push_back(h.time), x.push_back(h.time / T);
                MeanSe m = mean_se(t);
                double km = ks_exponential(x);
                r.add_row({q, gam, d, (long long)L, T, ke, m.mean, m.se, km, (long long)trials});
                r.check("Monte Carlo mean within 4 standard errors of exact hitting time " + fmt_point(L, q),
                        std::abs(m.mean - T) <= 4 * m.se, "mc " + fmt(m.mean) + ", exact " + fmt(T), false);
                kse.push_back(ke);
                if (q == qs.back())
                    r.check("KS distance to the unit exponential below 0.1 at the smallest q " + fmt_point(L, q), km < 0.1,
                            "mc " + fmt(km) + ", exact " + fmt(ke), false);
            }
            bool dec = true;
            for (std::size_t i = 1; i < kse.size(); ++i) dec = dec && kse[i] < kse[i - 1];
            r.check("exact KS distance decreases along decreasing q (gamma=" + fmt(gam) + ", d=" + fmt(d) + ")", dec,
                    std::to_string(kse.size()) + " grid points", false);
        }
    return r;
}

Report run_scenario(const std::string& name, const Grid& g) {
    if (name == "equivalence") return scenario_equivalence(g);
    if (name == "paletti") return scenario_paletti(g);
    if (name == "separation") return scenario_separation(g);
    if (name == "heterogeneity") return scenario_heterogeneity(g);
    if (name == "exponential_law") return scenario_exponential_law(g);
    throw std::invalid_argument("unknown scenario: " + name);
}

// ---------------------------------------------------------------- batteries

Report check_time_scale_chain() {
    Report r = scenario_equivalence(default_grid("equivalence"));
    r.name = "time scale chain";
    return r;
}

Report check_two_state_anchors() {
    Report r;
    r.name = "two-state anchors";
    ModelParams mp(1, 0.3);
    const auto& t = timescales_cached(1, 0.3);
    auto near = [](double a, double b) { return std::abs(a - b) <= 1e-8 * std::abs(b); };
    exact::StateSet A(2, 0), B(2, 0);
    A[0] = 1;
    B[1] = 1;
    double C = network::capacity(mp, A, B);
    r.check("relaxation time equals 1", near(t.trel, 1.0), fmt(t.trel));
    r.check("hitting time equals 1/p", near(t.thit, 1.0 / 0.7), fmt(t.thit));
    r.check("mixing time equals ln(4p)", near(t.tmix, std::log(2.8)), fmt(t.tmix));
    r.check("quantile time equals ln(4)/p", near(t.tquant, std::log(4.0) / 0.7), fmt(t.tquant));
    r.check("capacity equals qp", near(C, 0.21), fmt(C));
    return r;
}

Report check_hitting_comparisons() {
    Report r;
    r.name = "hitting comparisons";
    Tally mucca, contucci, tail4, early;
    for (int L = 2; L <= 8; ++L)
        for (double q : kGridQ) {
            ModelParams mp(L, q), mm(L - 1, q);
            std::string at = fmt_point(L, q);
            const auto& t = timescales_cached(L, q);
            double hat = exact::hat_tau_mean(mm);
            mucca.see(leq(hat, t.thit) && leq(t.thit, 5 * hat), at);
            contucci.see(leq(0.25 * t.thit, t.tquant) && leq(t.tquant, 4 * t.thit) && leq(t.tmix, t.tquant), at);
            exact::SurvivalCurve S(mp, ones_then_zero_id(L), exact::site_is(L, L, 1));
            const double step = t.tquant / 4;
            auto v = S.on_grid(step, 60);
            bool ok4 = true, oke = true;
            for (std::size_t k = 0; k < v.size(); ++k) {
                double tt = step * double(k);
                ok4 = ok4 && leq(v[k], std::pow(0.25, std::floor(tt / t.tquant + 1e-12)), 1e-9, 1e-12);
                oke = oke && leq(1 - v[k], std::exp(1.0) * tt / t.thit, 1e-9, 1e-12);
            }
            auto w = S.on_grid(t.thit / 200, 40);
            for (std::size_t k = 0; k < w.size(); ++k) oke = oke && leq(1 - w[k], std::exp(1.0) * double(k) / 200, 1e-9, 1e-12);
            tail4.see(ok4, at);
            early.see(oke, at);
        }
    r.check("mean vacancy time on L-1 sites sandwiches the hitting time (factor 5)", mucca.ok(), mucca.detail());
    r.check("quantile time within [thit/4, 4 thit] and above mixing time", contucci.ok(), contucci.detail());
    r.check("survival below (1/4)^floor(t/T(L))", tail4.ok(), tail4.detail());
    r.check("early hitting probability below e t / thit", early.ok(), early.detail());
    return r;
}

Report check_survival_bounds() {
    Report r;
    r.name = "survival bounds";
    Tally sub, zan, prim;
    for (int L = 1; L <= 6; ++L)
        for (double q : kGridQ) {
            ModelParams mp(L, q);
            std::string at = fmt_point(L, q);
            const auto& t = timescales_cached(L, q);
            exact::SurvivalCurve S(mp, ones_then_zero_id(L), exact::site_is(L, L, 1));
            const double unit = t.thit / 4;
            auto v = S.on_grid(unit, 10);
            const int pts[] = {1, 2, 3, 4, 5};
            bool ok = true;
            for (int a : pts)
                for (int b : pts) ok = ok && leq(v[a + b], v[a] * v[b], 1e-10, 1e-15);
            sub.see(ok, at);
            bool okz = true;
            for (int k = 0; k <= 10; ++k) okz = okz && leq(1 - v[k], std::exp(1.0) * unit * k / t.thit, 1e-10, 1e-15);
            zan.see(okz, at);

            exact::Generator g = exact::build_generator(mp);
            exact::StateSet A = exact::site_is(L, L, 1);
            double piA = 0.0;
            for (StateId s = 0; s < g.size(); ++s) piA += A[s] ? g.pi[s] : 0.0;
            bool okp = true;
            for (StateId s = 0; s < g.size(); ++s) {
                if (A[s]) continue;
                exact::SurvivalCurve Ss(mp, s, A);
                auto u = Ss.on_grid(t.trel, 8);
                for (int k = 0; k <= 8; ++k)
                    okp = okp && leq(u[k], (1 - piA) / g.pi[s] * std::exp(-double(k) * piA), 1e-10, 1e-15);
            }
            prim.see(okp, at);
        }
    r.check("survival is submultiplicative on a 5x5 grid", sub.ok(), sub.detail());
    r.check("hitting before t has probability at most e t / E tau", zan.ok(), zan.detail());
    r.check("survival from any start bounded through the spectral gap", prim.ok(), prim.detail());
    return r;
}

Report check_monotonicity(int iterative_max_L) {
    Report r;
    r.name = "monotonicity";
    Tally trel, tmix, thit;
    for (double q : kGridQ)
        for (int L = 2; L <= 8; ++L) {
            const auto &a = timescales_cached(L - 1, q), &b = timescales_cached(L, q);
            std::string at = fmt_point(L, q);
            trel.see(leq(a.trel, b.trel, 1e-12), at);
            tmix.see(leq(a.tmix, b.tmix, 1e-9), at);
            thit.see(leq(a.thit, b.thit, 1e-12), at);
        }
    r.check("relaxation time non-decreasing in L (exact, L <= 8)", trel.ok(), trel.detail());
    r.check("mixing time non-decreasing in L (exact, L <= 8)", tmix.ok(), tmix.detail());
    r.check("hitting time non-decreasing in L (exact, L <= 8)", thit.ok(), thit.detail());
    Tally it, resid;
    for (double q : {0.2, 0.3}) {
        double prev = trel_cached(8, q);
        for (int L = 9; L <= iterative_max_L; ++L) {
            exact::EigenResult e = exact::spectral_gap(ModelParams(L, q), exact::GapMethod::Iterative);
            it.see(leq(prev, e.trel, 1e-9), fmt_point(L, q));
            resid.see(e.residual < 1e-8, fmt_point(L, q), e.residual);
            prev = e.trel;
            r.fits.push_back({"trel" + fmt_point(L, q), e.trel, "iterative eigensolver, residual " + fmt(e.residual)});
        }
    }
    r.check("relaxation time non-decreasing in L (iterative, L <= " + std::to_string(iterative_max_L) + ")", it.ok(),
            it.detail());
    r.check("iterative eigen-residual below 1e-8", resid.ok(), resid.detail());
    return r;
}

Report check_astar(int max_L) {
    Report r;
    r.name = "astar";
    Tally contains, excludes, agree;
    for (int L = 1; L <= max_L; ++L) {
        auto m = astar_bitmap(L);
        contains.see(m[ones_then_zero_id(L)] && in_Astar(Configuration::ones_then_zero(L)), "L=" + std::to_string(L));
        const long long n = 1LL << L;
        long long bad_ex = 0, bad_ag = 0;
#pragma omp parallel for schedule(static) reduction(+ : bad_ex, bad_ag)
        for (long long s = 0; s < n; ++s) {
            if (spin_bits(StateId(s), L) && m[s]) ++bad_ex;
            if (det_dynamics(Configuration(StateId(s), L)).final.bits != det_final_bits(StateId(s), L)) ++bad_ag;
        }
        excludes.see(bad_ex == 0, "L=" + std::to_string(L));
        agree.see(bad_ag == 0, "L=" + std::to_string(L));
    }
    r.check("1..10 belongs to A*", contains.ok(), contains.detail());
    r.check("A* contains no state with a particle at L", excludes.ok(), excludes.detail());
    r.check("stage-based and pass-based deterministic dynamics agree", agree.ok(), agree.detail());
    return r;
}

Report check_boundary_structure() {
    Report r;
    r.name = "boundary structure";
    Tally vac, count, paride, palla, gallo, incl, mass;
    long long members = 0;
    for (int L = 2; L <= 10; ++L) {
        const int n = ModelParams(L, 0.2).n();
        std::map<int, std::vector<std::uint64_t>> gamma;
        for (int z0 = 1; z0 <= L; ++z0) gamma[z0] = enumerate_Gamma(z0, n, L);
        auto bd = boundary_Astar(L);
        members += (long long)bd.size();
        for (const auto& b : bd) {
            Configuration eta(b.state, L);
            const std::uint64_t zp = ((~b.state & all_ones(L)) << 1) | 1u;
            for (int z0 : b.witnesses) {
                std::string at = eta.str() + "@" + std::to_string(z0);
                DeltaChain ch = delta_chain(eta, z0);
                std::uint64_t pts = 0;
                for (int z : ch.z) pts |= std::uint64_t(1) << z;
                vac.see((zp & ~(std::uint64_t(1) << z0) & ~pts) == 0, at);
                count.see(std::popcount(pts & (all_ones(L) << 1)) == ch.K - 1 && ch.K >= n + 1 &&
                              L - std::popcount(b.state) == (eta.spin(z0) ? ch.K - 1 : ch.K),
                          at);
                int sum = 1;
                bool okp = ch.z[0] == z0 - 1 && ch.intervals.back() == std::make_pair(0, L), okl = true;
                for (int k = 1; k < ch.K; ++k) {
                    okp = okp && ch.d[k] <= sum;
                    sum += ch.d[k];
                    auto [a, c] = ch.intervals[k];
                    okl = okl && c - a == sum && c - a <= (1 << k);
                }
                paride.see(okp, at);
                palla.see(okl, at);
                bool okg = true;
                for (int a = 0; a <= z0 - 1; ++a)
                    for (int c = z0; c <= L; ++c) okg = okg && interval_has_flanking_vacancy(eta, a, c);
                gallo.see(okg, at);
                bool covered = false;
                for (std::uint64_t W : gamma[z0])
                    if (((W & (all_ones(L) << 1)) & ~zp) == 0) covered = true;
                incl.see(covered, at);
            }
        }
        for (double q : kGridQ) {
            ModelParams mp(L, q);
            auto ms = boundary_mass_by_site(bd, mp);
            for (auto& [z0, m] : ms) {
                double bound = std::pow(q, n + 1) * double(gamma[z0].size());
                mass.see(leq(m.zero, bound, 1e-12) && leq(q * m.one, bound, 1e-12), fmt_point(L, q),
                         excess(std::max(m.zero, q * m.one), bound));
            }
        }
    }
    r.check("vacancies of a boundary member lie on its delta chain", vac.ok(), vac.detail());
    r.check("delta chain has K-1 sites in [1, L] and K-1 or K vacancies", count.ok(), count.detail());
    r.check("chain distances bounded by the running sum", paride.ok(), paride.detail());
    r.check("chain interval lengths bounded by 2^(k-1)", palla.ok(), palla.detail());
    r.check("flanking vacancy exists around every witness interval", gallo.ok(), gallo.detail());
    r.check("boundary vacancies covered by an enumerated Gamma set", incl.ok(), incl.detail());
    r.check("boundary mass per witness bounded by q^(n+1) |Gamma|", mass.ok(), mass.detail());
    r.fits.push_back({"boundary_members_L2_to_10", double(members), "count of boundary states scanned"});
    return r;
}

Report check_dirichlet_of_astar() {
    Report r;
    r.name = "Dirichlet form of A*";
    Tally decomp, sharp, safe;
    for (int L = 2; L <= 10; ++L) {
        const int n = ModelParams(L, 0.2).n();
        double G = 0.0;
        for (int z0 = 1; z0 <= L; ++z0) G += double(enumerate_Gamma(z0, n, L).size());
        auto bd = boundary_Astar(L);
        auto member = astar_bitmap(L);
        for (double q : kGridQ) {
            ModelParams mp(L, q);
            std::string at = fmt_point(L, q);
            double D = dirichlet_of_indicator(member, mp);
            std::vector<double> f(member.begin(), member.end());
            double direct = exact::dirichlet_form(mp, f).value;
            double split = 0.0;
            for (auto& [z0, m] : boundary_mass_by_site(bd, mp)) split += mp.p() * m.zero + q * m.one;
            decomp.see(std::abs(split - direct) <= 1e-12 * direct && std::abs(D - direct) <= 1e-12 * direct, at);
            double rhs = std::pow(q, n + 1) * G;
            sharp.see(leq(D, rhs, 1e-12), at, excess(D, rhs));
            safe.see(leq(D, 2 * rhs, 1e-12), at, excess(D, 2 * rhs));
        }
    }
    r.check("boundary decomposition of the Dirichlet form matches the direct sum", decomp.ok(), decomp.detail());
    r.check("Dirichlet form of A* below q^(n+1) sum |Gamma|", sharp.ok(), sharp.detail());
    r.check("Dirichlet form of A* below 2 q^(n+1) sum |Gamma|", safe.ok(), safe.detail());
    for (int n = 1; n <= 6; ++n) {
        double c = double(count_d_strings(n));
        double volume = std::pow(2.0, double(binom2(n))) / std::tgamma(n + 1.0);
        r.fits.push_back({"d_strings(n=" + std::to_string(n) + ")", c, "ratio to 2^C(n,2)/n! = " + fmt(c / volume)});
    }
    return r;
}

Report check_variational_bounds() {
    Report r;
    r.name = "variational bounds";
    Tally astar, closure, random;
    std::mt19937_64 rng(20240611);
    for (int L = 2; L <= 8; ++L) {
        auto member = astar_bitmap(L);
        std::vector<std::uint8_t> z(std::size_t(1) << L, 0);
        for (StateId s : reachable_set(ones_then_zero_id(L), ModelParams(L, 0.2).n() + 1, L)) z[s] = 1;
        const bool proper = std::count(z.begin(), z.end(), 1) < (1 << L);
        for (double q : kGridQ) {
            ModelParams mp(L, q);
            std::string at = fmt_point(L, q);
            double trel = trel_cached(L, q);
            double a = bottleneck_lower_bound(mp, member);
            astar.see(leq(a, trel), at, excess(a, trel));
            if (proper) {
                double c = bottleneck_lower_bound(mp, z);
                closure.see(leq(c, trel), at, excess(c, trel));
            }
            int done = 0;
            while (done < 50) {
                std::vector<std::uint8_t> A(std::size_t(1) << L);
                double piA = 0.0;
                for (StateId s = 0; s < A.size(); ++s) {
                    A[s] = rng() % 3 == 0;
                    if (A[s]) piA += pi_of(s, mp);
                }
                if (piA <= 0.0 || piA > 0.5) continue;
                double b = bottleneck_lower_bound(mp, A);
                random.see(leq(b, trel), at, excess(b, trel));
                ++done;
            }
        }
    }
    r.check("bottleneck ratio bound of A* below relaxation time", astar.ok(), astar.detail());
    r.check("bottleneck ratio bound of the reachable closure below relaxation time", closure.ok(), closure.detail());
    r.check("bottleneck ratio bound of random sets below relaxation time", random.ok(), random.detail());
    return r;
}

Report check_reachable_sets() {
    Report r;
    r.name = "reachable sets";
    bool sizes_ok = true;
    std::string sizes;
    for (int n = 1; n <= 4; ++n) {
        auto v = V_set(n);
        sizes += (n > 1 ? "," : "") + std::to_string(v.size());
        for (StateId s : v) sizes_ok = sizes_ok && std::popcount(s) == (1 << n) - 1 - n;
    }
    r.check("every member of V_n has exactly n vacancies for n <= 4", sizes_ok, "sizes " + sizes);
    auto v2 = V_set(2);
    r.check("V_1 is the single vacancy at 1", V_set(1) == std::vector<StateId>{Configuration::parse("0").bits});
    r.check("V_2 is {001, 100}", std::set<StateId>(v2.begin(), v2.end()) ==
                                     std::set<StateId>{Configuration::parse("001").bits, Configuration::parse("100").bits});
    const int L = 5;
    std::vector<std::uint8_t> member(std::size_t(1) << L, 0);
    for (StateId s : reachable_set(ones_then_zero_id(L), 3, L)) member[s] = 1;
    auto bd = inner_boundary(member, L);
    auto u2 = U_set(2, L);
    std::vector<StateId> expect{Configuration::parse("00110").bits, Configuration::parse("10010").bits};
    std::sort(expect.begin(), expect.end());
    std::sort(u2.begin(), u2.end());
    std::sort(bd.begin(), bd.end());
    r.check("boundary of the 3-vacancy closure of 1..10 equals U_2 at L=5", bd == u2 && u2 == expect);
    bool mass = true;
    for (int n = 1; n <= 4; ++n) {
        ModelParams mp(1 << n, 0.2);
        double m = 0.0;
        for (StateId u : U_set(n, 1 << n)) m += pi_of(u, mp);
        double e = std::pow(0.2, n + 1) * std::pow(0.8, (1 << n) - n - 1) * double(V_set(n).size());
        mass = mass && std::abs(m - e) <= 1e-14 * e;
    }
    r.check("mass of U_n equals q^(n+1) p^(L-n-1) |V_n|", mass);
    return r;
}

Report check_block_ladder() {
    Report r;
    r.name = "block ladder";
    r.check("lengths (3, 5, 8) at r = 3", block_ladder(3, 0.2).ell == std::vector<long long>{3, 5, 8});
    Tally uni;
    for (int rr = 3; rr <= 20; ++rr) {
        BlockLadder bl = block_ladder(rr, 0.2);
        for (int i = 1; i <= rr; ++i) {
            double l = double(bl.ell[i - 1]);
            uni.see(std::pow(2.0 * (1 - 1.0 / rr), i) <= l && l <= std::pow(2.0, i + 1),
                    "(r=" + std::to_string(rr) + ", i=" + std::to_string(i) + ")");
        }
    }
    r.check("ladder lengths between (2(1-1/r))^i and 2^(i+1)", uni.ok(), uni.detail());
    Tally sir;
    for (double q : {0.1, 0.2, 0.3}) {
        BlockLadder bl = block_ladder(3, q);
        double lo = trel_cached(3, q), hi = trel_cached(5, q);
        sir.see(leq(hi, bl.factor[0] * lo), "q=" + fmt(q), excess(hi, bl.factor[0] * lo));
    }
    r.check("relaxation time at 5 within 2/(1-sqrt(eps)) of relaxation time at 3", sir.ok(), sir.detail());
    return r;
}

Report check_potential_theory() {
    Report r;
    r.name = "potential theory";
    Tally ident, sand, cconst, energy;
    int literal_fail = 0, literal_total = 0;
    for (int L = 1; L <= 8; ++L)
        for (double q : kGridQ) {
            ModelParams mp(L, q);
            std::string at = fmt_point(L, q);
            exact::StateSet B = exact::site_is(L, L, 1);
            auto ic = network::hitting_capacity_identity(mp, ones_then_zero_id(L), B);
            ident.see(ic.residual < 1e-8, at, ic.residual);
            auto s = network::cicerchie(mp);
            sand.see(leq(s.lower_exact, s.product, 1e-10) && leq(s.product, s.upper, 1e-10), at);
            if (s.gamma > 0.0 && s.gamma <= 1.0) {
                cconst.see(leq(s.lower_const, s.lower_exact, 1e-12), at);
                ++literal_total;
                literal_fail += !leq(s.lower_literal, s.product, 1e-10);
            }
            exact::StateSet A(std::size_t(1) << L, 0);
            A[ones_then_zero_id(L)] = 1;
            network::Flow th = network::equilibrium_flow(mp, A, B);
            double e = network::flow_energy(network::Network(mp), th);
            double R = network::resistance(mp, A, B);
            energy.see(std::abs(e - R) <= 1e-8 * R, at, std::abs(e / R - 1));
        }
    r.check("mean hitting time equals capacity-weighted harmonic mass", ident.ok(), ident.detail());
    r.check("q p^(L-1) <= thit * capacity <= q", sand.ok(), sand.detail());
    r.check("constant (1/2)^(2^gamma) below p^(L-1) when L <= 1/q", cconst.ok(), cconst.detail());
    r.check("equilibrium flow energy equals effective resistance", energy.ok(), energy.detail());
    r.fits.push_back({"literal_constant_failures", double(literal_fail),
                      "grid points with L <= 1/q where q (1/2)^(1/2^gamma) exceeds thit * capacity, out of " +
                          std::to_string(literal_total)});
    Tally unit, rec;
    for (double q : {0.1, 0.2, 0.3}) {
        auto rep = network::resit_construction(1, 3, q);
        bool ok = rep.theta_check.ok(1e-12);
        for (const auto& c : rep.partial_checks) ok = ok && c.ok(1e-12);
        for (const auto& c : rep.theta_j_checks) ok = ok && c.ok(1e-12);
        unit.see(ok, "q=" + fmt(q), rep.theta_check.max_div_off);
        rec.see(leq(rep.R_next, rep.energy, 1e-10) && leq(rep.energy, rep.bound, 1e-10), "q=" + fmt(q),
                excess(rep.R_next, rep.bound));
        r.fits.push_back({"resit_slack(q=" + fmt(q) + ")", rep.bound / rep.R_next, "bound divided by exact R_2"});
    }
    r.check("recursive flow is a unit flow from all ones to B_5", unit.ok(), unit.detail());
    r.check("R_2 <= energy <= 4 R_1 + 6 R_1 / (q N)", rec.ok(), rec.detail());
    return r;
}

Report check_monte_carlo() {
    Report r;
    r.name = "Monte Carlo";
    ModelParams mp(6, 0.2);
    auto hs = hitting_trials(Configuration::ones_then_zero(6), HitTarget{6, 1}, mp, 606, 20000);
    std::vector<double> t;
    bool capped = false;
    for (const auto& h : hs) t.push_back(h.time), capped = capped || h.capped;
    MeanSe m = mean_se(t);
    double T = exact::T_hit(mp);
    r.check("Monte Carlo hitting mean within 4 standard errors (L=6, q=0.2)", !capped && std::abs(m.mean - T) <= 4 * m.se,
            "mc " + fmt(m.mean) + " +- " + fmt(m.se) + ", exact " + fmt(T));
    ModelParams m8(8, 0.2);
    long long viol = 0, checks = 0;
    bool order = true;
    for (std::uint64_t s = 0; s < 100; ++s) {
        NoiseField nf(m8, derive_seed(808, s));
        CouplingReport cr = couple_all(m8, nf, 1e5);
        viol += cr.violations;
        checks += cr.checks;
        order = order && cr.coupled_time <= cr.tau[7];
    }
    r.check("shared-noise coupling has no violations (L=8, 100 seeds)", viol == 0,
            std::to_string(checks) + " state checks");
    r.check("all starts coalesce by the first legal ring at L", order);
    return r;
}

Report check_desk_scale_trends() {
    Report r;
    r.name = "desk-scale trends";
    r.absorb(scenario_separation(default_grid("separation")));
    r.absorb(scenario_exponential_law(default_grid("exponential_law")));
    r.absorb(scenario_heterogeneity(default_grid("heterogeneity")));
    return r;
}

Report check_core() {
    Report r;
    r.name = "core";
    Tally norm, inv, db;
    for (int L = 1; L <= 12; ++L) {
        ModelParams mp(L, 0.3);
        double tot = 0.0;
        for (StateId s = 0; s < (StateId(1) << L); ++s) tot += weight(decode(s, L), mp);
        norm.see(std::abs(tot - 1.0) < 1e-12, "L=" + std::to_string(L));
    }
    for (int L = 1; L <= 10; ++L) {
        bool ok = true;
        for (StateId s = 0; s < (StateId(1) << L); ++s) {
            Configuration e = decode(s, L);
            ok = ok && encode(e) == s && Configuration::parse(e.str()) == e;
            for (int x = 1; x <= L; ++x) ok = ok && flip(flip(e, x), x) == e;
        }
        inv.see(ok, "L=" + std::to_string(L));
    }
    for (int L = 1; L <= 8; ++L) {
        ModelParams mp(L, 0.2);
        double worst = 0.0;
        for (StateId s = 0; s < (StateId(1) << L); ++s) {
            Configuration e = decode(s, L);
            for (const auto& t : transitions(e, mp)) {
                double back = 0.0;
                for (const auto& u : transitions(t.target, mp))
                    if (u.target == e) back = u.rate;
                worst = std::max(worst, std::abs(weight(e, mp) * t.rate - weight(t.target, mp) * back));
            }
        }
        db.see(worst < 1e-14, "L=" + std::to_string(L), worst);
    }
    r.check("stationary weights sum to one", norm.ok(), norm.detail());
    r.check("flip is an involution and encoding is a bijection", inv.ok(), inv.detail());
    r.check("detailed balance", db.ok(), db.detail());
    return r;
}

Report check_flows() {
    Report r;
    r.name = "flows";
    Tally div, thomson, rec;
    std::mt19937_64 rng(77);
    for (int L = 2; L <= 6; ++L) {
        ModelParams mp(L, 0.2);
        exact::StateSet A(std::size_t(1) << L, 0), B = exact::site_is(L, L, 1);
        A[ones_then_zero_id(L)] = 1;
        network::Flow th = network::equilibrium_flow(mp, A, B);
        auto fc = network::check_unit_flow(th, A, B, L);
        div.see(fc.max_div_off < 1e-12 && fc.ok(1e-10), "L=" + std::to_string(L), fc.max_div_off);
        network::Network net(mp);
        double e = network::flow_energy(net, th);
        if (L <= 5)
            for (int k = 0; k < 50; ++k) {
                network::Flow f;
                StateId s = ones_then_zero_id(L);
                while (!B[s]) {
                    StateId lg = legal_mask(s, L);
                    int pick = int(rng() % std::popcount(lg));
                    while (pick--) lg &= lg - 1;
                    StateId t = s ^ (lg & (~lg + 1));
                    f.add(s, t, 1.0);
                    s = t;
                }
                thomson.see(network::flow_energy(net, f) >= e * (1 - 1e-10), "L=" + std::to_string(L));
            }
    }
    for (int i = 1; i <= 2; ++i)
        for (double q : {0.1, 0.2, 0.3}) {
            auto rep = network::resit_construction(i, 3, q);
            rec.see(rep.theta_check.ok(1e-12) && leq(rep.R_next, rep.energy, 1e-10) && leq(rep.energy, rep.bound, 1e-10),
                    "(i=" + std::to_string(i) + ", q=" + fmt(q) + ")");
        }
    r.check("equilibrium flow is divergence free off source and sink", div.ok(), div.detail());
    r.check("path flows carry at least the equilibrium energy", thomson.ok(), thomson.detail());
    r.check("recursive flow certified at ell 3->5 and 5->8", rec.ok(), rec.detail());
    return r;
}

Report check_capacity() {
    Report r;
    r.name = "capacity";
    r.absorb(check_two_state_anchors());
    Tally sym, mono, hat;
    std::mt19937_64 rng(5);
    for (int k = 0; k < 20; ++k) {
        int L = 2 + int(rng() % 5);
        ModelParams mp(L, 0.2);
        const std::size_t n = std::size_t(1) << L;
        exact::StateSet A(n, 0), B(n, 0);
        A[0] = 1;
        B[n - 1] = 1;
        for (std::size_t s = 1; s + 1 < n; ++s) {
            auto u = rng() % 5;
            A[s] = u == 0;
            B[s] = u == 1;
        }
        double ab = network::capacity(mp, A, B), ba = network::capacity(mp, B, A);
        sym.see(std::abs(ab - ba) <= 1e-8 * ab, "L=" + std::to_string(L));
    }
    for (double q : {0.1, 0.3}) {
        ModelParams mp(8, q);
        exact::StateSet A(256, 0);
        A[255] = 1;
        std::vector<double> R;
        for (int l = 1; l <= 8; ++l) R.push_back(network::resistance(mp, A, network::B_set(8, l)));
        for (int l = 1; l < 8; ++l) mono.see(leq(R[l - 1], R[l], 1e-10), "q=" + fmt(q));
        for (int L = 1; L <= 8; ++L) {
            ModelParams m(L, q);
            exact::StateSet a(std::size_t(1) << L, 0);
            a[all_ones(L)] = 1;
            hat.see(leq(exact::hat_tau_mean(m), network::resistance(m, a, network::B_set(L, L)), 1e-10), fmt_point(L, q));
        }
    }
    r.check("capacity is symmetric in its arguments", sym.ok(), sym.detail());
    r.check("resistance to B_ell non-decreasing in ell", mono.ok(), mono.detail());
    r.check("mean vacancy time at L below resistance to B_L", hat.ok(), hat.detail());
    r.absorb(check_potential_theory());
    return r;
}

Report verify(const std::string& suite) {
    Report r;
    r.name = "verify " + suite;
    auto one = [&](const std::string& s) {
        if (s == "core") r.absorb(check_core());
        if (s == "coupling") r.absorb(check_monte_carlo());
        if (s == "equo") {
            r.absorb(check_time_scale_chain());
            r.absorb(check_two_state_anchors());
            r.absorb(check_monotonicity());
        }
        if (s == "dominare") {
            r.absorb(check_hitting_comparisons());
            r.absorb(check_survival_bounds());
        }
        if (s == "paletti") {
            r.absorb(scenario_paletti(default_grid("paletti")));
            r.absorb(check_variational_bounds());
            r.absorb(check_block_ladder());
        }
        if (s == "astar") r.absorb(check_astar());
        if (s == "gamma") {
            r.absorb(check_boundary_structure());
            r.absorb(check_dirichlet_of_astar());
            r.absorb(check_reachable_sets());
        }
        if (s == "flows") r.absorb(check_flows());
        if (s == "capacity") r.absorb(check_capacity());
    };
    const auto suites = suite_names();
    if (suite == "all") {
        for (const auto& s : suites)
            if (s != "all") one(s);
    } else if (std::find(suites.begin(), suites.end(), suite) != suites.end()) {
        one(suite);
    } else {
        throw std::invalid_argument("unknown suite: " + suite);
    }
    return r;
}

}  // namespace eastlab::lab
