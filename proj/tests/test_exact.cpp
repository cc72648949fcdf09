#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "eastlab/exact.hpp"

using namespace eastlab;
using namespace eastlab::exact;

namespace {
const double kQs[] = {0.05, 0.1, 0.2, 0.3, 0.4};

const TimescaleReport& cached(int L, double q) {
    static std::map<std::pair<int, double>, TimescaleReport> memo;
    auto key = std::make_pair(L, q);
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, timescales(ModelParams(L, q))).first;
    return it->second;
}
}  // namespace

TEST_CASE("generator entries") {
    Generator g1 = build_generator(ModelParams(1, 0.3));
    CHECK(g1.size() == 2);
    CHECK(g1.rate(0, 1) == doctest::Approx(0.7));
    CHECK(g1.rate(1, 0) == doctest::Approx(0.3));

    Generator g2 = build_generator(ModelParams(2, 0.3));
    CHECK(g2.rate(3, 2) == doctest::Approx(0.3));
    CHECK(g2.rate(3, 1) == 0.0);
    CHECK(g2.hold[3] == doctest::Approx(0.3));

    ModelParams m5(5, 0.2);
    auto Q = build_generator(m5).sparse();
    long nnz_off = 0;
    for (int k = 0; k < Q.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(Q, k); it; ++it)
            if (it.row() != it.col() && it.value() != 0.0) ++nnz_off;
    long expect = 0;
    for (StateId s = 0; s < 32; ++s) expect += std::popcount(legal_mask(s, 5));
    CHECK(nnz_off == expect);

    Eigen::MatrixXd D = build_generator(m5).dense();
    CHECK(D.rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
    Eigen::MatrixXd S = build_generator(m5).dense_symmetrized();
    CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    Generator g5 = build_generator(m5);
    double worst = 0.0;
    for (StateId s = 0; s < 32; ++s)
        for (StateId t = 0; t < 32; ++t)
            worst = std::max(worst, std::abs(g5.pi[s] * g5.rate(s, t) - g5.pi[t] * g5.rate(t, s)));
    CHECK(worst < 1e-14);
    CHECK_THROWS_AS(build_generator(ModelParams(25, 0.2)), CapExceeded);
}

TEST_CASE("relaxation time") {
    for (double q : kQs) CHECK(relaxation_time(ModelParams(1, q)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(relaxation_time(ModelParams(5, 0.2)) >= relaxation_time(ModelParams(3, 0.2)));

    ModelParams m(6, 0.25);
    EigenResult er = spectral_gap(m);
    Eigen::MatrixXd S = build_generator(m).dense_symmetrized();
    const Eigen::VectorXd& v = er.vector;
    double rq = v.dot(S * v) / v.squaredNorm();
    CHECK(std::abs(rq - er.gap) < 1e-10);
    CHECK(er.residual < 1e-10);
}

TEST_CASE("dense and iterative gap agree") {
    for (int L : {6, 9}) {
        ModelParams m(L, 0.15);
        double a = spectral_gap(m, GapMethod::Dense).gap;
        EigenResult b = spectral_gap(m, GapMethod::Iterative);
        CHECK(std::abs(a - b.gap) <= 1e-10 * a);
        CHECK(b.method == "iterative-eigen");
    }
}

TEST_CASE("hitting times") {
    ModelParams m(1, 0.3);
    CHECK(T_hit(m) == doctest::Approx(1.0 / 0.7).epsilon(1e-12));
    CHECK(mean_hitting_time(m, 0, site_is(1, 1, 1)) == doctest::Approx(1.428571428571).epsilon(1e-11));
    double lhs = std::pow(0.7, 1) * T_hit(m);
    CHECK(std::abs(lhs - relaxation_time(m)) < 1e-12);

    for (int L = 2; L <= 8; ++L)
        for (double q : {0.1, 0.2, 0.3}) {
            ModelParams mp(L, q), mm(L - 1, q);
            CHECK(hat_tau_mean(mm) <= T_hit(mp));
            CHECK(T_hit(mp) <= 5.0 * hat_tau_mean(mm));
        }
    HittingResult hr = hitting_times(ModelParams(7, 0.2), site_is(7, 7, 1));
    CHECK(hr.residual < 1e-10);
}

TEST_CASE("survival curve") {
    ModelParams m(1, 0.3);
    StateSet tgt = site_is(1, 1, 1);
    CHECK(survival(m, 0, tgt, 0.0) == doctest::Approx(1.0));
    CHECK(std::abs(survival(m, 0, tgt, 1.0) - std::exp(-0.7)) < 1e-12);
    CHECK(std::abs(quantile_time(m) - std::log(4.0) / 0.7) < 1e-8);

    for (int L = 2; L <= 6; ++L) {
        ModelParams mp(L, 0.2);
        SurvivalCurve S(mp, ones_then_zero_id(L), site_is(L, L, 1));
        double T = T_hit(mp);
        std::vector<double> grid;
        for (int i = 1; i <= 5; ++i) grid.push_back(0.3 * i * T);
        for (double t : grid)
            for (double s : grid) REQUIRE(S(t + s) <= S(t) * S(s) * (1 + 1e-10) + 1e-14);
    }
}

TEST_CASE("mixing time closed form") {
    ModelParams m(1, 0.3);
    CHECK(std::abs(mixing_time(m) - std::log(2.8)) < 1e-8);
    MixingResult r = mixing(m);
    CHECK(r.worst_start == 0);
    CHECK(std::abs(tv_distance(m, r.tmix) - 0.25) < 1e-8);
}

TEST_CASE("dirichlet form") {
    ModelParams m(5, 0.3);
    std::vector<double> c(32, 2.5);
    CHECK(dirichlet_form(m, c).value == doctest::Approx(0.0));
    CHECK(variance(m, c) == doctest::Approx(0.0));

    std::vector<double> ind(32, 0.0);
    StateId a = ones_then_zero_id(5);
    ind[a] = 1.0;
    Generator g = build_generator(m);
    double boundary = 0.0;
    for (StateId t = 0; t < 32; ++t)
        if (t != a) boundary += g.pi[a] * g.rate(a, t);
    DirichletValue dv = dirichlet_form(m, ind);
    CHECK(std::abs(dv.value - boundary) < 1e-15);
    CHECK(std::abs(dv.via_rates - dv.via_conditional_variance) < 1e-15);

    std::mt19937_64 rng(17);
    std::normal_distribution<double> nd;
    for (int L = 2; L <= 6; ++L) {
        ModelParams mp(L, 0.2);
        double gap = spectral_gap(mp).gap;
        double best = 1e300;
        std::vector<double> f(std::size_t(1) << L);
        for (int it = 0; it < 200; ++it) {
            for (auto& x : f) x = nd(rng);
            best = std::min(best, dirichlet_form(mp, f).value / variance(mp, f));
        }
        CHECK(best >= gap - 1e-9);
    }
}

TEST_CASE("time scale chain on the grid") {
    int failures = 0;
    for (int L = 1; L <= 8; ++L)
        for (double q : kQs) {
            const auto& r = cached(L, q);
            CAPTURE(L);
            CAPTURE(q);
            CHECK(std::pow(1 - q, L) * r.thit <= r.trel * (1 + 1e-9));
            CHECK(r.tmix <= 4 * r.thit);
            CHECK(r.tquant >= 0.25 * r.thit);
            CHECK(r.tquant <= 4 * r.thit);
            CHECK(r.tquant >= r.tmix);
            // holds for every reversible chain at threshold 1/4
            CHECK(r.tmix >= std::log(2.0) * r.trel * (1 - 1e-9));
            if (r.trel > r.tmix * (1 + 1e-9)) ++failures;
            if (L > 1) {
                const auto& s = cached(L - 1, q);
                CHECK(r.trel >= s.trel * (1 - 1e-12));
                CHECK(r.tmix >= s.tmix * (1 - 1e-9));
                CHECK(r.thit >= s.thit);
            }
        }
    // Two-state chain at q = 0.4: tmix = ln(4p) = ln 2.4 < 1 = trel.
    const auto& two = cached(1, 0.4);
    CHECK(std::abs(two.tmix - std::log(2.4)) < 1e-8);
    CHECK(two.tmix < two.trel);
    CHECK(failures == 1);
}

TEST_CASE("survival tail bounds") {
    for (int L = 2; L <= 7; ++L)
        for (double q : {0.1, 0.3}) {
            ModelParams mp(L, q);
            const auto& r = cached(L, q);
            SurvivalCurve S(mp, ones_then_zero_id(L), site_is(L, L, 1));
            for (int i = 0; i <= 40; ++i) {
                double t = r.tquant * 0.15 * i;
                REQUIRE(S(t) <= std::pow(0.25, std::floor(t / r.tquant)) + 1e-9);
                REQUIRE(1 - S(t) <= std::exp(1.0) * t / r.thit + 1e-12);
            }
        }
}

TEST_CASE("hitting tail from spectral gap") {
    for (int L = 2; L <= 6; ++L) {
        ModelParams mp(L, 0.2);
        Generator g = build_generator(mp);
        double trel = relaxation_time(mp);
        StateSet A = site_is(L, L, 1);
        double piA = 0.0;
        for (StateId s = 0; s < g.size(); ++s) piA += A[s] ? g.pi[s] : 0.0;
        for (StateId s = 0; s < g.size(); ++s) {
            if (A[s]) continue;
            SurvivalCurve S(mp, s, A);
            for (int i = 0; i <= 10; ++i) {
                double t = trel * i;
                REQUIRE(S(t) <= (1 - piA) / g.pi[s] * std::exp(-t * piA / trel) + 1e-12);
            }
        }
    }
}

TEST_CASE("quantile is the inverse of survival") {
    ModelParams mp(6, 0.2);
    SurvivalCurve S(mp, ones_then_zero_id(6), site_is(6, 6, 1));
    for (double lv : {0.9, 0.5, 0.25, 0.05}) {
        double t = S.quantile(lv);
        CHECK(std::abs(S(t) - lv) < 1e-8);
    }
}
