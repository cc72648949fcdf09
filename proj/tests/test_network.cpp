#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>

#include "eastlab/bottleneck.hpp"
#include "eastlab/network.hpp"

using namespace eastlab;
using namespace eastlab::network;

namespace {
StateSet single(int L, StateId s) {
    StateSet A(std::size_t(1) << L, 0);
    A[s] = 1;
    return A;
}

// unit flow from a to B made of random walk paths
Flow random_path_flow(int L, StateId a, const StateSet& B, std::mt19937_64& rng, int paths) {
    Flow f;
    for (int k = 0; k < paths; ++k) {
        StateId s = a;
        while (!B[s]) {
            StateId lg = legal_mask(s, L);
            int c = std::popcount(lg);
            int pick = int(rng() % c);
            while (pick--) lg &= lg - 1;
            StateId t = s ^ (lg & (~lg + 1));
            f.add(s, t, 1.0 / paths);
            s = t;
        }
    }
    return f;
}

// feasible test function: 1 on A, 0 on B, random elsewhere
std::vector<double> random_feasible(const StateSet& A, const StateSet& B, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.5, 1.5);
    std::vector<double> g(A.size());
    for (std::size_t s = 0; s < g.size(); ++s) g[s] = A[s] ? 1.0 : B[s] ? 0.0 : u(rng);
    return g;
}
}  // namespace

TEST_CASE("conductances are symmetric") {
    for (int L = 1; L <= 7; ++L) {
        Network net(ModelParams(L, 0.27));
        for (StateId s = 0; s < (StateId(1) << L); ++s)
            for (int x = 1; x <= L; ++x) {
                StateId t = s ^ (StateId(1) << (x - 1));
                REQUIRE(net.has_edge(s, t) == net.has_edge(t, s));
                REQUIRE(std::abs(net.conductance(s, t) - net.conductance(t, s)) < 1e-16);
            }
        CHECK(net.conductance(0, 3) == 0.0);
    }
}

TEST_CASE("flow storage is antisymmetric") {
    Flow f;
    f.add(5, 2, 0.75);
    CHECK(f.value(5, 2) == 0.75);
    CHECK(f.value(2, 5) == -0.75);
    f.add(2, 5, 0.25);
    CHECK(f.value(5, 2) == 0.5);
    CHECK(f.edges().size() == 1);
    CHECK(f.edges().begin()->first == std::make_pair(StateId(2), StateId(5)));
    CHECK((f * 2.0).value(5, 2) == 1.0);
    CHECK((f + f).value(2, 5) == -1.0);
    CHECK(f.export_edges() == "2 5 -0.5\n");
    CHECK_THROWS_AS(f.add(1, 1, 1.0), std::invalid_argument);
}

TEST_CASE("two-state network") {
    ModelParams mp(1, 0.3);
    StateSet A = single(1, 0), B = single(1, 1);
    CapacityResult cr = capacity_both(mp, A, B);
    CHECK(std::abs(cr.jump_chain - 0.21) < 1e-15);
    CHECK(std::abs(cr.dirichlet - 0.21) < 1e-15);
    Potential pot = harmonic_potential(mp, A, B);
    CHECK(pot.f[0] == 1.0);
    CHECK(pot.f[1] == 0.0);
    Flow th = equilibrium_flow(mp, A, B);
    CHECK(std::abs(th.value(0, 1) - 1.0) < 1e-15);
    CHECK(std::abs(flow_energy(Network(mp), th) - 1.0 / 0.21) < 1e-12);
    IdentityCheck ic = hitting_capacity_identity(mp, 0, B);
    CHECK(std::abs(ic.lhs - 1.0 / 0.7) < 1e-12);
    CHECK(std::abs(ic.rhs - 1.0 / 0.7) < 1e-12);
    CHECK_THROWS_AS(capacity(mp, A, A), std::invalid_argument);
}

TEST_CASE("capacity is symmetric and both routes agree") {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 20; ++k) {
        int L = 2 + int(rng() % 5);
        ModelParams mp(L, 0.1 + 0.3 * double(rng() % 100) / 100.0);
        const std::size_t n = std::size_t(1) << L;
        StateSet A(n, 0), B(n, 0);
        for (std::size_t s = 0; s < n; ++s) {
            auto r = rng() % 6;
            if (r == 0) A[s] = 1;
            if (r == 1) B[s] = 1;
        }
        A[rng() % (n / 2)] = 1;
        std::size_t b = n / 2 + rng() % (n / 2);
        A[b] = 0;
        B[b] = 1;
        for (std::size_t s = 0; s < n; ++s)
            if (A[s]) B[s] = 0;
        double ab = capacity(mp, A, B), ba = capacity(mp, B, A);
        CAPTURE(L);
        CHECK(std::abs(ab - ba) <= 1e-8 * ab);
    }
}

TEST_CASE("Dirichlet and Thomson principles") {
    std::mt19937_64 rng(4);
    for (int L = 2; L <= 6; ++L) {
        ModelParams mp(L, 0.2);
        StateSet A = single(L, ones_then_zero_id(L));
        StateSet B = exact::site_is(L, L, 1);
        Potential pot = harmonic_potential(mp, A, B);
        CHECK(pot.residual < 1e-10);
        double cap = capacity(mp, A, B);
        CHECK(std::abs(exact::dirichlet_form(mp, pot.f).value - cap) <= 1e-8 * cap);
        for (double v : pot.f) REQUIRE((v >= -1e-12 && v <= 1 + 1e-12));
        for (int k = 0; k < 100; ++k) REQUIRE(exact::dirichlet_form(mp, random_feasible(A, B, rng)).value >= cap * (1 - 1e-10));

        Flow th = equilibrium_flow(mp, A, B);
        FlowCheck fc = check_unit_flow(th, A, B, L);
        CHECK(fc.max_div_off < 1e-12);
        CHECK(fc.ok(1e-10));
        Network net(mp);
        double e = flow_energy(net, th);
        CHECK(std::abs(e - 1.0 / cap) <= 1e-8 / cap);
        if (L <= 5)
            for (int k = 0; k < 50; ++k) {
                Flow g = random_path_flow(L, ones_then_zero_id(L), B, rng, 3);
                REQUIRE(check_unit_flow(g, A, B, L).ok(1e-12));
                REQUIRE(flow_energy(net, g) >= e * (1 - 1e-10));
            }
    }
}

TEST_CASE("flow energy algebra") {
    ModelParams mp(5, 0.3);
    Network net(mp);
    CHECK(flow_energy(net, Flow{}) == 0.0);
    std::mt19937_64 rng(8);
    StateSet B = exact::site_is(5, 5, 1);
    StateSet A = single(5, ones_then_zero_id(5));
    for (int k = 0; k < 20; ++k) {
        Flow a = random_path_flow(5, ones_then_zero_id(5), B, rng, 1);
        Flow b = random_path_flow(5, ones_then_zero_id(5), B, rng, 1);
        Flow c = random_path_flow(5, ones_then_zero_id(5), B, rng, 1);
        double ea = flow_energy(net, a), eb = flow_energy(net, b), ec = flow_energy(net, c);
        CHECK(std::abs(flow_energy(net, a * 2.5) - 6.25 * ea) <= 1e-12 * ea);
        CHECK(flow_energy(net, (a + b + c) * (1.0 / 3)) <= std::max({ea, eb, ec}) * (1 + 1e-12));
        CHECK(flow_energy(net, a + b) <= 2 * (ea + eb) * (1 + 1e-12));
        CHECK(check_unit_flow((a + b + c) * (1.0 / 3), A, B, 5).ok());
    }
    Flow x, y;
    x.add(0, 1, 0.5);
    y.add(1, 5, -1.5);
    CHECK(std::abs(flow_energy(net, x + y) - flow_energy(net, x) - flow_energy(net, y)) < 1e-12);
    Flow bad;
    bad.add(0, 3, 1.0);
    CHECK_THROWS_AS(flow_energy(net, bad), std::invalid_argument);
}

TEST_CASE("hitting time and capacity identity") {
    for (int L = 1; L <= 8; ++L)
        for (double q : {0.05, 0.1, 0.2, 0.3, 0.4}) {
            ModelParams mp(L, q);
            IdentityCheck ic = hitting_capacity_identity(mp, ones_then_zero_id(L), exact::site_is(L, L, 1));
            REQUIRE(ic.residual < 1e-8);
        }
    ModelParams mp(4, 0.2);
    StateId a = 5;
    StateSet B(16, 1);
    B[a] = 0;
    IdentityCheck ic = hitting_capacity_identity(mp, a, B);
    CHECK(std::abs(ic.lhs - 1.0 / holding_rate_bits(a, 4, 0.2)) < 1e-12);
    CHECK(ic.residual < 1e-8);
}

TEST_CASE("hitting time sandwich by capacity") {
    for (int L = 1; L <= 8; ++L)
        for (double q : {0.05, 0.1, 0.2, 0.3, 0.4}) {
            Sandwich s = cicerchie(ModelParams(L, q));
            CAPTURE(L);
            CAPTURE(q);
            CHECK(s.product <= s.upper * (1 + 1e-10));
            CHECK(s.lower_exact <= s.product * (1 + 1e-10));
            if (s.gamma <= 1.0) CHECK(s.lower_const <= s.lower_exact * (1 + 1e-12));
        }
}

TEST_CASE("shift maps and index sets") {
    const int L = 8;
    for (int ell = 1; ell <= L; ++ell) {
        StateSet B = B_set(L, ell), Cs = C_set(L, ell);
        for (StateId s = 0; s < 256; ++s) {
            REQUIRE(bool(B[s]) == (!spin_bits(s, ell) && (s >> ell) == (all_ones(L) >> ell)));
            REQUIRE(bool(Cs[s]) == (!spin_bits(s, ell) && (s & all_ones(ell - 1)) == all_ones(ell - 1)));
            StateId t = shift_left(s, L, ell);
            if (Cs[s]) {
                // the block right of ell moves to 1..L-ell with ones filling the top
                REQUIRE((t & all_ones(L - ell)) == (s >> ell));
                REQUIRE((t >> (L - ell)) == (all_ones(L) >> (L - ell)));
                REQUIRE(shift_right(t, L, ell) == s);
            }
        }
    }
}

TEST_CASE("resistance is monotone in the sink position") {
    for (double q : {0.1, 0.3})
        for (int L = 1; L <= 8; ++L) {
            ModelParams mp(8, q);
            StateSet A = single(8, all_ones(8));
            double RL = resistance(mp, A, B_set(8, L));
            for (int ell = L; ell <= 8; ++ell) REQUIRE(RL <= resistance(mp, A, B_set(8, ell)) * (1 + 1e-10));
        }
}

TEST_CASE("mean vacancy time bounded by resistance") {
    for (int L = 1; L <= 8; ++L)
        for (double q : {0.1, 0.2, 0.3}) {
            ModelParams mp(L, q);
            double R = resistance(mp, single(L, all_ones(L)), B_set(L, L));
            CHECK(exact::hat_tau_mean(mp) <= R * (1 + 1e-10));
        }
}

TEST_CASE("recursive flow construction") {
    for (int i = 1; i <= 2; ++i)
        for (double q : {0.1, 0.2, 0.3}) {
            ResitReport r = resit_construction(i, 3, q);
            CAPTURE(i);
            CAPTURE(q);
            CHECK(r.ell_i == (i == 1 ? 3 : 5));
            CHECK(r.ell_next == (i == 1 ? 5 : 8));
            CHECK(r.theta_check.ok(1e-12));
            for (const auto& c : r.partial_checks) CHECK(c.ok(1e-12));
            for (const auto& c : r.theta_j_checks) CHECK(c.ok(1e-12));
            CHECK(r.R_next <= r.energy * (1 + 1e-10));
            CHECK(r.R_next <= r.bound);
            CHECK(r.energy <= r.bound);
        }
    CHECK_THROWS_AS(resit_construction(3, 4, 0.2), CapExceeded);
}
