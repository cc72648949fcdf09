#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>
#include <set>

#include "eastlab/bottleneck.hpp"
#include "eastlab/exact.hpp"

using namespace eastlab;

namespace {
Configuration C(const char* s) { return Configuration::parse(s); }

// vacancies over sites 0..L with bit i <-> site i
std::uint64_t zero_points(StateId s, int L) { return ((~s & all_ones(L)) << 1) | 1u; }

std::vector<Configuration> stage_run(const Configuration& eta) {
    const int L = eta.L;
    std::vector<Configuration> out{eta};
    const long long last = StageIndex{L - 1, 1}.index(L);
    for (long long k = 1; k <= last; ++k) {
        StageIndex st = StageIndex::from_index(k, L);
        out.push_back(det_step(out.back(), st.d, st.x));
    }
    return out;
}

double pi_of(StateId s, const ModelParams& mp) {
    int z = mp.L - std::popcount(s);
    return std::pow(mp.q, z) * std::pow(mp.p(), mp.L - z);
}
}  // namespace

TEST_CASE("stage order and index bijection") {
    CHECK(StageIndex{1, 3} < StageIndex{1, 2});
    CHECK(StageIndex{1, 1} < StageIndex{2, 4});
    for (int L = 1; L <= 12; ++L) {
        StageIndex prev = StageIndex::from_index(1, L);
        CHECK(prev == StageIndex{1, L});
        for (long long k = 1; k <= (long long)L * L; ++k) {
            StageIndex s = StageIndex::from_index(k, L);
            REQUIRE(s.index(L) == k);
            REQUIRE(s.d >= 1);
            REQUIRE(s.d <= L);
            REQUIRE(s.x >= 1);
            REQUIRE(s.x <= L);
            if (k > 1) REQUIRE(prev < s);
            prev = s;
        }
    }
}

TEST_CASE("det_step") {
    CHECK(det_step(C("0110"), 1, 1) == C("1110"));
    CHECK(det_step(C("0110"), 1, 4) == C("0110"));
    for (int L = 1; L <= 8; ++L)
        for (StateId s = 0; s < (StateId(1) << L); ++s)
            for (int d = 1; d <= L; ++d)
                for (int x = 1; x <= L; ++x) {
                    StateId t = det_step(Configuration(s, L), d, x).bits;
                    REQUIRE((t & s) == s);
                }
}

TEST_CASE("det_dynamics") {
    CHECK(det_dynamics(C("0110")).final == C("1110"));
    CHECK(det_dynamics(C("1100")).final == C("1111"));
    for (int L = 1; L <= 16; ++L) CHECK(det_dynamics(Configuration::ones_then_zero(L)).final.bits == ones_then_zero_id(L));
    for (int L = 1; L <= 10; ++L)
        for (StateId s = 0; s < (StateId(1) << L); ++s) REQUIRE(det_dynamics(Configuration(s, L)).final.bits == det_final_bits(s, L));
}

TEST_CASE("deterministic dynamics structural properties") {
    std::mt19937_64 rng(42);
    for (int L = 2; L <= 8; ++L) {
        const long long last = StageIndex{L - 1, 1}.index(L);
        for (StateId s = 0; s < (StateId(1) << L); ++s) {
            auto run = stage_run(Configuration(s, L));
            for (long long k = 1; k <= last; ++k) {
                const auto &before = run[k - 1], &after = run[k];
                StageIndex st = StageIndex::from_index(k, L);
                for (int y = 1; y <= L; ++y) {
                    if (after.spin(y) == 0) {
                        // a vacancy is never created and its gap never shrinks
                        REQUIRE(before.spin(y) == 0);
                        REQUIRE(gap(after, y) >= gap(before, y));
                        REQUIRE(gap(after, y) >= st.d);
                        if (y >= st.x) REQUIRE(gap(after, y) > st.d);
                    }
                }
            }
            // spins right of x never influence the run on [1, x]
            int x = 1 + int(rng() % L);
            StateId other = (s & all_ones(x)) | (rng() & all_ones(L) & ~all_ones(x));
            auto run2 = stage_run(Configuration(other, L));
            for (long long k = 0; k <= last; ++k) REQUIRE((run[k].bits & all_ones(x)) == (run2[k].bits & all_ones(x)));
            // once two runs agree they stay together
            bool met = false;
            for (long long k = 0; k <= last; ++k) {
                if (run[k] == run2[k]) met = true;
                if (met) REQUIRE(run[k] == run2[k]);
            }
        }
    }
}

TEST_CASE("A* membership") {
    CHECK(in_Astar(C("0010")));
    CHECK_FALSE(in_Astar(C("1010")));
    for (int L = 1; L <= 16; ++L) {
        auto m = astar_bitmap(L);
        REQUIRE(m[ones_then_zero_id(L)]);
        const StateId top = StateId(1) << (L - 1);
        for (StateId s = top; s < (StateId(1) << L); ++s) REQUIRE(!m[s]);
    }
    CHECK(astar_bitmap(12, false) == astar_bitmap(12, true));
    CHECK_THROWS_AS(astar_bitmap(25), CapExceeded);
}

TEST_CASE("A* boundary") {
    auto bd = boundary_Astar(4);
    bool found = false;
    for (const auto& b : bd) {
        CHECK(b.state != all_ones(4));
        if (b.state == C("0010").bits) {
            found = true;
            CHECK(std::find(b.witnesses.begin(), b.witnesses.end(), 1) != b.witnesses.end());
        }
    }
    CHECK(found);
    CHECK(boundary_Astar(10, false).size() == boundary_Astar(10, true).size());
}

TEST_CASE("delta chain example") {
    DeltaChain ch = delta_chain(C("0010"), 1);
    CHECK(ch.K == 3);
    CHECK(ch.z == std::vector<int>{0, 2, 4});
    CHECK(ch.d == std::vector<int>{1, 1, 2});
    CHECK(ch.eps == std::vector<int>{1, 1});
    CHECK(ch.intervals.back() == std::make_pair(0, 4));
    CHECK_THROWS_AS(delta_chain(C("1111"), 1), std::domain_error);
}

TEST_CASE("delta chains of every boundary member") {
    for (int L = 2; L <= 12; ++L) {
        long chains = 0;
        for (const auto& b : boundary_Astar(L)) {
            Configuration eta(b.state, L);
            for (int z0 : b.witnesses) {
                DeltaChain ch = delta_chain(eta, z0);
                ++chains;
                REQUIRE(ch.z[0] == z0 - 1);
                REQUIRE(ch.intervals[0] == std::make_pair(z0 - 1, z0));
                REQUIRE(ch.intervals.back() == std::make_pair(0, L));
                REQUIRE(ch.z[1] == z0 + 1);
                int sum = 1;
                for (int k = 1; k < ch.K; ++k) {
                    REQUIRE(ch.d[k] <= sum);
                    sum += ch.d[k];
                    auto [a, bb] = ch.intervals[k];
                    REQUIRE(bb - a == sum);
                    REQUIRE(bb - a <= (1 << k));
                }
                std::uint64_t pts = 0;
                for (int z : ch.z) pts |= std::uint64_t(1) << z;
                REQUIRE(std::popcount(pts) == ch.K);
                REQUIRE(std::popcount(pts & (all_ones(L) << 1)) == ch.K - 1);
                std::uint64_t vac = zero_points(b.state, L) & ~(std::uint64_t(1) << z0);
                REQUIRE((vac & ~pts) == 0);
                int zeros = L - std::popcount(b.state);
                REQUIRE(zeros == (eta.spin(z0) ? ch.K - 1 : ch.K));
                REQUIRE(ch.K >= ModelParams(L, 0.2).n() + 1);
            }
        }
        CHECK(chains > 0);
    }
}

TEST_CASE("flanking vacancy around every witness") {
    for (int L = 2; L <= 10; ++L)
        for (const auto& b : boundary_Astar(L)) {
            Configuration eta(b.state, L);
            for (int z : b.witnesses)
                for (int a = 0; a <= z - 1; ++a)
                    for (int bb = z; bb <= L; ++bb) REQUIRE(interval_has_flanking_vacancy(eta, a, bb));
        }
}

TEST_CASE("d-string counts") {
    CHECK(count_d_strings(1) == 1);
    CHECK(count_d_strings(2) == 2);
    CHECK(count_d_strings(3) == 7);
    // brute force over bounded strings
    for (int n = 1; n <= 5; ++n) {
        long long brute = 0;
        std::vector<int> d(n + 1, 1);
        const int cap = 1 << n;
        for (;;) {
            int sum = 1;
            bool ok = true;
            for (int k = 1; k <= n; ++k) {
                if (d[k] > sum) ok = false;
                sum += d[k];
            }
            brute += ok;
            int k = 1;
            while (k <= n && d[k] == cap) d[k++] = 1;
            if (k > n) break;
            ++d[k];
        }
        CHECK(count_d_strings(n) == brute);
    }
}

TEST_CASE("Gamma covers the boundary vacancies") {
    for (int L = 2; L <= 10; ++L) {
        const int n = ModelParams(L, 0.2).n();
        std::map<int, std::vector<std::uint64_t>> gamma;
        for (int z0 = 1; z0 <= L; ++z0) gamma[z0] = enumerate_Gamma(z0, n, L);
        for (const auto& b : boundary_Astar(L)) {
            const std::uint64_t zp = zero_points(b.state, L);
            for (int z0 : b.witnesses) {
                REQUIRE(!gamma[z0].empty());
                bool covered = false;
                for (std::uint64_t W : gamma[z0])
                    if (((W & (all_ones(L) << 1)) & ~zp) == 0) covered = true;
                REQUIRE(covered);
            }
        }
        for (const auto& [z0, g] : gamma)
            for (std::uint64_t W : g) {
                REQUIRE(std::popcount(W) == n + 1);
                REQUIRE(((W >> (z0 - 1)) & 1u) == 1u);
                REQUIRE(std::popcount(W & (all_ones(L) << 1)) >= n);
            }
    }
}

TEST_CASE("boundary mass against Gamma and the Dirichlet form of A*") {
    for (int L = 2; L <= 10; ++L)
        for (double q : {0.05, 0.1, 0.2, 0.3, 0.4}) {
            ModelParams mp(L, q);
            const int n = mp.n();
            auto bd = boundary_Astar(L);
            auto mass = boundary_mass_by_site(bd, mp);
            double decomposition = 0.0, gamma_total = 0.0;
            for (int z0 = 1; z0 <= L; ++z0) {
                double g = double(enumerate_Gamma(z0, n, L).size());
                gamma_total += g;
                SetMass m = mass.count(z0) ? mass[z0] : SetMass{};
                REQUIRE(m.zero <= std::pow(q, n + 1) * g * (1 + 1e-12));
                REQUIRE(q * m.one <= std::pow(q, n + 1) * g * (1 + 1e-12));
                decomposition += mp.p() * m.zero + q * m.one;
            }
            auto member = astar_bitmap(L);
            double direct = dirichlet_of_indicator(member, mp);
            std::vector<double> f(member.begin(), member.end());
            REQUIRE(std::abs(decomposition - direct) < 1e-12 * std::max(direct, 1e-300) + 1e-300);
            REQUIRE(std::abs(exact::dirichlet_form(mp, f).value - direct) <= 1e-12 * direct);
            REQUIRE(direct <= 2 * std::pow(q, n + 1) * gamma_total * (1 + 1e-12));
            // the sharper form without the factor 2 also holds on this range
            REQUIRE(direct <= std::pow(q, n + 1) * gamma_total * (1 + 1e-12));
        }
}

TEST_CASE("reachable sets") {
    auto v1 = V_set(1);
    CHECK(v1 == std::vector<StateId>{C("0").bits});
    auto v2 = V_set(2);
    std::set<StateId> got(v2.begin(), v2.end());
    CHECK(got == std::set<StateId>{C("001").bits, C("100").bits});
    for (int n = 1; n <= 4; ++n)
        for (StateId v : V_set(n)) REQUIRE(std::popcount(v) == (1 << n) - 1 - n);

    // n = 2, L = 5: boundary of the 3-vacancy closure of 1..10 is U_2
    const int L = 5;
    auto reach = reachable_set(ones_then_zero_id(L), 3, L);
    std::vector<std::uint8_t> member(std::size_t(1) << L, 0);
    for (StateId s : reach) member[s] = 1;
    auto bd = inner_boundary(member, L);
    auto u2 = U_set(2, L);
    CHECK(bd == u2);
    CHECK(std::set<StateId>(u2.begin(), u2.end()) == std::set<StateId>{C("00110").bits, C("10010").bits});

    for (int n = 1; n <= 4; ++n) {
        const int Ln = 1 << n;
        ModelParams mp(Ln, 0.2);
        double mass = 0.0;
        for (StateId u : U_set(n, Ln)) mass += pi_of(u, mp);
        double expect = std::pow(0.2, n + 1) * std::pow(0.8, Ln - n - 1) * double(V_set(n).size());
        CHECK(std::abs(mass - expect) <= 1e-14 * expect);
    }
    CHECK_THROWS_AS(U_set(3, 7), std::invalid_argument);
}

TEST_CASE("bottleneck lower bounds never exceed the relaxation time") {
    for (int L = 2; L <= 8; ++L)
        for (double q : {0.05, 0.1, 0.2, 0.3, 0.4}) {
            ModelParams mp(L, q);
            double trel = exact::relaxation_time(mp);
            REQUIRE(bottleneck_lower_bound(mp, astar_bitmap(L)) <= trel * (1 + 1e-10));
            std::vector<std::uint8_t> z(std::size_t(1) << L, 0);
            for (StateId s : reachable_set(ones_then_zero_id(L), mp.n() + 1, L)) z[s] = 1;
            if (std::count(z.begin(), z.end(), 1) < (1 << L)) REQUIRE(bottleneck_lower_bound(mp, z) <= trel * (1 + 1e-10));
        }
    std::mt19937_64 rng(9);
    ModelParams mp(6, 0.25);
    double trel = exact::relaxation_time(mp);
    int done = 0;
    while (done < 50) {
        std::vector<std::uint8_t> a(64);
        double piA = 0.0;
        for (StateId s = 0; s < 64; ++s) {
            a[s] = rng() % 3 == 0;
            if (a[s]) piA += pi_of(s, mp);
        }
        if (piA <= 0.0 || piA > 0.5) continue;
        REQUIRE(bottleneck_lower_bound(mp, a) <= trel * (1 + 1e-10));
        ++done;
    }
}

TEST_CASE("block ladder") {
    BlockLadder b = block_ladder(3, 0.2);
    CHECK(b.ell == std::vector<long long>{3, 5, 8});
    CHECK_THROWS_AS(block_ladder(2, 0.2), std::invalid_argument);
    for (int r = 3; r <= 20; ++r) {
        BlockLadder bl = block_ladder(r, 0.2);
        for (int i = 1; i <= r; ++i) {
            double l = double(bl.ell[i - 1]);
            REQUIRE(std::pow(2.0 * (1 - 1.0 / r), i) <= l);
            REQUIRE(l <= std::pow(2.0, i + 1));
        }
    }
    for (double q : {0.1, 0.2, 0.3}) {
        BlockLadder bl = block_ladder(3, q);
        double t3 = exact::relaxation_time(ModelParams(3, q));
        double t5 = exact::relaxation_time(ModelParams(5, q));
        CHECK(t5 <= bl.factor[0] * t3);
    }
}
