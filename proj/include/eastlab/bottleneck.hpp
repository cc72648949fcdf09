#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <vector>

#include "eastlab/core.hpp"

namespace eastlab {

struct StageIndex {
    int d = 1;
    int x = 1;

    // (d1,x1) precedes (d2,x2) iff d1 < d2, or d1 == d2 and x1 > x2
    std::strong_ordering operator<=>(const StageIndex& o) const {
        if (d != o.d) return d <=> o.d;
        return o.x <=> x;
    }
    bool operator==(const StageIndex&) const = default;

    static StageIndex from_index(long long k, int L);  // k >= 1
    long long index(int L) const;
};

Configuration det_step(const Configuration& eta, int d, int x);

struct DetRun {
    Configuration final;
    std::vector<StageIndex> fired;
};

// stage-by-stage run through (L-1, 1)
DetRun det_dynamics(const Configuration& eta);
// pass d erases every vacancy of gap d at once
StateId det_final_bits(StateId s, int L);

bool in_Astar(const Configuration& eta);

struct BoundaryMember {
    StateId state = 0;
    std::vector<int> witnesses;
};

// A* membership bitmap for all 2^L states
std::vector<std::uint8_t> astar_bitmap(int L, bool parallel = true);
std::vector<BoundaryMember> boundary_Astar(int L, bool parallel = true);

struct DeltaChain {
    int z0 = 0;
    int K = 0;
    std::vector<int> z;    // z_1..z_K
    std::vector<int> d;    // d_1..d_K, d_1 = 1
    std::vector<int> eps;  // eps_2..eps_K
    std::vector<std::pair<int, int>> intervals;  // Delta_1..Delta_K
};

DeltaChain delta_chain(const Configuration& eta, int z0);

// interval check: I = [a, b] either covers [0, L] or eta has a vacancy in I_- or I_+
bool interval_has_flanking_vacancy(const Configuration& eta, int a, int b);

// admissible point sets {z_1..z_{n+1}} in [0, L] as bitmasks over sites 0..L
std::vector<std::uint64_t> enumerate_Gamma(int z0, int n, int L);
long long count_d_strings(int n);

struct SetMass {
    double zero = 0.0;  // pi(boundary members with eta_z0 = 0 and witness z0)
    double one = 0.0;
};

std::map<int, SetMass> boundary_mass_by_site(const std::vector<BoundaryMember>& bd, const ModelParams& mp);

// states reachable from origin flipping legal sites while using at most budget zeros
std::vector<StateId> reachable_set(StateId origin, int budget, int L);
// V_n: exactly n zeros, reached from all-ones on [1, 2^n] (last site is the escape probe)
std::vector<StateId> V_set(int n);
// U_n embedded at length L: members of V_n with an extra zero at L
std::vector<StateId> U_set(int n, int L);

// edge boundary of a set: members with a legal flip leaving the set
std::vector<StateId> inner_boundary(const std::vector<std::uint8_t>& member, int L);

double dirichlet_of_indicator(const std::vector<std::uint8_t>& member, const ModelParams& mp);
double bottleneck_lower_bound(const ModelParams& mp, const std::vector<std::uint8_t>& member);

struct BlockLadder {
    int r = 3;
    double q = 0.25;
    std::vector<long long> ell;  // ell_1..ell_r
    std::vector<long long> overlap;  // ceil(ell_i / r)
    std::vector<double> eps;         // (1-q)^overlap
    std::vector<double> factor;      // 2 / (1 - sqrt(eps_i)), links ell_i -> ell_{i+1}
};

BlockLadder block_ladder(int r, double q);

}  // namespace eastlab
