#include "eastlab/bottleneck.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_set>

#include "eastlab/exact.hpp"
#include "eastlab/kernels.hpp"

namespace eastlab {

namespace {
constexpr int kScanCap = 24;

long long pos_mod(long long a, long long m) { return ((a % m) + m) % m; }

std::vector<double> weights_by_zeros(const ModelParams& mp) {
    std::vector<double> w(mp.L + 1);
    for (int z = 0; z <= mp.L; ++z) w[z] = std::pow(mp.q, z) * std::pow(mp.p(), mp.L - z);
    return w;
}
}  // namespace

StageIndex StageIndex::from_index(long long k, int L) {
    if (k < 1 || L < 1) throw std::out_of_range("stage index must be >= 1");
    return {int((k + L - 1) / L), int(pos_mod(L - k, L) + 1)};
}

long long StageIndex::index(int L) const { return (long long)(d - 1) * L + (L - x + 1); }

Configuration det_step(const Configuration& eta, int d, int x) {
    if (x < 1 || x > eta.L || d < 1) throw std::out_of_range("bad stage");
    if (eta.spin(x) == 0 && gap(eta, x) == d) {
        Configuration out = eta;
        out.set(x, 1);
        return out;
    }
    return eta;
}

DetRun det_dynamics(const Configuration& eta) {
    DetRun run{eta, {}};
    const int L = eta.L;
    const long long last = StageIndex{L - 1, 1}.index(L);
    for (long long k = 1; k <= last; ++k) {
        StageIndex st = StageIndex::from_index(k, L);
        Configuration next = det_step(run.final, st.d, st.x);
        if (next.bits != run.final.bits) run.fired.push_back(st);
        run.final = next;
    }
    return run;
}

StateId det_final_bits(StateId s, int L) {
    const StateId m = all_ones(L);
    const StateId sites = m << 1;  // sites 1..L in the shifted frame
    for (int d = 1; d <= L - 1; ++d) {
        StateId Z = ((~s & m) << 1) | 1u;  // bit i <-> site i, site 0 frozen
        StateId hit = Z & (Z << d) & sites;
        for (int j = 1; j < d; ++j) hit &= ~(Z << j);
        s |= hit >> 1;
    }
    return s;
}

bool in_Astar(const Configuration& eta) { return det_final_bits(eta.bits, eta.L) == ones_then_zero_id(eta.L); }

std::vector<std::uint8_t> astar_bitmap(int L, bool parallel) {
    if (L < 1 || L > kScanCap) throw CapExceeded("A* scan limited to L <= 24");
    return parallel ? kernels::parallel::astar_scan(L) : kernels::serial::astar_scan(L);
}

std::vector<BoundaryMember> boundary_Astar(int L, bool parallel) {
    auto member = astar_bitmap(L, parallel);
    const long long n = 1LL << L;
    std::vector<std::uint64_t> wit(n, 0);
#pragma omp parallel for schedule(static) if (parallel)
    for (long long s = 0; s < n; ++s) {
        if (!member[s]) continue;
        StateId lg = legal_mask(StateId(s), L);
        std::uint64_t w = 0;
        while (lg) {
            int b = std::countr_zero(lg);
            lg &= lg - 1;
            if (!member[StateId(s) ^ (StateId(1) << b)]) w |= std::uint64_t(1) << b;
        }
        wit[s] = w;
    }
    std::vector<BoundaryMember> out;
    for (long long s = 0; s < n; ++s) {
        if (!wit[s]) continue;
        BoundaryMember bm{StateId(s), {}};
        for (std::uint64_t w = wit[s]; w; w &= w - 1) bm.witnesses.push_back(std::countr_zero(w) + 1);
        out.push_back(std::move(bm));
    }
    return out;
}

bool interval_has_flanking_vacancy(const Configuration& eta, int a, int b) {
    const int L = eta.L;
    if (a == 0 && b == L) return true;
    const int len = b - a;
    for (int y = std::max(0, a - len + 1); y <= a - 1; ++y)
        if (eta.spin(y) == 0) return true;
    for (int y = b + 1; y <= std::min(L, b + len); ++y)
        if (eta.spin(y) == 0) return true;
    return false;
}

DeltaChain delta_chain(const Configuration& eta, int z0) {
    const int L = eta.L;
    if (z0 < 1 || z0 > L || !constraint(eta, z0) || !in_Astar(eta) || in_Astar(flip(eta, z0)))
        throw std::domain_error("delta_chain: z0 is not a witness of a boundary member");
    DeltaChain ch;
    ch.z0 = z0;
    int a = z0 - 1, b = z0;
    ch.z.push_back(z0 - 1);
    ch.d.push_back(1);
    ch.intervals.push_back({a, b});
    while (!(a == 0 && b == L)) {
        const int len = b - a;
        int best = -1, best_dist = 1 << 30;
        for (int y = std::max(0, a - len + 1); y <= a - 1; ++y)
            if (eta.spin(y) == 0 && a - y < best_dist) best = y, best_dist = a - y;
        for (int y = b + 1; y <= std::min(L, b + len); ++y)
            if (eta.spin(y) == 0 && y - b < best_dist) best = y, best_dist = y - b;
        if (best < 0) throw std::logic_error("delta_chain: no vacancy flanking " + eta.str());
        ch.z.push_back(best);
        ch.d.push_back(best_dist);
        if (best < a) {
            ch.eps.push_back(-1);
            a = best;
        } else {
            ch.eps.push_back(+1);
            b = best;
        }
        ch.intervals.push_back({a, b});
    }
    ch.K = int(ch.z.size());
    return ch;
}

std::vector<std::uint64_t> enumerate_Gamma(int z0, int n, int L) {
    if (z0 < 1 || z0 > L || L > kMaxSites) throw std::out_of_range("enumerate_Gamma: bad z0 or L");
    std::set<std::uint64_t> found;
    const std::uint64_t lambda = all_ones(L) << 1;
    auto rec = [&](auto&& self, int a, int b, std::uint64_t pts, int k) -> void {
        if (k == n + 1) {
            if (std::popcount(pts & lambda) >= n) found.insert(pts);
            return;
        }
        const int len = b - a;
        for (int d = 1; d <= len; ++d) {
            if (a - d >= 0) self(self, a - d, b, pts | (std::uint64_t(1) << (a - d)), k + 1);
            if (b + d <= L) self(self, a, b + d, pts | (std::uint64_t(1) << (b + d)), k + 1);
        }
    };
    rec(rec, z0 - 1, z0, std::uint64_t(1) << (z0 - 1), 1);
    return {found.begin(), found.end()};
}

long long count_d_strings(int n) {
    if (n < 1 || n > 12) throw std::out_of_range("count_d_strings: n outside [1, 12]");
    auto rec = [&](auto&& self, int k, long long sum) -> long long {
        if (k == n + 1) return 1;
        long long c = 0;
        for (long long d = 1; d <= sum; ++d) c += self(self, k + 1, sum + d);
        return c;
    };
    return rec(rec, 1, 1);
}

std::map<int, SetMass> boundary_mass_by_site(const std::vector<BoundaryMember>& bd, const ModelParams& mp) {
    auto w = weights_by_zeros(mp);
    std::map<int, SetMass> out;
    for (const auto& m : bd) {
        double pi = w[mp.L - std::popcount(m.state)];
        for (int z : m.witnesses) {
            if (spin_bits(m.state, z))
                out[z].one += pi;
            else
                out[z].zero += pi;
        }
    }
    return out;
}

std::vector<StateId> reachable_set(StateId origin, int budget, int L) {
    if (L < 1 || L > kMaxSites) throw std::out_of_range("reachable_set: bad L");
    if (L - std::popcount(origin) > budget) throw std::invalid_argument("origin exceeds vacancy budget");
    std::unordered_set<StateId> seen{origin};
    std::deque<StateId> todo{origin};
    while (!todo.empty()) {
        StateId s = todo.front();
        todo.pop_front();
        for (StateId lg = legal_mask(s, L); lg; lg &= lg - 1) {
            StateId t = s ^ (StateId(1) << std::countr_zero(lg));
            if (L - std::popcount(t) > budget || seen.count(t)) continue;
            if (seen.size() > (std::size_t(1) << kScanCap)) throw CapExceeded("reachable_set too large");
            seen.insert(t);
            todo.push_back(t);
        }
    }
    std::vector<StateId> out(seen.begin(), seen.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<StateId> V_set(int n) {
    if (n < 1 || n > 5) throw std::out_of_range("V_set: n outside [1, 5]");
    const int L = 1 << n;
    std::vector<StateId> out;
    for (StateId s : reachable_set(all_ones(L), n, L)) {
        if (L - std::popcount(s) != n) continue;
        if (!spin_bits(s, L)) throw std::logic_error("V_set: vacancy escaped to site 2^n");
        out.push_back(s & all_ones(L - 1));
    }
    return out;
}

std::vector<StateId> U_set(int n, int L) {
    if (L < (1 << n)) throw std::invalid_argument("U_set needs L >= 2^n");
    std::vector<StateId> out;
    const StateId high = all_ones(L) & ~all_ones((1 << n) - 1);
    for (StateId v : V_set(n)) out.push_back((v | high) & ~(StateId(1) << (L - 1)));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<StateId> inner_boundary(const std::vector<std::uint8_t>& member, int L) {
    std::vector<StateId> out;
    const StateId n = StateId(1) << L;
    if (member.size() != n) throw std::invalid_argument("member bitmap size differs from 2^L");
    for (StateId s = 0; s < n; ++s) {
        if (!member[s]) continue;
        for (StateId lg = legal_mask(s, L); lg; lg &= lg - 1)
            if (!member[s ^ (StateId(1) << std::countr_zero(lg))]) {
                out.push_back(s);
                break;
            }
    }
    return out;
}

double dirichlet_of_indicator(const std::vector<std::uint8_t>& member, const ModelParams& mp) {
    auto w = weights_by_zeros(mp);
    const int L = mp.L;
    double acc = 0.0;
    for (StateId s : inner_boundary(member, L)) {
        double pi = w[L - std::popcount(s)];
        for (StateId lg = legal_mask(s, L); lg; lg &= lg - 1) {
            int b = std::countr_zero(lg);
            if (!member[s ^ (StateId(1) << b)]) acc += pi * (((s >> b) & 1u) ? mp.q : mp.p());
        }
    }
    return acc;
}

double bottleneck_lower_bound(const ModelParams& mp, const std::vector<std::uint8_t>& member) {
    const int L = mp.L;
    if (member.size() != (std::size_t(1) << L)) throw std::invalid_argument("member bitmap size differs from 2^L");
    auto w = weights_by_zeros(mp);
    double piA = 0.0, piAc = 0.0;
    for (StateId s = 0; s < member.size(); ++s) (member[s] ? piA : piAc) += w[L - std::popcount(s)];
    if (piA <= 0.0 || piAc <= 0.0) throw std::invalid_argument("bottleneck_lower_bound: degenerate set");
    double dir = dirichlet_of_indicator(member, mp);
    std::vector<double> f(member.begin(), member.end());
    double direct = exact::dirichlet_form(mp, f).value;
    if (std::abs(dir - direct) > 1e-12 * std::max(1.0, direct) + 1e-300)
        throw std::logic_error("boundary measure disagrees with Dirichlet form");
    return piA * piAc / dir;
}

BlockLadder block_ladder(int r, double q) {
    if (r <= 2) throw std::invalid_argument("block_ladder needs r > 2");
    if (r > 60) throw std::out_of_range("block_ladder: r too large");
    BlockLadder bl;
    bl.r = r;
    bl.q = q;
    bl.ell.push_back(3);
    for (int i = 2; i <= r; ++i) {
        long long prev = bl.ell.back();
        bl.ell.push_back(2 * prev - (prev + r - 1) / r);
    }
    for (long long l : bl.ell) {
        long long ov = (l + r - 1) / r;
        bl.overlap.push_back(ov);
        double e = std::pow(1.0 - q, double(ov));
        bl.eps.push_back(e);
        bl.factor.push_back(2.0 / (1.0 - std::sqrt(e)));
    }
    return bl;
}

}  // namespace eastlab
