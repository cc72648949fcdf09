#include "eastlab/graphical.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eastlab/kernels.hpp"

namespace eastlab {

namespace {
inline std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = splitmix(seed ^ 0x5851F42D4C957F2DULL);
    h = splitmix(h ^ (a * 0xD1B54A32D192ED03ULL));
    return splitmix(h ^ (b * 0xABC98388FB8FAC03ULL + 0x2545F4914F6CDD1DULL));
}

double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return (double(counter_hash(seed, a, b) >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) { return counter_hash(seed, 0xFFFFFFFFULL, index); }

void SiteClock::advance() {
    ++k;
    t += -std::log(counter_uniform(seed, std::uint64_t(x), 2 * k));
    coin = counter_uniform(seed, std::uint64_t(x), 2 * k + 1) < p ? 1 : 0;
}

NoiseField::NoiseField(const ModelParams& mp, std::uint64_t seed, double horizon)
    : mp_(mp), seed_(seed), times_(mp.L), coins_(mp.L), frozen_(mp.L, false) {
    for (int x = 1; x <= mp.L; ++x) clocks_.push_back(SiteClock{seed, x, mp.p()});
    if (horizon > 0.0) extend(horizon);
}

void NoiseField::grow(int x, std::size_t count) {
    auto& tv = times_[x - 1];
    auto& cv = coins_[x - 1];
    if (frozen_[x - 1]) return;
    auto& c = clocks_[x - 1];
    while (tv.size() < count) {
        c.advance();
        tv.push_back(c.t);
        cv.push_back(std::uint8_t(c.coin));
    }
}

void NoiseField::extend(double horizon) {
    for (int x = 1; x <= mp_.L; ++x) {
        if (frozen_[x - 1]) continue;
        while (times_[x - 1].empty() || times_[x - 1].back() <= horizon) grow(x, times_[x - 1].size() + 64);
    }
    horizon_ = std::max(horizon_, horizon);
}

Ring NoiseField::ring(int x, std::size_t k) {
    if (x < 1 || x > mp_.L) throw std::out_of_range("site outside [1, L]");
    grow(x, k + 1);
    if (k >= times_[x - 1].size()) return {kInf, x, 0};
    return {times_[x - 1][k], x, coins_[x - 1][k]};
}

std::vector<Ring> NoiseField::merged(double horizon) {
    extend(horizon);
    std::vector<Ring> out;
    for (int x = 1; x <= mp_.L; ++x)
        for (std::size_t k = 0; k < times_[x - 1].size() && times_[x - 1][k] <= horizon; ++k)
            out.push_back({times_[x - 1][k], x, coins_[x - 1][k]});
    std::sort(out.begin(), out.end(), [](const Ring& a, const Ring& b) {
        return a.time != b.time ? a.time < b.time : a.site < b.site;
    });
    return out;
}

void NoiseField::override_site(int x, std::vector<double> times, std::vector<std::uint8_t> coins) {
    if (x < 1 || x > mp_.L) throw std::out_of_range("site outside [1, L]");
    if (times.size() != coins.size() || !std::is_sorted(times.begin(), times.end()))
        throw std::invalid_argument("override needs sorted times with matching coins");
    times_[x - 1] = std::move(times);
    coins_[x - 1] = std::move(coins);
    frozen_[x - 1] = true;
}

Configuration Trajectory::at(double t) const {
    Configuration c = initial;
    for (const auto& e : events) {
        if (e.time > t) break;
        if (e.legal) c.set(e.site, e.newspin);
    }
    return c;
}

std::string Trajectory::export_tsv() const {
    std::ostringstream os;
    os.precision(17);
    for (const auto& e : events) os << e.time << '\t' << e.site << '\t' << e.newspin << '\t' << (e.legal ? 1 : 0) << '\n';
    return os.str();
}

Trajectory evolve(const Configuration& eta0, NoiseField& noise, double horizon, bool thin) {
    if (eta0.L != noise.params().L) throw std::invalid_argument("configuration length differs from noise L");
    Trajectory tr{eta0, {}, eta0, horizon};
    for (const Ring& r : noise.merged(horizon)) {
        bool legal = constraint_bits(tr.final.bits, r.site);
        if (legal) tr.final.set(r.site, r.coin);
        if (legal || !thin) tr.events.push_back({r.time, r.site, tr.final.spin(r.site), legal});
    }
    return tr;
}

CouplingReport couple_all(const ModelParams& mp, NoiseField& noise, double horizon, bool parallel) {
    if (mp.L > 12) throw CapExceeded("couple_all limited to L <= 12");
    const int L = mp.L;
    const StateId n = StateId(1) << L;
    std::vector<StateId> states(n);
    for (StateId s = 0; s < n; ++s) states[s] = s;
    CouplingReport rep;
    rep.tau.assign(L, kInf);
    rep.horizon = horizon;
    int m = 0;  // sites 1..m have tau set
    for (const Ring& r : noise.merged(horizon)) {
        StateId xi = states[n - 1];
        if (constraint_bits(xi, r.site) && !(rep.tau[r.site - 1] < kInf)) rep.tau[r.site - 1] = r.time;
        if (parallel)
            kernels::parallel::ring_update(states, r.site, r.coin);
        else
            kernels::serial::ring_update(states, r.site, r.coin);
        while (m < L && rep.tau[m] < kInf) ++m;
        xi = states[n - 1];
        const StateId mask = all_ones(m);
        bool all_equal = true;
        for (StateId s : states) {
            if ((s & mask) != (xi & mask)) ++rep.violations;
            if (s != xi) all_equal = false;
        }
        rep.checks += (long long)n;
        if (all_equal && !(rep.coupled_time < kInf)) rep.coupled_time = r.time;
        if (m == L && all_equal) break;
    }
    return rep;
}

namespace {
template <class Pred>
HitSample hit_impl(const Configuration& start, const Pred& target, const ModelParams& mp, std::uint64_t seed,
                   double cap, int retries) {
    if (!(cap > 0.0)) throw std::invalid_argument("cap must be positive");
    if (start.L != mp.L) throw std::invalid_argument("configuration length differs from L");
    HitSample out;
    StateId s = start.bits;
    if (target(s)) return out;
    const int L = mp.L;
    std::vector<SiteClock> clk;
    clk.reserve(L);
    for (int x = 1; x <= L; ++x) {
        clk.push_back(SiteClock{seed, x, mp.p()});
        clk.back().advance();
    }
    double limit = cap;
    for (;;) {
        int best = 0;
        for (int i = 1; i < L; ++i)
            if (clk[i].t < clk[best].t) best = i;
        SiteClock& c = clk[best];
        while (c.t > limit) {
            if (out.widenings == retries) {
                out.time = limit;
                out.capped = true;
                return out;
            }
            ++out.widenings;
            limit *= 10.0;
        }
        const int x = best + 1;
        if (constraint_bits(s, x)) {
            const StateId bit = StateId(1) << best;
            s = c.coin ? (s | bit) : (s & ~bit);
            if (target(s)) {
                out.time = c.t;
                return out;
            }
        }
        c.advance();
    }
}
}  // namespace

HitSample sample_hitting(const Configuration& start, const HitTarget& target, const ModelParams& mp,
                         std::uint64_t seed, double cap, int retries) {
    return hit_impl(start, target, mp, seed, cap, retries);
}

HitSample sample_hitting(const Configuration& start, const std::function<bool(StateId)>& target,
                         const ModelParams& mp, std::uint64_t seed, double cap, int retries) {
    return hit_impl(start, target, mp, seed, cap, retries);
}

std::vector<HitSample> hitting_trials(const Configuration& start, const HitTarget& target, const ModelParams& mp,
                                      std::uint64_t seed, int trials, double cap, bool parallel) {
    std::vector<HitSample> out(std::max(trials, 0));
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
    for (int i = 0; i < trials; ++i) out[i] = hit_impl(start, target, mp, derive_seed(seed, i), cap, 3);
    return out;
}

int ZeroPath::position(double t) const {
    int k = int(std::upper_bound(jumps.begin(), jumps.end(), t) - jumps.begin());
    return x0 - k;
}

ZeroPath distinguished_zero(const Configuration& eta0, int x0, NoiseField& noise, double horizon) {
    if (x0 < 1 || x0 > eta0.L || eta0.spin(x0) != 0) throw std::invalid_argument("no vacancy at x0");
    ZeroPath zp{x0, {}};
    int xi = x0;
    Configuration eta = eta0;
    for (const Ring& r : noise.merged(horizon)) {
        if (xi == 0) break;
        bool legal = constraint_bits(eta.bits, r.site);
        if (legal && r.site == xi) {
            zp.jumps.push_back(r.time);
            --xi;
        }
        if (legal) eta.set(r.site, r.coin);
    }
    return zp;
}

}  // namespace eastlab
