#include "eastlab/kernels.hpp"

#include <cmath>

#include "eastlab/bottleneck.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace eastlab::kernels {

namespace {
inline double sym_row(StateId s, int L, double q, double sqpq, const double* x) {
    StateId lg = legal_mask(s, L);
    double acc = holding_rate_bits(s, L, q) * x[s];
    while (lg) {
        int b = __builtin_ctzll(lg);
        lg &= lg - 1;
        acc -= sqpq * x[s ^ (StateId(1) << b)];
    }
    return acc;
}

inline double gen_row(StateId s, int L, double q, const double* f) {
    StateId lg = legal_mask(s, L);
    double acc = 0.0;
    while (lg) {
        int b = __builtin_ctzll(lg);
        lg &= lg - 1;
        double rate = ((s >> b) & 1u) ? q : 1.0 - q;
        acc += rate * (f[s ^ (StateId(1) << b)] - f[s]);
    }
    return acc;
}
}  // namespace

namespace serial {
void sym_matvec(int L, double q, const double* x, double* y) {
    const StateId n = StateId(1) << L;
    const double sqpq = std::sqrt(q * (1.0 - q));
    for (StateId s = 0; s < n; ++s) y[s] = sym_row(s, L, q, sqpq, x);
}

void generator_apply(int L, double q, const double* f, double* out) {
    const StateId n = StateId(1) << L;
    for (StateId s = 0; s < n; ++s) out[s] = gen_row(s, L, q, f);
}

std::vector<std::uint8_t> astar_scan(int L) {
    const StateId n = StateId(1) << L;
    const StateId target = ones_then_zero_id(L);
    std::vector<std::uint8_t> m(n);
    for (StateId s = 0; s < n; ++s) m[s] = det_final_bits(s, L) == target;
    return m;
}

void ring_update(std::vector<StateId>& states, int x, int coin) {
    const StateId bit = StateId(1) << (x - 1);
    for (auto& s : states)
        if (constraint_bits(s, x)) s = coin ? (s | bit) : (s & ~bit);
}
}  // namespace serial

namespace parallel {
void sym_matvec(int L, double q, const double* x, double* y) {
    const long long n = 1LL << L;
    const double sqpq = std::sqrt(q * (1.0 - q));
#pragma omp parallel for schedule(static)
    for (long long s = 0; s < n; ++s) y[s] = sym_row(StateId(s), L, q, sqpq, x);
}

void generator_apply(int L, double q, const double* f, double* out) {
    const long long n = 1LL << L;
#pragma omp parallel for schedule(static)
    for (long long s = 0; s < n; ++s) out[s] = gen_row(StateId(s), L, q, f);
}

std::vector<std::uint8_t> astar_scan(int L) {
    const long long n = 1LL << L;
    const StateId target = ones_then_zero_id(L);
    std::vector<std::uint8_t> m(n);
#pragma omp parallel for schedule(static)
    for (long long s = 0; s < n; ++s) m[s] = det_final_bits(StateId(s), L) == target;
    return m;
}

void ring_update(std::vector<StateId>& states, int x, int coin) {
    const StateId bit = StateId(1) << (x - 1);
    const long long n = (long long)states.size();
#pragma omp parallel for schedule(static) if (n > 4096)
    for (long long i = 0; i < n; ++i) {
        StateId s = states[i];
        if (constraint_bits(s, x)) states[i] = coin ? (s | bit) : (s & ~bit);
    }
}
}  // namespace parallel

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace eastlab::kernels
