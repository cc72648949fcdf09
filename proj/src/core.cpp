#include "eastlab/core.hpp"

#include <bit>
#include <cmath>

namespace eastlab {

ModelParams::ModelParams(int L_, double q_, bool wide) : L(L_), q(q_), allow_wide_q(wide) {
    validate();
}

void ModelParams::validate() const {
    if (L < 1 || L > kMaxSites)
        throw std::invalid_argument("L must lie in [1, " + std::to_string(kMaxSites) + "]");
    if (!(q > 0.0) || !(q < 1.0))
        throw std::invalid_argument("q must lie in (0, 1)");
    if (!allow_wide_q && !(q < 0.5))
        throw std::invalid_argument("q must lie in (0, 1/2); pass allow_wide_q to override");
}

int ceil_log2(long long v) {
    if (v < 1) throw std::invalid_argument("ceil_log2 of non-positive value");
    int k = 0;
    while ((1LL << k) < v) ++k;
    return k;
}

int ModelParams::n() const { return ceil_log2(L); }

StateId all_ones(int L) { return L >= 64 ? ~StateId(0) : ((StateId(1) << L) - 1); }

StateId ones_then_zero_id(int L) { return all_ones(L - 1); }

Configuration Configuration::ones(int L) { return {all_ones(L), L}; }

Configuration Configuration::ones_then_zero(int L) { return {ones_then_zero_id(L), L}; }

Configuration Configuration::parse(const std::string& s) {
    std::string body = s;
    if (body.rfind("[0]", 0) == 0) body = body.substr(3);
    if (body.empty() || int(body.size()) > kMaxSites)
        throw std::invalid_argument("configuration string has bad length: '" + s + "'");
    Configuration c{0, int(body.size())};
    for (int i = 0; i < c.L; ++i) {
        if (body[i] == '1')
            c.bits |= StateId(1) << i;
        else if (body[i] != '0')
            throw std::invalid_argument("configuration string must be 0/1: '" + s + "'");
    }
    return c;
}

int Configuration::spin(int x) const {
    if (x < 0 || x > L) throw std::out_of_range("site outside [0, L]");
    return spin_bits(bits, x);
}

void Configuration::set(int x, int v) {
    if (x < 1 || x > L) throw std::out_of_range("site outside [1, L]");
    if (v)
        bits |= StateId(1) << (x - 1);
    else
        bits &= ~(StateId(1) << (x - 1));
}

int Configuration::zeros() const { return L - std::popcount(bits); }

std::string Configuration::str(bool verbose) const {
    std::string s = verbose ? "[0]" : "";
    for (int x = 1; x <= L; ++x) s.push_back(spin_bits(bits, x) ? '1' : '0');
    return s;
}

bool constraint(const Configuration& eta, int x) {
    if (x < 1 || x > eta.L) throw std::out_of_range("site outside [1, L]");
    return constraint_bits(eta.bits, x);
}

Configuration flip(const Configuration& eta, int x) {
    if (x < 1 || x > eta.L) throw std::out_of_range("site outside [1, L]");
    return {eta.bits ^ (StateId(1) << (x - 1)), eta.L};
}

int gap(const Configuration& eta, int x) {
    if (x < 1 || x > eta.L) throw std::out_of_range("site outside [1, L]");
    for (int d = 1; d <= x; ++d)
        if (spin_bits(eta.bits, x - d) == 0) return d;
    return x;  // unreachable, site 0 is a vacancy
}

double weight(const Configuration& eta, const ModelParams& mp) {
    int z = eta.zeros();
    return std::pow(mp.q, z) * std::pow(mp.p(), eta.L - z);
}

double flip_rate(const Configuration& eta, int x, const ModelParams& mp) {
    if (!constraint(eta, x)) return 0.0;
    return spin_bits(eta.bits, x) ? mp.q : mp.p();
}

double holding_rate(const Configuration& eta, const ModelParams& mp) {
    double r = 0.0;
    for (int x = 1; x <= eta.L; ++x) r += flip_rate(eta, x, mp);
    return r;
}

double holding_rate_bits(StateId s, int L, double q) {
    StateId lg = legal_mask(s, L);
    return q * std::popcount(lg & s) + (1.0 - q) * std::popcount(lg & ~s);
}

std::vector<Transition> transitions(const Configuration& eta, const ModelParams& mp) {
    if (eta.L != mp.L) throw std::invalid_argument("configuration length differs from L");
    std::vector<Transition> out;
    for (int x = 1; x <= eta.L; ++x)
        if (constraint_bits(eta.bits, x)) out.push_back({flip(eta, x), x, flip_rate(eta, x, mp)});
    return out;
}

StateId encode(const Configuration& eta) { return eta.bits; }

Configuration decode(StateId id, int L) {
    if (L < 1 || L > kMaxSites) throw std::invalid_argument("bad L in decode");
    if (id > all_ones(L)) throw std::out_of_range("state id exceeds 2^L - 1");
    return {id, L};
}

}  // namespace eastlab
