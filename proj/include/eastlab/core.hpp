#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace eastlab {

using StateId = std::uint64_t;

inline constexpr int kMaxSites = 62;

class CapExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

struct ModelParams {
    int L = 1;
    double q = 0.25;
    bool allow_wide_q = false;

    ModelParams() = default;
    ModelParams(int L_, double q_, bool wide = false);

    double p() const { return 1.0 - q; }
    int n() const;  // ceil(log2 L)
    void validate() const;
};

int ceil_log2(long long v);

// Site x in [1, L] is stored in bit x-1. Site 0 is the frozen vacancy.
struct Configuration {
    StateId bits = 0;
    int L = 0;

    Configuration() = default;
    Configuration(StateId b, int len) : bits(b), L(len) {}

    static Configuration ones(int L);
    static Configuration ones_then_zero(int L);  // 1...10
    static Configuration parse(const std::string& s);

    int spin(int x) const;  // x in [0, L], spin(0) == 0
    void set(int x, int v);
    int zeros() const;
    std::string str(bool verbose = false) const;

    bool operator==(const Configuration&) const = default;
};

struct Transition {
    Configuration target;
    int site = 0;
    double rate = 0.0;
};

StateId all_ones(int L);
StateId ones_then_zero_id(int L);

bool constraint(const Configuration& eta, int x);
Configuration flip(const Configuration& eta, int x);
int gap(const Configuration& eta, int x);
double weight(const Configuration& eta, const ModelParams& mp);
double flip_rate(const Configuration& eta, int x, const ModelParams& mp);
double holding_rate(const Configuration& eta, const ModelParams& mp);
std::vector<Transition> transitions(const Configuration& eta, const ModelParams& mp);

StateId encode(const Configuration& eta);
Configuration decode(StateId id, int L);

// bitwise forms used by the scanning kernels
inline bool constraint_bits(StateId s, int x) { return x == 1 || ((s >> (x - 2)) & 1u) == 0; }
inline int spin_bits(StateId s, int x) { return x == 0 ? 0 : int((s >> (x - 1)) & 1u); }
inline StateId legal_mask(StateId s, int L) {
    StateId m = L >= 64 ? ~StateId(0) : ((StateId(1) << L) - 1);
    return ((~s << 1) | 1u) & m;
}
double holding_rate_bits(StateId s, int L, double q);

}  // namespace eastlab
