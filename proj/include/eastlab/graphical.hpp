#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "eastlab/core.hpp"

namespace eastlab {

// Counter-based stream: the k-th ring of site x depends only on (seed, x, k).
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b);
double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b);  // in (0, 1)
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

struct SiteClock {
    std::uint64_t seed = 0;
    int x = 1;
    double p = 0.5;
    std::uint64_t k = 0;  // rings emitted so far
    double t = 0.0;       // time of the last emitted ring
    int coin = 0;

    void advance();
};

struct Ring {
    double time;
    int site;
    int coin;
};

class NoiseField {
public:
    NoiseField(const ModelParams& mp, std::uint64_t seed, double horizon = 0.0);

    void extend(double horizon);
    double horizon() const { return horizon_; }
    std::uint64_t seed() const { return seed_; }
    const ModelParams& params() const { return mp_; }

    // k-th ring (0-based) of site x, materialized on demand
    Ring ring(int x, std::size_t k);
    std::size_t materialized(int x) const { return times_[x - 1].size(); }
    const std::vector<double>& times(int x) const { return times_[x - 1]; }
    const std::vector<std::uint8_t>& coins(int x) const { return coins_[x - 1]; }

    // rings of all sites in (time, site) order up to a horizon
    std::vector<Ring> merged(double horizon);

    // replaces the stream of one site; used to test that a site never influences its left
    void override_site(int x, std::vector<double> times, std::vector<std::uint8_t> coins);

private:
    void grow(int x, std::size_t count);

    ModelParams mp_;
    std::uint64_t seed_;
    double horizon_ = 0.0;
    std::vector<std::vector<double>> times_;
    std::vector<std::vector<std::uint8_t>> coins_;
    std::vector<SiteClock> clocks_;
    std::vector<bool> frozen_;
};

struct Event {
    double time;
    int site;
    int newspin;
    bool legal;
};

struct Trajectory {
    Configuration initial;
    std::vector<Event> events;
    Configuration final;
    double horizon = 0.0;

    Configuration at(double t) const;
    std::string export_tsv() const;
};

Trajectory evolve(const Configuration& eta0, NoiseField& noise, double horizon, bool thin = false);

struct CouplingReport {
    std::vector<double> tau;  // tau[x-1]: first legal ring at x of the run from all ones
    long long violations = 0;
    long long checks = 0;
    double coupled_time = std::numeric_limits<double>::infinity();  // all starts agree
    double horizon = 0.0;
};

CouplingReport couple_all(const ModelParams& mp, NoiseField& noise, double horizon, bool parallel = true);

struct HitTarget {
    int site;
    int value;
    bool operator()(StateId s) const { return spin_bits(s, site) == value; }
};

struct HitSample {
    double time = 0.0;
    bool capped = false;
    int widenings = 0;
};

HitSample sample_hitting(const Configuration& start, const HitTarget& target, const ModelParams& mp,
                         std::uint64_t seed, double cap = 1e6, int retries = 3);
HitSample sample_hitting(const Configuration& start, const std::function<bool(StateId)>& target,
                         const ModelParams& mp, std::uint64_t seed, double cap = 1e6, int retries = 3);

// independent trials with seeds derive_seed(seed, i); order of results is the trial order
std::vector<HitSample> hitting_trials(const Configuration& start, const HitTarget& target, const ModelParams& mp,
                                      std::uint64_t seed, int trials, double cap = 1e6, bool parallel = true);

struct ZeroPath {
    int x0 = 0;
    std::vector<double> jumps;  // jump i moves the zero from x0-i to x0-i-1

    int position(double t) const;
};

ZeroPath distinguished_zero(const Configuration& eta0, int x0, NoiseField& noise, double horizon);

}  // namespace eastlab
