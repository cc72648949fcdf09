#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eastlab/core.hpp"

namespace eastlab::exact {

using StateSet = std::vector<std::uint8_t>;  // membership bitmap over 2^L ids

StateSet make_set(int L, const std::function<bool(StateId)>& pred);
StateSet site_is(int L, int x, int v);  // {eta : eta_x = v}

struct Generator {
    ModelParams mp;
    std::vector<double> pi;
    std::vector<double> hold;

    StateId size() const { return StateId(1) << mp.L; }
    double rate(StateId from, StateId to) const;
    Eigen::SparseMatrix<double> sparse() const;  // Q, rows sum to 0
    Eigen::MatrixXd dense() const;
    Eigen::MatrixXd dense_symmetrized() const;  // D^{1/2}(-Q)D^{-1/2}
    double max_holding_rate() const;
};

Generator build_generator(const ModelParams& mp);

struct EigenResult {
    double gap = 0.0;
    double trel = 0.0;
    std::string method;
    double residual = 0.0;
    Eigen::VectorXd vector;  // eigenvector of the symmetrized operator
};

enum class GapMethod { Auto, Dense, Iterative };

EigenResult spectral_gap(const ModelParams& mp, GapMethod method = GapMethod::Auto);
double relaxation_time(const ModelParams& mp);

struct HittingResult {
    Eigen::VectorXd h;  // indexed by state id, zero on the target
    double residual = 0.0;
    std::string method;
};

HittingResult hitting_times(const ModelParams& mp, const StateSet& target);
double mean_hitting_time(const ModelParams& mp, StateId start, const StateSet& target);
double T_hit(const ModelParams& mp);                // from 1..10 to {eta_L = 1}
double hat_tau_mean(const ModelParams& mp);         // from 1 to {eta_L = 0}

// Absorbing semigroup restricted to the complement of a target set.
class SurvivalCurve {
public:
    SurvivalCurve(const ModelParams& mp, StateId start, const StateSet& target);
    double operator()(double t) const;
    // values at 0, step, 2 step, ..., count step
    std::vector<double> on_grid(double step, int count) const;
    // smallest t with survival(t) <= level
    double quantile(double level, double rel_tol = 1e-10) const;
    double uniformization_rate() const { return Lambda_; }

private:
    Eigen::MatrixXd P_;  // I + Q_CC / Lambda
    double Lambda_ = 1.0;
    Eigen::Index start_ = 0;
};

double survival(const ModelParams& mp, StateId start, const StateSet& target, double t);
double quantile_time(const ModelParams& mp, double level = 0.25);

struct MixingResult {
    double tmix = 0.0;
    double tv_at = 0.0;  // distance at the returned time
    StateId worst_start = 0;
};

MixingResult mixing(const ModelParams& mp, double threshold = 0.25, double rel_tol = 1e-9);
double mixing_time(const ModelParams& mp, double threshold = 0.25);
// worst-case total-variation distance at time t
double tv_distance(const ModelParams& mp, double t);

// exp(Q t) for a dense (sub)generator via uniformization and squaring
Eigen::MatrixXd expm_uniformized(const Eigen::MatrixXd& Q, double Lambda, double t);

struct DirichletValue {
    double value = 0.0;
    double via_conditional_variance = 0.0;
    double via_rates = 0.0;
};

DirichletValue dirichlet_form(const ModelParams& mp, const std::vector<double>& f);
double variance(const ModelParams& mp, const std::vector<double>& f);

struct TimescaleReport {
    ModelParams mp;
    double trel = 0.0, tmix = 0.0, thit = 0.0, tquant = 0.0;
    std::string method_trel, method_tmix = "bisection", method_thit, method_tquant = "bisection";
    double resid_trel = 0.0, resid_thit = 0.0;
    bool has_tmix = false;
};

TimescaleReport timescales(const ModelParams& mp, bool with_mixing = true);

}  // namespace eastlab::exact
