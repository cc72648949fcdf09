#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "eastlab/core.hpp"
#include "eastlab/exact.hpp"

namespace eastlab::network {

using exact::StateSet;

struct Network {
    ModelParams mp;
    std::vector<double> pi;

    explicit Network(const ModelParams& mp);
    bool has_edge(StateId a, StateId b) const;
    double conductance(StateId a, StateId b) const;  // 0 off the edge set
    double resistance(StateId a, StateId b) const;
};

// Antisymmetric edge function stored once per edge, oriented toward the larger id.
class Flow {
public:
    double value(StateId from, StateId to) const;
    void add(StateId from, StateId to, double v);
    Flow& operator+=(const Flow& o);
    Flow operator+(const Flow& o) const;
    Flow operator*(double s) const;

    std::vector<double> divergence(int L) const;
    double strength(const StateSet& A, int L) const;
    const std::map<std::pair<StateId, StateId>, double>& edges() const { return e_; }
    std::string export_edges() const;  // "fromid toid value" per line

private:
    std::map<std::pair<StateId, StateId>, double> e_;
};

struct FlowCheck {
    double max_div_off = 0.0;  // |div| off A and B
    double min_div_A = 0.0;
    double max_div_B = 0.0;
    double strength = 0.0;
    bool ok(double tol = 1e-12) const {
        return max_div_off <= tol && min_div_A >= -tol && max_div_B <= tol && std::abs(strength - 1.0) <= tol;
    }
};

FlowCheck check_unit_flow(const Flow& f, const StateSet& A, const StateSet& B, int L);

double flow_energy(const Network& net, const Flow& f);

struct CapacityResult {
    double jump_chain = 0.0;
    double dirichlet = 0.0;
};

CapacityResult capacity_both(const ModelParams& mp, const StateSet& A, const StateSet& B);
double capacity(const ModelParams& mp, const StateSet& A, const StateSet& B);
double resistance(const ModelParams& mp, const StateSet& A, const StateSet& B);

struct Potential {
    std::vector<double> f;
    double residual = 0.0;  // max |Q f| off A and B
};

Potential harmonic_potential(const ModelParams& mp, const StateSet& A, const StateSet& B);
Flow equilibrium_flow(const ModelParams& mp, const StateSet& A, const StateSet& B);

struct IdentityCheck {
    double lhs = 0.0;  // E_a[tau_B]
    double rhs = 0.0;
    double residual = 0.0;  // relative
};

IdentityCheck hitting_capacity_identity(const ModelParams& mp, StateId a, const StateSet& B);

struct Sandwich {
    double gamma = 0.0;
    double product = 0.0;          // T_hit * C(1..10, {eta_L = 1})
    double lower_exact = 0.0;      // q (1-q)^{L-1}
    double lower_const = 0.0;      // q (1/2)^{2^gamma}
    double lower_literal = 0.0;    // q (1/2)^{1/2^gamma}
    double upper = 0.0;            // q
};

Sandwich cicerchie(const ModelParams& mp);

StateSet B_set(int L, int ell);  // eta_ell = 0, ones right of ell
StateSet C_set(int L, int ell);  // eta_ell = 0, ones left of ell
StateId shift_left(StateId s, int L, int ell);  // C_ell -> configurations with ones beyond L - ell
StateId shift_right(StateId s, int L, int ell);

struct ResitReport {
    int i = 1, r = 3;
    double q = 0.0;
    int ell_i = 0, ell_next = 0, N = 0;
    Flow Theta;
    FlowCheck theta_check;
    std::vector<FlowCheck> partial_checks;  // phi_j + phi_hat_j into the single-vacancy state
    std::vector<FlowCheck> theta_j_checks;
    double energy = 0.0;
    double R_i = 0.0, R_next = 0.0;
    double bound = 0.0;  // 4 R_i + 6 R_i / (q N)
};

ResitReport resit_construction(int i, int r, double q);

}  // namespace eastlab::network
