#include "eastlab/network.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <bit>
#include <cmath>
#include <sstream>

#include "eastlab/bottleneck.hpp"

namespace eastlab::network {

namespace {
constexpr int kNetworkCap = 14;

void check_pair(const ModelParams& mp, const StateSet& A, const StateSet& B) {
    const std::size_t n = std::size_t(1) << mp.L;
    if (mp.L > kNetworkCap) throw CapExceeded("network computations limited to L <= 14");
    if (A.size() != n || B.size() != n) throw std::invalid_argument("state set size differs from 2^L");
    bool anyA = false, anyB = false;
    for (std::size_t s = 0; s < n; ++s) {
        if (A[s] && B[s]) throw std::invalid_argument("source and sink sets overlap");
        anyA |= bool(A[s]);
        anyB |= bool(B[s]);
    }
    if (!anyA || !anyB) throw std::invalid_argument("source and sink sets must be nonempty");
}

inline double krate(StateId s, int b, double q) { return ((s >> b) & 1u) ? q : 1.0 - q; }
}  // namespace

Network::Network(const ModelParams& m) : mp(m), pi(exact::build_generator(m).pi) {}

bool Network::has_edge(StateId a, StateId b) const {
    StateId d = a ^ b;
    if (std::popcount(d) != 1) return false;
    return constraint_bits(a, std::countr_zero(d) + 1);
}

double Network::conductance(StateId a, StateId b) const {
    if (!has_edge(a, b)) return 0.0;
    return pi[a] * krate(a, std::countr_zero(a ^ b), mp.q);
}

double Network::resistance(StateId a, StateId b) const {
    double c = conductance(a, b);
    if (c <= 0.0) throw std::invalid_argument("resistance queried off the edge set");
    return 1.0 / c;
}

double Flow::value(StateId from, StateId to) const {
    if (from == to) return 0.0;
    auto key = from < to ? std::make_pair(from, to) : std::make_pair(to, from);
    auto it = e_.find(key);
    if (it == e_.end()) return 0.0;
    return from < to ? it->second : -it->second;
}

void Flow::add(StateId from, StateId to, double v) {
    if (from == to) throw std::invalid_argument("flow on a loop");
    if (from < to)
        e_[{from, to}] += v;
    else
        e_[{to, from}] -= v;
}

Flow& Flow::operator+=(const Flow& o) {
    for (const auto& [k, v] : o.e_) e_[k] += v;
    return *this;
}

Flow Flow::operator+(const Flow& o) const {
    Flow r = *this;
    r += o;
    return r;
}

Flow Flow::operator*(double s) const {
    Flow r = *this;
    for (auto& kv : r.e_) kv.second *= s;
    return r;
}

std::vector<double> Flow::divergence(int L) const {
    std::vector<double> d(std::size_t(1) << L, 0.0);
    for (const auto& [k, v] : e_) {
        d.at(k.first) += v;
        d.at(k.second) -= v;
    }
    return d;
}

double Flow::strength(const StateSet& A, int L) const {
    auto d = divergence(L);
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (A[i]) s += d[i];
    return s;
}

std::string Flow::export_edges() const {
    std::ostringstream os;
    os.precision(17);
    for (const auto& [k, v] : e_) os << k.first << ' ' << k.second << ' ' << v << '\n';
    return os.str();
}

FlowCheck check_unit_flow(const Flow& f, const StateSet& A, const StateSet& B, int L) {
    auto d = f.divergence(L);
    FlowCheck c;
    c.min_div_A = std::numeric_limits<double>::infinity();
    c.max_div_B = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < d.size(); ++s) {
        if (A[s]) {
            c.min_div_A = std::min(c.min_div_A, d[s]);
            c.strength += d[s];
        } else if (B[s]) {
            c.max_div_B = std::max(c.max_div_B, d[s]);
        } else {
            c.max_div_off = std::max(c.max_div_off, std::abs(d[s]));
        }
    }
    return c;
}

double flow_energy(const Network& net, const Flow& f) {
    double e = 0.0;
    for (const auto& [k, v] : f.edges()) {
        if (v == 0.0) continue;
        if (!net.has_edge(k.first, k.second)) throw std::invalid_argument("flow supported outside the edge set");
        e += v * v / net.conductance(k.first, k.second);
    }
    return e;
}

Potential harmonic_potential(const ModelParams& mp, const StateSet& A, const StateSet& B) {
    check_pair(mp, A, B);
    Network net(mp);
    const int L = mp.L;
    const StateId n = StateId(1) << L;
    std::vector<Eigen::Index> pos(n, -1);
    std::vector<StateId> ids;
    for (StateId s = 0; s < n; ++s)
        if (!A[s] && !B[s]) {
            pos[s] = Eigen::Index(ids.size());
            ids.push_back(s);
        }
    Potential out;
    out.f.assign(n, 0.0);
    for (StateId s = 0; s < n; ++s)
        if (A[s]) out.f[s] = 1.0;
    const Eigen::Index m = Eigen::Index(ids.size());
    if (m > 0) {
        std::vector<Eigen::Triplet<double>> trip;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            StateId s = ids[i];
            double diag = 0.0;
            for (StateId lg = legal_mask(s, L); lg; lg &= lg - 1) {
                int b = std::countr_zero(lg);
                StateId t = s ^ (StateId(1) << b);
                double c = net.pi[s] * krate(s, b, mp.q);
                diag += c;
                if (pos[t] >= 0)
                    trip.emplace_back(i, pos[t], -c);
                else if (A[t])
                    rhs[i] += c;
            }
            trip.emplace_back(i, i, diag);
        }
        Eigen::SparseMatrix<double> M(m, m);
        M.setFromTriplets(trip.begin(), trip.end());
        Eigen::VectorXd x;
        if (m <= 1024) {
            Eigen::MatrixXd Md(M);
            Eigen::LLT<Eigen::MatrixXd> llt(Md);
            if (llt.info() != Eigen::Success) throw SolverError("singular harmonic system", 0.0);
            x = llt.solve(rhs);
            x += llt.solve(rhs - Md * x);
        } else {
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(M);
            if (ldlt.info() != Eigen::Success) throw SolverError("singular harmonic system", 0.0);
            x = ldlt.solve(rhs);
            x += ldlt.solve(rhs - M * x);
        }
        for (Eigen::Index i = 0; i < m; ++i) out.f[ids[i]] = x[i];
    }
    for (StateId s : ids) {
        double g = 0.0;
        for (StateId lg = legal_mask(s, L); lg; lg &= lg - 1) {
            int b = std::countr_zero(lg);
            g += krate(s, b, mp.q) * (out.f[s ^ (StateId(1) << b)] - out.f[s]);
        }
        out.residual = std::max(out.residual, std::abs(g));
    }
    if (!(out.residual < 1e-10)) throw SolverError("harmonic residual too large", out.residual);
    return out;
}

CapacityResult capacity_both(const ModelParams& mp, const StateSet& A, const StateSet& B) {
    check_pair(mp, A, B);
    Network net(mp);
    const int L = mp.L;
    const StateId n = StateId(1) << L;
    std::vector<Eigen::Index> pos(n, -1);
    std::vector<StateId> ids;
    for (StateId s = 0; s < n; ++s)
        if (!A[s] && !B[s]) {
            pos[s] = Eigen::Index(ids.size());
            ids.push_back(s);
        }
    // embedded jump chain: h = P(hit B before A)
    const Eigen::Index m = Eigen::Index(ids.size());
    std::vector<double> h(n, 0.0);
    for (StateId s = 0; s < n; ++s)
        if (B[s]) h[s] = 1.0;
    if (m > 0) {
        std::vector<Eigen::Triplet<double>> trip;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            StateId s = ids[i];
            double R = holding_rate_bits(s, L, mp.q);
            trip.emplace_back(i, i, 1.0);
            for (StateId lg = legal_mask(s, L); lg; lg &= lg - 1) {
                int b = std::countr_zero(lg);
                StateId t = s ^ (StateId(1) << b);
                double P = krate(s, b, mp.q) / R;
                if (pos[t] >= 0)
                    trip.emplace_back(i, pos[t], -P);
                else if (B[t])
                    rhs[i] += P;
            }
        }
        Eigen::SparseMatrix<double> M(m, m);
        M.setFromTriplets(trip.begin(), trip.end());
        M.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(M);
        if (lu.info() != Eigen::Success) throw SolverError("singular jump-chain system", 0.0);
        Eigen::VectorXd x = lu.solve(rhs);
        x += lu.solve(rhs - M * x);
        for (Eigen::Index i = 0; i < m; ++i) h[ids[i]] = x[i];
    }
    CapacityResult cr;
    for (StateId a = 0; a < n; ++a) {
        if (!A[a]) continue;
        double esc = 0.0;
        for (StateId lg = legal_mask(a, L); lg; lg &= lg - 1) {
            int b = std::countr_zero(lg);
            esc += krate(a, b, mp.q) * h[a ^ (StateId(1) << b)];
        }
        cr.jump_chain += net.pi[a] * esc;
    }
    Potential pot = harmonic_potential(mp, A, B);
    cr.dirichlet = exact::dirichlet_form(mp, pot.f).value;
    return cr;
}

double capacity(const ModelParams& mp, const StateSet& A, const StateSet& B) {
    CapacityResult cr = capacity_both(mp, A, B);
    if (std::abs(cr.jump_chain - cr.dirichlet) > 1e-8 * cr.dirichlet)
        throw SolverError("capacity routes disagree", std::abs(cr.jump_chain - cr.dirichlet) / cr.dirichlet);
    return cr.jump_chain;
}

double resistance(const ModelParams& mp, const StateSet& A, const StateSet& B) {
    double c = capacity(mp, A, B);
    if (!(c > 0.0)) throw std::domain_error("zero capacity");
    return 1.0 / c;
}

Flow equilibrium_flow(const ModelParams& mp, const StateSet& A, const StateSet& B) {
    Potential pot = harmonic_potential(mp, A, B);
    double C = exact::dirichlet_form(mp, pot.f).value;
    if (!(C > 0.0)) throw std::domain_error("zero capacity");
    Network net(mp);
    Flow f;
    const StateId n = StateId(1) << mp.L;
    for (StateId s = 0; s < n; ++s)
        for (StateId lg = legal_mask(s, mp.L) & ~s; lg; lg &= lg - 1) {
            StateId t = s | (lg & (~lg + 1));
            double v = net.conductance(s, t) * (pot.f[s] - pot.f[t]) / C;
            if (v != 0.0) f.add(s, t, v);
        }
    return f;
}

IdentityCheck hitting_capacity_identity(const ModelParams& mp, StateId a, const StateSet& B) {
    const StateId n = StateId(1) << mp.L;
    if (a >= n || B.at(a)) throw std::invalid_argument("a must lie outside B");
    StateSet A(n, 0);
    A[a] = 1;
    IdentityCheck ic;
    ic.lhs = exact::mean_hitting_time(mp, a, B);
    CapacityResult cr = capacity_both(mp, A, B);
    Potential pot = harmonic_potential(mp, A, B);
    Network net(mp);
    double mass = 0.0;
    for (StateId s = 0; s < n; ++s)
        if (!B[s]) mass += net.pi[s] * pot.f[s];
    ic.rhs = mass / cr.jump_chain;
    ic.residual = std::abs(ic.lhs - ic.rhs) / ic.lhs;
    return ic;
}

Sandwich cicerchie(const ModelParams& mp) {
    const int L = mp.L;
    Sandwich s;
    s.gamma = L == 1 ? 0.0 : std::log(double(L)) / std::log(1.0 / mp.q);
    StateSet A(std::size_t(1) << L, 0);
    A[ones_then_zero_id(L)] = 1;
    StateSet B = exact::site_is(L, L, 1);
    s.product = exact::T_hit(mp) * capacity(mp, A, B);
    s.lower_exact = mp.q * std::pow(mp.p(), L - 1);
    s.lower_const = mp.q * std::pow(0.5, std::pow(2.0, s.gamma));
    s.lower_literal = mp.q * std::pow(0.5, 1.0 / std::pow(2.0, s.gamma));
    s.upper = mp.q;
    return s;
}

StateSet B_set(int L, int ell) {
    if (ell < 1 || ell > L) throw std::out_of_range("ell outside [1, L]");
    const StateId beyond = all_ones(L) & ~all_ones(ell);
    return exact::make_set(L, [=](StateId s) { return !spin_bits(s, ell) && (s & beyond) == beyond; });
}

StateSet C_set(int L, int ell) {
    if (ell < 1 || ell > L) throw std::out_of_range("ell outside [1, L]");
    const StateId below = all_ones(ell - 1);
    return exact::make_set(L, [=](StateId s) { return !spin_bits(s, ell) && (s & below) == below; });
}

StateId shift_left(StateId s, int L, int ell) { return (s >> ell) | (all_ones(L) & ~all_ones(L - ell)); }

StateId shift_right(StateId s, int L, int ell) { return ((s & all_ones(L - ell)) << ell) | all_ones(ell - 1); }

ResitReport resit_construction(int i, int r, double q) {
    BlockLadder bl = block_ladder(r, q);
    if (i < 1 || i >= r) throw std::out_of_range("resit: need 1 <= i < r");
    ResitReport rep;
    rep.i = i;
    rep.r = r;
    rep.q = q;
    rep.ell_i = int(bl.ell[i - 1]);
    rep.ell_next = int(bl.ell[i]);
    rep.N = int(bl.overlap[i - 1]);
    const int L = rep.ell_next;
    if (L > 10) throw CapExceeded("resit construction limited to networks of at most 10 sites");
    ModelParams mp(L, q);
    Network net(mp);
    const StateId n = StateId(1) << L;
    const StateId ones = all_ones(L);
    StateSet A(n, 0);
    A[ones] = 1;
    StateSet Bfin = B_set(L, L);
    const int N = rep.N;

    std::vector<Flow> phi;
    for (int j = 0; j <= N; ++j) phi.push_back(equilibrium_flow(mp, A, B_set(L, rep.ell_i - N + j)));

    Flow total;
    for (int j = 1; j <= N; ++j) {
        const int lj = rep.ell_i - N + j;
        const StateId bitl = StateId(1) << (lj - 1);
        StateSet Bj = B_set(L, lj), Cj = C_set(L, lj);
        Flow hat, tilde;
        for (StateId s = 0; s < n; ++s) {
            if (Bj[s])
                for (int y = 1; y < lj; ++y) {
                    if (!constraint_bits(s, y)) continue;
                    StateId t = s ^ (StateId(1) << (y - 1));
                    if (s < t) hat.add(s, t, phi[j].value(t | bitl, s | bitl));
                }
            if (Cj[s])
                for (int y = lj + 1; y <= L; ++y) {
                    if (!constraint_bits(s, y)) continue;
                    StateId t = s ^ (StateId(1) << (y - 1));
                    if (s < t) tilde.add(s, t, phi[N - j].value(shift_left(s, L, lj), shift_left(t, L, lj)));
                }
        }
        Flow partial = phi[j] + hat;
        StateSet single(n, 0);
        single[ones & ~bitl] = 1;
        rep.partial_checks.push_back(check_unit_flow(partial, A, single, L));
        Flow theta = partial + tilde;
        rep.theta_j_checks.push_back(check_unit_flow(theta, A, Bfin, L));
        total += theta;
    }
    rep.Theta = total * (1.0 / N);
    rep.theta_check = check_unit_flow(rep.Theta, A, Bfin, L);
    rep.energy = flow_energy(net, rep.Theta);
    rep.R_i = resistance(mp, A, B_set(L, rep.ell_i));
    rep.R_next = resistance(mp, A, Bfin);
    rep.bound = 4.0 * rep.R_i + 6.0 * rep.R_i / (q * N);
    return rep;
}

}  // namespace eastlab::network
