#include "eastlab/exact.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <bit>
#include <cmath>

#include "eastlab/kernels.hpp"
#include "eastlab/krylov.hpp"

namespace eastlab::exact {

namespace {
constexpr int kGeneratorCap = 24;
constexpr int kSparseCap = 20;
constexpr int kDenseCap = 12;
constexpr int kDenseGapMax = 10;
constexpr int kIterativeGapMax = 22;
constexpr Eigen::Index kSemigroupCap = 2048;

double row_sum_tv(const Eigen::MatrixXd& M, const std::vector<double>& pi, Eigen::Index& worst) {
    double best = -1.0;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < M.cols(); ++j) s += std::abs(M(i, j) - pi[j]);
        if (s > best) best = s, worst = i;
    }
    return 0.5 * best;
}

// sum_k Pois(x; k) P^k for small x
Eigen::MatrixXd poisson_series(const Eigen::MatrixXd& P, double x) {
    const Eigen::Index n = P.rows();
    Eigen::MatrixXd Pk = Eigen::MatrixXd::Identity(n, n);
    double w = std::exp(-x);
    Eigen::MatrixXd E = w * Pk;
    for (int k = 1; k < 200; ++k) {
        Pk = (Pk * P).eval();
        w *= x / k;
        E += w * Pk;
        if (w * x / (k + 1) < 1e-20) break;
    }
    return E;
}

std::vector<double> poisson_weights(double x, int K) {
    std::vector<double> w(K + 1);
    w[0] = std::exp(-x);
    for (int k = 1; k <= K; ++k) w[k] = w[k - 1] * x / k;
    return w;
}

int series_length(double x) {
    double w = std::exp(-x);
    int k = 0;
    while (k < 200 && w * x / (k + 1) >= 1e-20) w *= x / ++k;
    return k + 1;
}

Eigen::MatrixXd expm_from_uniformized(const Eigen::MatrixXd& P, double lam) {
    if (lam <= 0.0) return Eigen::MatrixXd::Identity(P.rows(), P.cols());
    int s = lam > 0.5 ? int(std::ceil(std::log2(lam / 0.5))) : 0;
    Eigen::MatrixXd M = poisson_series(P, std::ldexp(lam, -s));
    for (int i = 0; i < s; ++i) M = (M * M).eval();
    return M;
}

struct Complement {
    std::vector<StateId> ids;
    std::vector<Eigen::Index> pos;  // -1 on target
};

Complement complement_of(const StateSet& target) {
    Complement c;
    c.pos.assign(target.size(), -1);
    for (StateId s = 0; s < target.size(); ++s)
        if (!target[s]) {
            c.pos[s] = Eigen::Index(c.ids.size());
            c.ids.push_back(s);
        }
    return c;
}

void check_set(const ModelParams& mp, const StateSet& set) {
    if (set.size() != (std::size_t(1) << mp.L)) throw std::invalid_argument("state set size differs from 2^L");
}
}  // namespace

StateSet make_set(int L, const std::function<bool(StateId)>& pred) {
    if (L < 1 || L > kGeneratorCap) throw CapExceeded("state set limited to L <= 24");
    StateSet s(std::size_t(1) << L);
    for (StateId i = 0; i < s.size(); ++i) s[i] = pred(i);
    return s;
}

StateSet site_is(int L, int x, int v) {
    if (x < 1 || x > L) throw std::out_of_range("site outside [1, L]");
    return make_set(L, [x, v](StateId s) { return spin_bits(s, x) == v; });
}

Generator build_generator(const ModelParams& mp) {
    mp.validate();
    if (mp.L > kGeneratorCap) throw CapExceeded("generator limited to L <= 24");
    Generator g;
    g.mp = mp;
    const StateId n = g.size();
    g.pi.resize(n);
    g.hold.resize(n);
    std::vector<double> w(mp.L + 1);
    for (int z = 0; z <= mp.L; ++z) w[z] = std::pow(mp.q, z) * std::pow(mp.p(), mp.L - z);
    for (StateId s = 0; s < n; ++s) {
        g.pi[s] = w[mp.L - std::popcount(s)];
        g.hold[s] = holding_rate_bits(s, mp.L, mp.q);
    }
    return g;
}

double Generator::rate(StateId from, StateId to) const {
    StateId d = from ^ to;
    if (std::popcount(d) != 1) return 0.0;
    int x = std::countr_zero(d) + 1;
    if (!constraint_bits(from, x)) return 0.0;
    return spin_bits(from, x) ? mp.q : mp.p();
}

double Generator::max_holding_rate() const { return *std::max_element(hold.begin(), hold.end()); }

Eigen::SparseMatrix<double> Generator::sparse() const {
    if (mp.L > kSparseCap) throw CapExceeded("sparse generator limited to L <= 20");
    std::vector<Eigen::Triplet<double>> trip;
    const StateId n = size();
    trip.reserve(n * (mp.L / 2 + 2));
    for (StateId s = 0; s < n; ++s) {
        trip.emplace_back(s, s, -hold[s]);
        for (StateId lg = legal_mask(s, mp.L); lg; lg &= lg - 1) {
            int b = std::countr_zero(lg);
            trip.emplace_back(s, s ^ (StateId(1) << b), ((s >> b) & 1u) ? mp.q : mp.p());
        }
    }
    Eigen::SparseMatrix<double> Q(n, n);
    Q.setFromTriplets(trip.begin(), trip.end());
    return Q;
}

Eigen::MatrixXd Generator::dense() const {
    if (mp.L > kDenseCap) throw CapExceeded("dense generator limited to L <= 12");
    return Eigen::MatrixXd(sparse());
}

Eigen::MatrixXd Generator::dense_symmetrized() const {
    if (mp.L > kDenseCap) throw CapExceeded("dense generator limited to L <= 12");
    const StateId n = size();
    const double sqpq = std::sqrt(mp.q * mp.p());
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    for (StateId s = 0; s < n; ++s) {
        S(s, s) = hold[s];
        for (StateId lg = legal_mask(s, mp.L); lg; lg &= lg - 1) S(s, s ^ (StateId(1) << std::countr_zero(lg))) = -sqpq;
    }
    return S;
}

EigenResult spectral_gap(const ModelParams& mp, GapMethod method) {
    mp.validate();
    if (method == GapMethod::Auto) method = mp.L <= kDenseGapMax ? GapMethod::Dense : GapMethod::Iterative;
    if (method == GapMethod::Dense && mp.L > kDenseCap) throw CapExceeded("dense gap limited to L <= 12");
    if (mp.L > kIterativeGapMax) throw CapExceeded("gap limited to L <= 22");
    Generator g = build_generator(mp);
    const Eigen::Index n = Eigen::Index(g.size());
    Eigen::VectorXd u(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = std::sqrt(g.pi[i]);
    u.normalize();

    EigenResult r;
    if (method == GapMethod::Dense) {
        Eigen::MatrixXd S = g.dense_symmetrized();
        double mu = 2.0 * g.max_holding_rate() + 1.0;
        Eigen::MatrixXd Sd = S + mu * u * u.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Sd);
        if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed", 0.0);
        r.vector = es.eigenvectors().col(0);
        r.gap = r.vector.dot(S * r.vector);
        r.residual = (S * r.vector - r.gap * r.vector).norm();
        r.method = "dense-eigen";
    } else {
        const int L = mp.L;
        const double q = mp.q;
        SymOperator op = [L, q](const double* x, double* y) { kernels::parallel::sym_matvec(L, q, x, y); };
        KrylovOptions opt;
        opt.max_basis = n >= (1 << 18) ? 40 : 80;
        opt.keep = opt.max_basis / 3;
        opt.tol = 1e-11;
        KrylovResult kr = smallest_eigenpair(op, n, u, opt);
        r.vector = std::move(kr.vector);
        r.gap = kr.eigenvalue;
        r.residual = kr.residual;
        r.method = "iterative-eigen";
        if (!kr.converged && kr.residual > 1e-8)
            throw SolverError("Krylov eigensolver did not converge", kr.residual);
    }
    if (!(r.gap > 0.0)) throw SolverError("non-positive spectral gap", r.residual);
    r.trel = 1.0 / r.gap;
    return r;
}

double relaxation_time(const ModelParams& mp) { return spectral_gap(mp).trel; }

HittingResult hitting_times(const ModelParams& mp, const StateSet& target) {
    check_set(mp, target);
    if (mp.L > kSparseCap) throw CapExceeded("hitting times limited to L <= 20");
    Generator g = build_generator(mp);
    Complement c = complement_of(target);
    const Eigen::Index m = Eigen::Index(c.ids.size());
    if (m == Eigen::Index(target.size())) throw std::invalid_argument("target set is empty");
    HittingResult out;
    out.h = Eigen::VectorXd::Zero(target.size());
    if (m == 0) return out;

    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index i = 0; i < m; ++i) {
        StateId s = c.ids[i];
        trip.emplace_back(i, i, g.hold[s]);
        for (StateId lg = legal_mask(s, mp.L); lg; lg &= lg - 1) {
            int b = std::countr_zero(lg);
            StateId t = s ^ (StateId(1) << b);
            if (c.pos[t] >= 0) trip.emplace_back(i, c.pos[t], -(((s >> b) & 1u) ? mp.q : mp.p()));
        }
    }
    Eigen::SparseMatrix<double> A(m, m);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
    Eigen::VectorXd h;
    if (m <= 1024) {
        Eigen::MatrixXd Ad(A);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(Ad);
        h = lu.solve(ones);
        h += lu.solve(ones - Ad * h);
        out.method = "linear-solve-dense";
    } else {
        A.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(A);
        if (lu.info() != Eigen::Success) throw SolverError("singular absorbing system", 0.0);
        h = lu.solve(ones);
        h += lu.solve(ones - A * h);
        out.method = "linear-solve-sparse";
    }
    Eigen::VectorXd r = A * h - ones;
    double anorm = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) anorm = std::max(anorm, 2.0 * g.hold[c.ids[i]]);
    out.residual = r.lpNorm<Eigen::Infinity>() / std::max(1.0, anorm * h.lpNorm<Eigen::Infinity>());
    if (!(out.residual < 1e-10) || !h.allFinite()) throw SolverError("hitting-time residual too large", out.residual);
    for (Eigen::Index i = 0; i < m; ++i) out.h[c.ids[i]] = h[i];
    return out;
}

double mean_hitting_time(const ModelParams& mp, StateId start, const StateSet& target) {
    check_set(mp, target);
    if (start >= target.size()) throw std::out_of_range("start outside state space");
    if (target[start]) return 0.0;
    return hitting_times(mp, target).h[start];
}

double T_hit(const ModelParams& mp) { return mean_hitting_time(mp, ones_then_zero_id(mp.L), site_is(mp.L, mp.L, 1)); }

double hat_tau_mean(const ModelParams& mp) { return mean_hitting_time(mp, all_ones(mp.L), site_is(mp.L, mp.L, 0)); }

Eigen::MatrixXd expm_uniformized(const Eigen::MatrixXd& Q, double Lambda, double t) {
    if (t < 0.0) throw std::invalid_argument("negative time");
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(Q.rows(), Q.cols()) + Q / Lambda;
    return expm_from_uniformized(P, Lambda * t);
}

SurvivalCurve::SurvivalCurve(const ModelParams& mp, StateId start, const StateSet& target) {
    check_set(mp, target);
    if (target[start]) throw std::invalid_argument("start lies in the target set");
    Generator g = build_generator(mp);
    Complement c = complement_of(target);
    const Eigen::Index m = Eigen::Index(c.ids.size());
    if (m > kSemigroupCap) throw CapExceeded("survival semigroup limited to 2048 transient states");
    Lambda_ = g.max_holding_rate() + 1.0;
    P_ = Eigen::MatrixXd::Identity(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        StateId s = c.ids[i];
        P_(i, i) -= g.hold[s] / Lambda_;
        for (StateId lg = legal_mask(s, mp.L); lg; lg &= lg - 1) {
            int b = std::countr_zero(lg);
            StateId t = s ^ (StateId(1) << b);
            if (c.pos[t] >= 0) P_(i, c.pos[t]) += (((s >> b) & 1u) ? mp.q : mp.p()) / Lambda_;
        }
    }
    start_ = c.pos[start];
}

double SurvivalCurve::operator()(double t) const {
    if (t < 0.0) throw std::invalid_argument("negative time");
    if (t == 0.0) return 1.0;
    Eigen::MatrixXd M = expm_from_uniformized(P_, Lambda_ * t);
    return M.row(start_).sum();
}

std::vector<double> SurvivalCurve::on_grid(double step, int count) const {
    if (!(step > 0.0) || count < 0) throw std::invalid_argument("grid needs a positive step");
    Eigen::MatrixXd E = expm_from_uniformized(P_, Lambda_ * step);
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(P_.cols());
    row[start_] = 1.0;
    std::vector<double> out{1.0};
    for (int k = 1; k <= count; ++k) {
        row = row * E;
        out.push_back(row.sum());
    }
    return out;
}

double SurvivalCurve::quantile(double level, double rel_tol) const {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
    const double h = 0.5 / Lambda_;
    auto F = [&](const Eigen::MatrixXd& M) { return M.row(start_).sum(); };
    std::vector<Eigen::MatrixXd> G{poisson_series(P_, 0.5)};
    while (F(G.back()) > level) {
        if (G.size() > 120) throw std::runtime_error("quantile bracket failure");
        G.push_back(G.back() * G.back());
    }
    const int J = int(G.size()) - 1;
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(P_.cols());
    double t_lo = 0.0;
    if (J == 0) {
        row[start_] = 1.0;
    } else {
        row = G[J - 1].row(start_);
        t_lo = std::ldexp(h, J - 1);
        for (int j = J - 2; j >= 0; --j) {
            Eigen::RowVectorXd cand = row * G[j];
            if (cand.sum() > level) {
                row = cand;
                t_lo += std::ldexp(h, j);
            }
        }
    }
    const int K = series_length(0.5);
    std::vector<double> f(K + 1);
    for (int k = 0; k <= K; ++k) {
        f[k] = row.sum();
        row = row * P_;
    }
    auto surv = [&](double delta) {
        auto w = poisson_weights(Lambda_ * delta, K);
        double s = 0.0;
        for (int k = 0; k <= K; ++k) s += w[k] * f[k];
        return s;
    };
    double lo = 0.0, hi = h;
    while (hi - lo > rel_tol * (t_lo + hi) * 0.5) {
        double mid = 0.5 * (lo + hi);
        if (surv(mid) > level)
            lo = mid;
        else
            hi = mid;
    }
    return t_lo + 0.5 * (lo + hi);
}

double survival(const ModelParams& mp, StateId start, const StateSet& target, double t) {
    if (target.at(start)) return 0.0;
    return SurvivalCurve(mp, start, target)(t);
}

double quantile_time(const ModelParams& mp, double level) {
    SurvivalCurve sc(mp, ones_then_zero_id(mp.L), site_is(mp.L, mp.L, 1));
    return sc.quantile(level);
}

MixingResult mixing(const ModelParams& mp, double threshold, double rel_tol) {
    if (mp.L > kDenseGapMax) throw CapExceeded("mixing time limited to L <= 10");
    if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
    Generator g = build_generator(mp);
    const double Lambda = g.max_holding_rate() + 1.0;
    const Eigen::Index n = Eigen::Index(g.size());
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) + g.dense() / Lambda;
    const double h = 0.5 / Lambda;
    Eigen::Index worst = 0;
    auto D = [&](const Eigen::MatrixXd& M) { return row_sum_tv(M, g.pi, worst); };

    std::vector<Eigen::MatrixXd> G{poisson_series(P, 0.5)};
    while (D(G.back()) > threshold) {
        if (G.size() > 120) throw std::runtime_error("mixing bracket failure");
        G.push_back(G.back() * G.back());
    }
    const int J = int(G.size()) - 1;
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    double t_lo = 0.0;
    if (J > 0) {
        M = G[J - 1];
        t_lo = std::ldexp(h, J - 1);
        for (int j = J - 2; j >= 0; --j) {
            Eigen::MatrixXd C = M * G[j];
            if (D(C) > threshold) {
                M = std::move(C);
                t_lo += std::ldexp(h, j);
            }
        }
    }
    G.clear();
    const int K = series_length(0.5);
    std::vector<Eigen::MatrixXd> B;
    B.reserve(K + 1);
    B.push_back(M);
    for (int k = 1; k <= K; ++k) B.push_back(B.back() * P);
    auto dist = [&](double delta) {
        auto w = poisson_weights(Lambda * delta, K);
        Eigen::MatrixXd S = w[0] * B[0];
        for (int k = 1; k <= K; ++k) S += w[k] * B[k];
        return D(S);
    };
    double lo = 0.0, hi = h;
    while (hi - lo > rel_tol * (t_lo + hi) * 0.5) {
        double mid = 0.5 * (lo + hi);
        if (dist(mid) > threshold)
            lo = mid;
        else
            hi = mid;
    }
    MixingResult r;
    r.tmix = t_lo + hi;
    r.tv_at = dist(hi);
    r.worst_start = StateId(worst);
    return r;
}

double mixing_time(const ModelParams& mp, double threshold) { return mixing(mp, threshold).tmix; }

double tv_distance(const ModelParams& mp, double t) {
    if (mp.L > kDenseGapMax) throw CapExceeded("semigroup limited to L <= 10");
    Generator g = build_generator(mp);
    Eigen::MatrixXd M = expm_uniformized(g.dense(), g.max_holding_rate() + 1.0, t);
    Eigen::Index worst = 0;
    return row_sum_tv(M, g.pi, worst);
}

DirichletValue dirichlet_form(const ModelParams& mp, const std::vector<double>& f) {
    const StateId n = StateId(1) << mp.L;
    if (f.size() != n) throw std::invalid_argument("function size differs from 2^L");
    const double p = mp.p(), q = mp.q;
    std::vector<double> w(mp.L + 1);
    for (int z = 0; z <= mp.L; ++z) w[z] = std::pow(q, z) * std::pow(p, mp.L - z);
    double cv = 0.0, rt = 0.0, scale = 0.0;
    for (StateId s = 0; s < n; ++s) {
        const double pi = w[mp.L - std::popcount(s)];
        scale += pi * f[s] * f[s];
        for (int x = 1; x <= mp.L; ++x) {
            if (!constraint_bits(s, x)) continue;
            const StateId bit = StateId(1) << (x - 1);
            const double f1 = f[s | bit], f0 = f[s & ~bit];
            const double mean = p * f1 + q * f0;
            cv += pi * (p * f1 * f1 + q * f0 * f0 - mean * mean);
            const double diff = f[s ^ bit] - f[s];
            rt += 0.5 * pi * ((s & bit) ? q : p) * diff * diff;
        }
    }
    DirichletValue d{rt, cv, rt};
    if (std::abs(cv - rt) > 1e-12 * std::max(rt, 1e-3 * scale * mp.L) + 1e-300)
        throw std::logic_error("Dirichlet form formulas disagree");
    return d;
}

double variance(const ModelParams& mp, const std::vector<double>& f) {
    const StateId n = StateId(1) << mp.L;
    if (f.size() != n) throw std::invalid_argument("function size differs from 2^L");
    Generator g = build_generator(mp);
    double m1 = 0.0;
    for (StateId s = 0; s < n; ++s) m1 += g.pi[s] * f[s];
    double v = 0.0;
    for (StateId s = 0; s < n; ++s) v += g.pi[s] * (f[s] - m1) * (f[s] - m1);
    return v;
}

TimescaleReport timescales(const ModelParams& mp, bool with_mixing) {
    TimescaleReport r;
    r.mp = mp;
    EigenResult er = spectral_gap(mp);
    r.trel = er.trel;
    r.method_trel = er.method;
    r.resid_trel = er.residual;
    HittingResult hr = hitting_times(mp, site_is(mp.L, mp.L, 1));
    r.thit = hr.h[ones_then_zero_id(mp.L)];
    r.method_thit = "linear-solve";
    r.resid_thit = hr.residual;
    if (mp.L <= 11) r.tquant = quantile_time(mp);
    if (with_mixing && mp.L <= kDenseGapMax) {
        r.tmix = mixing_time(mp);
        r.has_tmix = true;
    }
    return r;
}

}  // namespace eastlab::exact
