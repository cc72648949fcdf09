#include "eastlab/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace eastlab {

KrylovResult smallest_eigenpair(const SymOperator& A, Eigen::Index n, const Eigen::VectorXd& u,
                                const KrylovOptions& opt) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    KrylovResult res;
    const int m = int(std::min<Eigen::Index>(opt.max_basis, n - 1));
    if (m < 1) throw std::invalid_argument("krylov: dimension too small");
    const int keep = std::clamp(opt.keep, 1, std::max(1, m - 2));

    MatrixXd V(n, m + 1);
    MatrixXd H = MatrixXd::Zero(m + 1, m);
    VectorXd w(n);

    auto project = [&](VectorXd& v) { v -= u * u.dot(v); };

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd;
    VectorXd v0(n);
    for (Eigen::Index i = 0; i < n; ++i) v0[i] = nd(rng);
    project(v0);
    V.col(0) = v0.normalized();

    int k = 0;
    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        for (int j = k; j < m; ++j) {
            A(V.col(j).data(), w.data());
            ++res.matvecs;
            project(w);
            for (int pass = 0; pass < 2; ++pass) {
                VectorXd h = V.leftCols(j + 1).transpose() * w;
                w -= V.leftCols(j + 1) * h;
                H.col(j).head(j + 1) += h;
            }
            project(w);
            double beta = w.norm();
            H(j + 1, j) = beta;
            if (beta < 1e-300) {
                // invariant subspace: restart with a fresh random direction
                for (Eigen::Index i = 0; i < n; ++i) w[i] = nd(rng);
                project(w);
                w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
                beta = w.norm();
                H(j + 1, j) = 0.0;
            }
            V.col(j + 1) = w / beta;
        }

        MatrixXd T = H.topRows(m);
        T = 0.5 * (T + T.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(T);
        const VectorXd& theta = es.eigenvalues();
        const MatrixXd& S = es.eigenvectors();
        Eigen::RowVectorXd brow = H.row(m);
        double ritz_res = std::abs(brow.dot(S.col(0)));

        if (ritz_res < opt.tol) {
            VectorXd x = V.leftCols(m) * S.col(0);
            project(x);
            x.normalize();
            VectorXd ax(n);
            A(x.data(), ax.data());
            ++res.matvecs;
            double lam = x.dot(ax);
            double true_res = (ax - lam * x).norm();
            if (true_res < 10 * opt.tol || restart == opt.max_restarts) {
                res.eigenvalue = lam;
                res.vector = std::move(x);
                res.residual = true_res;
                res.restarts = restart;
                res.converged = true_res < 10 * opt.tol;
                return res;
            }
        }
        if (restart == opt.max_restarts) break;

        // thick restart: keep the `keep` smallest Ritz vectors plus the residual direction
        MatrixXd Vk = V.leftCols(m) * S.leftCols(keep);
        V.leftCols(keep) = Vk;
        V.col(keep) = V.col(m);
        MatrixXd Hn = MatrixXd::Zero(m + 1, m);
        for (int i = 0; i < keep; ++i) Hn(i, i) = theta[i];
        Hn.row(keep).head(keep) = brow * S.leftCols(keep);
        H = Hn;
        k = keep;
    }

    VectorXd x = V.col(0);
    VectorXd ax(n);
    A(x.data(), ax.data());
    res.eigenvalue = x.dot(ax);
    res.vector = x;
    res.residual = (ax - res.eigenvalue * x).norm();
    res.converged = false;
    return res;
}

}  // namespace eastlab
