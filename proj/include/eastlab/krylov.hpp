#pragma once

#include <Eigen/Dense>
#include <functional>

namespace eastlab {

// y = A x for a symmetric operator of dimension n
using SymOperator = std::function<void(const double* x, double* y)>;

struct KrylovOptions {
    int max_basis = 60;
    int keep = 20;
    int max_restarts = 2000;
    double tol = 1e-11;
    unsigned long long seed = 12345;
};

struct KrylovResult {
    double eigenvalue = 0.0;
    Eigen::VectorXd vector;
    double residual = 0.0;  // ||A v - lambda v|| with ||v|| = 1
    int matvecs = 0;
    int restarts = 0;
    bool converged = false;
};

// Smallest eigenpair of A restricted to the orthogonal complement of `deflate` (unit vector,
// assumed to be an exact eigenvector). Thick-restart Lanczos with full reorthogonalization.
KrylovResult smallest_eigenpair(const SymOperator& A, Eigen::Index n, const Eigen::VectorXd& deflate,
                                const KrylovOptions& opt = {});

}  // namespace eastlab
