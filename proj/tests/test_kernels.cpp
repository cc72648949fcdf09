#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "eastlab/exact.hpp"
#include "eastlab/kernels.hpp"

using namespace eastlab;

static std::vector<double> random_vec(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

TEST_CASE("sym_matvec serial equals parallel and matches the dense matrix") {
    for (int L : {1, 3, 6, 9}) {
        const double q = 0.23;
        const std::size_t n = std::size_t(1) << L;
        auto x = random_vec(n, 11 + L);
        std::vector<double> ys(n), yp(n);
        kernels::serial::sym_matvec(L, q, x.data(), ys.data());
        kernels::parallel::sym_matvec(L, q, x.data(), yp.data());
        CHECK(ys == yp);
        Eigen::MatrixXd S = exact::build_generator(ModelParams(L, q)).dense_symmetrized();
        Eigen::VectorXd ref = S * Eigen::Map<Eigen::VectorXd>(x.data(), n);
        for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(ref[i] - ys[i]) < 1e-13);
    }
}

TEST_CASE("generator_apply serial equals parallel and matches Q f") {
    for (int L : {2, 5, 8}) {
        const double q = 0.31;
        const std::size_t n = std::size_t(1) << L;
        auto f = random_vec(n, 5 + L);
        std::vector<double> a(n), b(n);
        kernels::serial::generator_apply(L, q, f.data(), a.data());
        kernels::parallel::generator_apply(L, q, f.data(), b.data());
        CHECK(a == b);
        Eigen::MatrixXd Q = exact::build_generator(ModelParams(L, q)).dense();
        Eigen::VectorXd ref = Q * Eigen::Map<Eigen::VectorXd>(f.data(), n);
        for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(ref[i] - a[i]) < 1e-13);
    }
}

TEST_CASE("astar_scan serial equals parallel") {
    for (int L = 1; L <= 14; ++L) CHECK(kernels::serial::astar_scan(L) == kernels::parallel::astar_scan(L));
}

TEST_CASE("ring_update serial equals parallel") {
    std::mt19937_64 rng(3);
    const int L = 12;
    std::vector<StateId> a(10000);
    for (auto& s : a) s = rng() & all_ones(L);
    auto b = a;
    for (int k = 0; k < 200; ++k) {
        int x = 1 + int(rng() % L);
        int coin = int(rng() & 1u);
        kernels::serial::ring_update(a, x, coin);
        kernels::parallel::ring_update(b, x, coin);
    }
    CHECK(a == b);
}

TEST_CASE("thread count is positive") { CHECK(kernels::max_threads() >= 1); }
