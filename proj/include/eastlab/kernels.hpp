#pragma once

#include <cstdint>
#include <vector>

#include "eastlab/core.hpp"

namespace eastlab::kernels {

// y = S x with S = D^{1/2} (-Q) D^{-1/2}, D = diag(pi). Off-diagonal entries are -sqrt(pq).
namespace serial {
void sym_matvec(int L, double q, const double* x, double* y);
void generator_apply(int L, double q, const double* f, double* out);
std::vector<std::uint8_t> astar_scan(int L);
void ring_update(std::vector<StateId>& states, int x, int coin);
}  // namespace serial

namespace parallel {
void sym_matvec(int L, double q, const double* x, double* y);
void generator_apply(int L, double q, const double* f, double* out);
std::vector<std::uint8_t> astar_scan(int L);
void ring_update(std::vector<StateId>& states, int x, int coin);
}  // namespace parallel

int max_threads();

}  // namespace eastlab::kernels
