#pragma once

#include "primeie/real.hpp"

// Dense matrix kernels. Every kernel has a plain serial reference and an
// OpenMP variant that partitions output rows across threads. Each output
// element is accumulated in the same order in both, so results are
// bit-identical regardless of thread count.

namespace primeie {
inline namespace PRIMEIE_ABI {
namespace kernels {

// C[m x n] (+)= A[m x k] * B[k x n]
void gemm_serial(const Real* a, const Real* b, Real* c, int m, int k, int n, bool accumulate);
void gemm_parallel(const Real* a, const Real* b, Real* c, int m, int k, int n, bool accumulate);

// C[k x n] += A[m x k]^T * B[m x n]
void gemm_tn_serial(const Real* a, const Real* b, Real* c, int m, int k, int n);
void gemm_tn_parallel(const Real* a, const Real* b, Real* c, int m, int k, int n);

// C[m x n] += A[m x k] * B[n x k]^T
void gemm_nt_serial(const Real* a, const Real* b, Real* c, int m, int k, int n);
void gemm_nt_parallel(const Real* a, const Real* b, Real* c, int m, int k, int n);

// Dispatchers: use the parallel variant when more than one thread is
// available and the product is large enough to amortize the fork.
void gemm(const Real* a, const Real* b, Real* c, int m, int k, int n, bool accumulate);
void gemm_tn(const Real* a, const Real* b, Real* c, int m, int k, int n);
void gemm_nt(const Real* a, const Real* b, Real* c, int m, int k, int n);

int max_threads();

}  // namespace kernels
}  // namespace PRIMEIE_ABI
}  // namespace primeie
