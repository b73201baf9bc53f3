#include "primeie/kernels.hpp"

#include <algorithm>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace primeie {
inline namespace PRIMEIE_ABI {
namespace kernels {

namespace {

constexpr long kParallelThreshold = 1L << 16;

inline void gemm_row(const Real* a, const Real* b, Real* c, int i, int k, int n) {
  Real* crow = c + static_cast<std::size_t>(i) * n;
  const Real* arow = a + static_cast<std::size_t>(i) * k;
  for (int p = 0; p < k; ++p) {
    const Real av = arow[p];
    if (av == Real(0)) continue;
    const Real* brow = b + static_cast<std::size_t>(p) * n;
    for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

// Row p of C = A^T B gathers column p of A against all rows of B.
inline void gemm_tn_row(const Real* a, const Real* b, Real* c, int p, int m, int k, int n) {
  Real* crow = c + static_cast<std::size_t>(p) * n;
  for (int i = 0; i < m; ++i) {
    const Real av = a[static_cast<std::size_t>(i) * k + p];
    if (av == Real(0)) continue;
    const Real* brow = b + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

std::vector<Real> transpose(const Real* b, int n, int k) {
  std::vector<Real> bt(static_cast<std::size_t>(k) * n);
  for (int j = 0; j < n; ++j)
    for (int p = 0; p < k; ++p) bt[static_cast<std::size_t>(p) * n + j] = b[static_cast<std::size_t>(j) * k + p];
  return bt;
}

}  // namespace

void gemm_serial(const Real* a, const Real* b, Real* c, int m, int k, int n, bool accumulate) {
  if (!accumulate) std::fill(c, c + static_cast<std::size_t>(m) * n, Real(0));
  for (int i = 0; i < m; ++i) gemm_row(a, b, c, i, k, n);
}

void gemm_parallel(const Real* a, const Real* b, Real* c, int m, int k, int n, bool accumulate) {
  if (!accumulate) std::fill(c, c + static_cast<std::size_t>(m) * n, Real(0));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) gemm_row(a, b, c, i, k, n);
}

void gemm_tn_serial(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  for (int p = 0; p < k; ++p) gemm_tn_row(a, b, c, p, m, k, n);
}

void gemm_tn_parallel(const Real* a, const Real* b, Real* c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
  for (int p = 0; p < k; ++p) gemm_tn_row(a, b, c, p, m, k, n);
}

void gemm_nt_serial(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  const std::vector<Real> bt = transpose(b, n, k);
  for (int i = 0; i < m; ++i) gemm_row(a, bt.data(), c, i, k, n);
}

void gemm_nt_parallel(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  const std::vector<Real> bt = transpose(b, n, k);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) gemm_row(a, bt.data(), c, i, k, n);
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void gemm(const Real* a, const Real* b, Real* c, int m, int k, int n, bool accumulate) {
  if (max_threads() > 1 && static_cast<long>(m) * k * n >= kParallelThreshold && m > 1)
    gemm_parallel(a, b, c, m, k, n, accumulate);
  else
    gemm_serial(a, b, c, m, k, n, accumulate);
}

void gemm_tn(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  if (max_threads() > 1 && static_cast<long>(m) * k * n >= kParallelThreshold && k > 1)
    gemm_tn_parallel(a, b, c, m, k, n);
  else
    gemm_tn_serial(a, b, c, m, k, n);
}

void gemm_nt(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  if (max_threads() > 1 && static_cast<long>(m) * k * n >= kParallelThreshold && m > 1)
    gemm_nt_parallel(a, b, c, m, k, n);
  else
    gemm_nt_serial(a, b, c, m, k, n);
}

}  // namespace kernels
}  // namespace PRIMEIE_ABI
}  // namespace primeie
