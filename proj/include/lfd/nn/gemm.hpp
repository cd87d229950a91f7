#pragma once

#include <algorithm>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lfd::nn {

// Worker threads used by the tensor ops. 1 = strictly serial. The kernels
// below parallelize over disjoint output tiles with a serial k-loop per
// element, so results are bitwise identical for every thread count.
inline int& thread_count() {
  static int n = 1;
  return n;
}

inline void set_threads(int n) { thread_count() = n < 1 ? 1 : n; }

namespace gemm_detail {

constexpr int kMR = 4;   // rows per microkernel tile
constexpr int kNR = 64;  // columns per microkernel tile (4 AVX-512 lanes)

// C tile[mr x kNR] (+)= A[mr rows, K] * Bp (packed K x kNR panel).
// acc stays in registers; the j-loop vectorizes to FMA over the panel.
template <int MR>
inline void micro_kernel(const float* A, long lda, const float* Bp, long K,
                         float* C, long ldc, long jn, bool accumulate) {
  float acc[MR][kNR];
  for (int i = 0; i < MR; ++i)
    for (int j = 0; j < kNR; ++j) acc[i][j] = 0.f;
  for (long k = 0; k < K; ++k) {
    const float* b = Bp + k * kNR;
    for (int i = 0; i < MR; ++i) {
      const float a = A[i * lda + k];
      for (int j = 0; j < kNR; ++j) acc[i][j] += a * b[j];
    }
  }
  for (int i = 0; i < MR; ++i) {
    float* c = C + i * ldc;
    if (accumulate) {
      for (long j = 0; j < jn; ++j) c[j] += acc[i][j];
    } else {
      for (long j = 0; j < jn; ++j) c[j] = acc[i][j];
    }
  }
}

inline void pack_b_panel(const float* B, long ldb, long K, long jn, float* Bp) {
  for (long k = 0; k < K; ++k) {
    const float* src = B + k * ldb;
    float* dst = Bp + k * kNR;
    long j = 0;
    for (; j < jn; ++j) dst[j] = src[j];
    for (; j < kNR; ++j) dst[j] = 0.f;
  }
}

inline void gemm_block(const float* A, const float* B, float* C, long M, long K,
                       long N, bool accumulate, long j0, long j1, float* Bp) {
  for (long jj = j0; jj < j1; jj += kNR) {
    const long jn = std::min<long>(kNR, N - jj);
    pack_b_panel(B + jj, N, K, jn, Bp);
    long ii = 0;
    for (; ii + kMR <= M; ii += kMR)
      micro_kernel<kMR>(A + ii * K, K, Bp, K, C + ii * N + jj, N, jn, accumulate);
    for (; ii < M; ++ii)
      micro_kernel<1>(A + ii * K, K, Bp, K, C + ii * N + jj, N, jn, accumulate);
  }
}

}  // namespace gemm_detail

// C[M x N] = A[M x K] * B[K x N] (all row-major); += if accumulate.
inline void gemm(const float* A, const float* B, float* C, long M, long K,
                 long N, bool accumulate = false) {
  using namespace gemm_detail;
  const long n_panels = (N + kNR - 1) / kNR;
  int threads = thread_count();
#ifdef _OPENMP
  if (threads > 1 && n_panels > 1) {
#pragma omp parallel num_threads(threads)
    {
      std::vector<float> Bp(static_cast<size_t>(K) * kNR);
#pragma omp for schedule(static)
      for (long p = 0; p < n_panels; ++p) {
        const long jj = p * kNR;
        gemm_block(A, B, C, M, K, N, accumulate, jj, std::min(jj + kNR, N), Bp.data());
      }
    }
    return;
  }
#endif
  std::vector<float> Bp(static_cast<size_t>(K) * kNR);
  gemm_block(A, B, C, M, K, N, accumulate, 0, N, Bp.data());
}

// dst[N x M] = src[M x N] transposed, blocked for cache friendliness.
// Weight gradients route through this so both gradient GEMMs can use the
// fast packed kernel above.
inline void transpose(const float* src, long M, long N, float* dst) {
  constexpr long B = 32;
  for (long i0 = 0; i0 < M; i0 += B) {
    const long i1 = std::min(i0 + B, M);
    for (long j0 = 0; j0 < N; j0 += B) {
      const long j1 = std::min(j0 + B, N);
      for (long i = i0; i < i1; ++i)
        for (long j = j0; j < j1; ++j) dst[j * M + i] = src[i * N + j];
    }
  }
}

}  // namespace lfd::nn
