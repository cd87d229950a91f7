// Microbenchmark for the GEMM kernels; prints GFLOP/s for the shapes the
// convolution layers actually produce.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "lfd/nn/gemm.hpp"
#include "lfd/rng.hpp"

using clock_type = std::chrono::steady_clock;

static double bench(long M, long K, long N, int threads) {
  lfd::nn::set_threads(threads);
  std::vector<float> A(M * K), B(K * N), C(M * N);
  lfd::Rng rng(42);
  for (auto& v : A) v = static_cast<float>(rng.next_double()) - 0.5f;
  for (auto& v : B) v = static_cast<float>(rng.next_double()) - 0.5f;

  auto run = [&] { lfd::nn::gemm(A.data(), B.data(), C.data(), M, K, N); };
  run();  // warm up
  int reps = 1;
  double secs = 0;
  for (;;) {
    auto t0 = clock_type::now();
    for (int r = 0; r < reps; ++r) run();
    secs = std::chrono::duration<double>(clock_type::now() - t0).count();
    if (secs > 0.5) break;
    reps *= 2;
  }
  const double flops = 2.0 * M * K * N * reps;
  return flops / secs / 1e9;
}

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : 1;
  struct Shape { long M, K, N; const char* what; };
  const Shape shapes[] = {
      {32, 288, 4096, "conv 32->32 @64x64"},
      {64, 576, 1024, "conv 64->64 @32x32"},
      {128, 1152, 256, "conv 128->128 @16x16"},
      {64, 1152, 4096, "tconv 128->64 @64... wide"},
      {128, 1152, 1024, "tconv @32x32"},
      {32, 576, 16384, "tconv 64->32 @128x128"},
  };
  std::printf("threads=%d\n", threads);
  for (const auto& s : shapes) {
    double g = bench(s.M, s.K, s.N, threads);
    std::printf("gemm    M=%4ld K=%5ld N=%6ld  %7.2f GFLOP/s  (%s)\n", s.M, s.K, s.N, g, s.what);
  }
  return 0;
}
