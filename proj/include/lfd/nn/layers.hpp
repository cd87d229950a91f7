#pragma once

#include <cstdint>
#include <cstring>
#include <functional>
#include <vector>

#include "lfd/nn/gemm.hpp"
#include "lfd/nn/tensor.hpp"

namespace lfd::nn {

// Weights of one convolution bank. Kernels are 3x3 or 1x1, stride 1, zero
// padding that preserves the spatial size. Layout [c_out][c_in][ky][kx],
// so the flattened matrix is [c_out x (c_in*k*k)] and lines up with the
// im2col patch rows below.
struct ConvWeights {
  int c_out = 0, c_in = 0, k = 3;
  std::vector<float> w;
  std::vector<float> b;

  ConvWeights() = default;
  ConvWeights(int c_out_, int c_in_, int k_)
      : c_out(c_out_), c_in(c_in_), k(k_),
        w(static_cast<size_t>(c_out_) * c_in_ * k_ * k_, 0.f), b(c_out_, 0.f) {
    require(k_ == 1 || k_ == 3, "ConvWeights: kernel must be 1x1 or 3x3");
  }

  long rows() const { return c_out; }
  long cols() const { return static_cast<long>(c_in) * k * k; }
};

namespace detail {

// Per-thread scratch, retained across calls so the training loop does not
// allocate per batch.
struct Workspace {
  std::vector<float> patches;     // K x N im2col buffer
  std::vector<float> patch_grad;  // K x N patch-space gradient
  std::vector<float> transposed;  // N x C buffer for the weight-grad GEMM

  float* patch_buf(size_t n) { if (patches.size() < n) patches.resize(n); return patches.data(); }
  float* pgrad_buf(size_t n) { if (patch_grad.size() < n) patch_grad.resize(n); return patch_grad.data(); }
  float* trans_buf(size_t n) { if (transposed.size() < n) transposed.resize(n); return transposed.data(); }
};

inline Workspace& tls_workspace() {
  static thread_local Workspace ws;
  return ws;
}

// Runs fn(sample, workspace, slot) for every sample, in parallel when the
// batch and the configured thread count allow it. Slots are the OpenMP
// thread indices (0..threads-1), stable under schedule(static), so callers
// may keep per-slot accumulators and reduce them in slot order. threads = 1
// degenerates to a strictly serial loop.
template <typename F>
void for_samples(int n, const F& fn) {
  const int threads = std::min(thread_count(), n);
#ifdef _OPENMP
  if (threads > 1) {
#pragma omp parallel num_threads(threads)
    {
      Workspace& ws = tls_workspace();
#pragma omp for schedule(static)
      for (int s = 0; s < n; ++s) fn(s, ws, omp_get_thread_num());
    }
    return;
  }
#endif
  Workspace& ws = tls_workspace();
  for (int s = 0; s < n; ++s) fn(s, ws, 0);
}

inline int sample_slots(int n) { return std::min(thread_count(), std::max(n, 1)); }

// Patch matrix for a 3x3 same-padding window: row (ci*9 + ky*3 + kx) holds
// the image plane ci shifted by (ky-1, kx-1) with zero borders.
inline void im2col3x3(const float* x, int C, int H, int W, float* P) {
  const long N = static_cast<long>(H) * W;
  for (int ci = 0; ci < C; ++ci) {
    const float* plane = x + static_cast<long>(ci) * N;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        float* row = P + (static_cast<long>(ci) * 9 + ky * 3 + kx) * N;
        const int dy = ky - 1, dx = kx - 1;
        for (int y = 0; y < H; ++y) {
          float* dst = row + static_cast<long>(y) * W;
          const int yy = y + dy;
          if (yy < 0 || yy >= H) {
            std::memset(dst, 0, sizeof(float) * W);
            continue;
          }
          const float* src = plane + static_cast<long>(yy) * W;
          if (dx == 0) {
            std::memcpy(dst, src, sizeof(float) * W);
          } else if (dx < 0) {
            dst[0] = 0.f;
            std::memcpy(dst + 1, src, sizeof(float) * (W - 1));
          } else {
            std::memcpy(dst, src + 1, sizeof(float) * (W - 1));
            dst[W - 1] = 0.f;
          }
        }
      }
    }
  }
}

// Adjoint of im2col3x3: scatter-adds patch rows back into the image.
inline void col2im3x3(const float* P, int C, int H, int W, float* x) {
  const long N = static_cast<long>(H) * W;
  std::memset(x, 0, sizeof(float) * C * N);
  for (int ci = 0; ci < C; ++ci) {
    float* plane = x + static_cast<long>(ci) * N;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const float* row = P + (static_cast<long>(ci) * 9 + ky * 3 + kx) * N;
        const int dy = ky - 1, dx = kx - 1;
        for (int y = 0; y < H; ++y) {
          const int yy = y + dy;
          if (yy < 0 || yy >= H) continue;
          const float* src = row + static_cast<long>(y) * W;
          float* dst = plane + static_cast<long>(yy) * W;
          const int x0 = dx < 0 ? 1 : 0;
          const int x1 = dx > 0 ? W - 1 : W;
          for (int xi = x0; xi < x1; ++xi) dst[xi + dx] += src[xi];
        }
      }
    }
  }
}

inline void add_bias(float* out, const std::vector<float>& b, long N) {
  for (size_t oc = 0; oc < b.size(); ++oc) {
    float* row = out + oc * N;
    const float bias = b[oc];
    for (long i = 0; i < N; ++i) row[i] += bias;
  }
}

// Serial per-channel sum of gout over the whole batch; accumulation order
// is fixed regardless of thread count.
inline void accumulate_bias_grad(const Tensor4& gout, std::vector<float>& grad_b) {
  const long N = gout.plane();
  for (size_t oc = 0; oc < grad_b.size(); ++oc) {
    double s = 0;
    for (int n = 0; n < gout.n; ++n) {
      const float* g = gout.sample(n) + oc * N;
      for (long i = 0; i < N; ++i) s += g[i];
    }
    grad_b[oc] += static_cast<float>(s);
  }
}

// Per-slot [K x M] weight-gradient partials, reduced in slot order and
// transposed into the [M x K] weight layout.
struct WeightGradAccum {
  std::vector<std::vector<float>> slots;
  long K = 0, M = 0;

  WeightGradAccum(int n_slots, long K_, long M_) : K(K_), M(M_) {
    slots.assign(n_slots, std::vector<float>(static_cast<size_t>(K_) * M_, 0.f));
  }

  void reduce_into(std::vector<float>& grad_w) const {
    for (long kk = 0; kk < K; ++kk)
      for (long m = 0; m < M; ++m) {
        double s = 0;
        for (const auto& slot : slots) s += slot[kk * M + m];
        grad_w[m * K + kk] += static_cast<float>(s);
      }
  }
};

}  // namespace detail

// out[n, c_out, H, W] = cross-correlation of x with w (same padding) + bias.
inline void conv2d_forward(const Tensor4& x, const ConvWeights& wb, Tensor4& out) {
  require(x.c == wb.c_in, "conv2d_forward: channel mismatch");
  out.resize(x.n, wb.c_out, x.h, x.w);
  const long N = x.plane();
  const long K = wb.cols();
  detail::for_samples(x.n, [&](int s, detail::Workspace& ws, int) {
    const float* xs = x.sample(s);
    float* os = out.sample(s);
    const float* patches = xs;  // 1x1 kernel: the image is its own patch matrix
    if (wb.k == 3) {
      float* P = ws.patch_buf(static_cast<size_t>(K) * N);
      detail::im2col3x3(xs, x.c, x.h, x.w, P);
      patches = P;
    }
    gemm(wb.w.data(), patches, os, wb.rows(), K, N);
    detail::add_bias(os, wb.b, N);
  });
}

// Gradients of conv2d_forward. grad_x may be null when the input gradient
// is not needed (first layer). grad_w/grad_b are accumulated into.
inline void conv2d_backward(const Tensor4& x, const ConvWeights& wb,
                            const Tensor4& gout, Tensor4* grad_x,
                            ConvWeights& grad_wb) {
  require(x.c == wb.c_in && gout.c == wb.c_out, "conv2d_backward: channel mismatch");
  require(gout.n == x.n && gout.h == x.h && gout.w == x.w,
          "conv2d_backward: shape mismatch");
  const long N = x.plane();
  const long K = wb.cols();
  const long M = wb.rows();

  detail::accumulate_bias_grad(gout, grad_wb.b);

  std::vector<float> wT;
  if (grad_x != nullptr) {
    grad_x->resize(x.n, x.c, x.h, x.w);
    wT.resize(static_cast<size_t>(K) * M);
    transpose(wb.w.data(), M, K, wT.data());
  }

  detail::WeightGradAccum acc(detail::sample_slots(x.n), K, M);
  detail::for_samples(x.n, [&](int s, detail::Workspace& ws, int slot) {
    const float* gs = gout.sample(s);
    const float* patches = x.sample(s);
    if (wb.k == 3) {
      float* P = ws.patch_buf(static_cast<size_t>(K) * N);
      detail::im2col3x3(x.sample(s), x.c, x.h, x.w, P);
      patches = P;
    }
    float* gT = ws.trans_buf(static_cast<size_t>(N) * M);
    transpose(gs, M, N, gT);
    gemm(patches, gT, acc.slots[slot].data(), K, N, M, /*accumulate=*/true);

    if (grad_x != nullptr) {
      if (wb.k == 3) {
        float* PG = ws.pgrad_buf(static_cast<size_t>(K) * N);
        gemm(wT.data(), gs, PG, K, M, N);
        detail::col2im3x3(PG, x.c, x.h, x.w, grad_x->sample(s));
      } else {
        gemm(wT.data(), gs, grad_x->sample(s), K, M, N);
      }
    }
  });
  acc.reduce_into(grad_wb.w);
}

// Transpose convolution, defined as the exact adjoint of conv2d_forward for
// the same weight tensor: tconv(y; w) = A(w)^T y (+ its own bias). Maps
// c_out -> c_in channels. Spatial size is preserved (3x3, stride 1).
inline void tconv2d_forward(const Tensor4& x, const ConvWeights& wb,
                            const std::vector<float>& bias, Tensor4& out) {
  require(x.c == wb.c_out, "tconv2d_forward: channel mismatch");
  require(static_cast<int>(bias.size()) == wb.c_in, "tconv2d_forward: bias size");
  out.resize(x.n, wb.c_in, x.h, x.w);
  const long N = x.plane();
  const long K = wb.cols();
  const long M = wb.rows();
  std::vector<float> wT(static_cast<size_t>(K) * M);
  transpose(wb.w.data(), M, K, wT.data());
  detail::for_samples(x.n, [&](int s, detail::Workspace& ws, int) {
    const float* xs = x.sample(s);
    float* os = out.sample(s);
    if (wb.k == 3) {
      float* P = ws.patch_buf(static_cast<size_t>(K) * N);
      gemm(wT.data(), xs, P, K, M, N);
      detail::col2im3x3(P, wb.c_in, x.h, x.w, os);
    } else {
      gemm(wT.data(), xs, os, K, M, N);
    }
    detail::add_bias(os, bias, N);
  });
}

inline void tconv2d_backward(const Tensor4& x, const ConvWeights& wb,
                             const Tensor4& gout, Tensor4* grad_x,
                             ConvWeights& grad_wb, std::vector<float>& grad_bias) {
  require(gout.c == wb.c_in && x.c == wb.c_out, "tconv2d_backward: channel mismatch");
  const long N = x.plane();
  const long K = wb.cols();
  const long M = wb.rows();

  detail::accumulate_bias_grad(gout, grad_bias);

  if (grad_x != nullptr) grad_x->resize(x.n, x.c, x.h, x.w);
  detail::WeightGradAccum acc(detail::sample_slots(x.n), K, M);
  detail::for_samples(x.n, [&](int s, detail::Workspace& ws, int slot) {
    const float* gs = gout.sample(s);
    const float* patches = gs;
    if (wb.k == 3) {
      float* P = ws.patch_buf(static_cast<size_t>(K) * N);
      detail::im2col3x3(gs, gout.c, gout.h, gout.w, P);
      patches = P;
    }
    // d/dw of <g, W^T x> accumulated as patches(g) * x^T, in [K x M] layout.
    float* xT = ws.trans_buf(static_cast<size_t>(N) * M);
    transpose(x.sample(s), M, N, xT);
    gemm(patches, xT, acc.slots[slot].data(), K, N, M, /*accumulate=*/true);

    if (grad_x != nullptr)
      gemm(wb.w.data(), patches, grad_x->sample(s), M, K, N);
  });
  acc.reduce_into(grad_wb.w);
}

// 2x2 stride-2 max pooling with argmax memory (position 0..3 in the window,
// first max wins ties so the gradient route is deterministic).
inline void maxpool2_forward(const Tensor4& x, Tensor4& out, std::vector<uint8_t>& argmax) {
  require(x.h % 2 == 0 && x.w % 2 == 0, "maxpool2: odd spatial dims");
  out.resize(x.n, x.c, x.h / 2, x.w / 2);
  argmax.assign(out.size(), 0);
  const int H = x.h, W = x.w, Ho = H / 2, Wo = W / 2;
  detail::for_samples(x.n, [&](int s, detail::Workspace&, int) {
    for (int ci = 0; ci < x.c; ++ci) {
      const float* plane = x.sample(s) + static_cast<long>(ci) * H * W;
      const long base = (static_cast<long>(s) * x.c + ci) * Ho * Wo;
      for (int y = 0; y < Ho; ++y)
        for (int xo = 0; xo < Wo; ++xo) {
          const float* p = plane + (2 * y) * W + 2 * xo;
          float best = p[0];
          uint8_t arg = 0;
          if (p[1] > best) { best = p[1]; arg = 1; }
          if (p[W] > best) { best = p[W]; arg = 2; }
          if (p[W + 1] > best) { best = p[W + 1]; arg = 3; }
          out.v[base + static_cast<long>(y) * Wo + xo] = best;
          argmax[base + static_cast<long>(y) * Wo + xo] = arg;
        }
    }
  });
}

inline void maxpool2_backward(const Tensor4& gout, const std::vector<uint8_t>& argmax,
                              int H, int W, Tensor4& grad_x) {
  grad_x.resize(gout.n, gout.c, H, W);
  const int Ho = gout.h, Wo = gout.w;
  detail::for_samples(gout.n, [&](int s, detail::Workspace&, int) {
    for (int ci = 0; ci < gout.c; ++ci) {
      float* plane = grad_x.sample(s) + static_cast<long>(ci) * H * W;
      const long base = (static_cast<long>(s) * gout.c + ci) * Ho * Wo;
      for (int y = 0; y < Ho; ++y)
        for (int xo = 0; xo < Wo; ++xo) {
          const long i = base + static_cast<long>(y) * Wo + xo;
          const uint8_t a = argmax[i];
          plane[(2 * y + (a >> 1)) * W + 2 * xo + (a & 1)] += gout.v[i];
        }
    }
  });
}

// 2x nearest-neighbour upsampling; backward sums each 2x2 block.
inline void upsample2_forward(const Tensor4& x, Tensor4& out) {
  out.resize(x.n, x.c, x.h * 2, x.w * 2);
  const int H = x.h, W = x.w;
  detail::for_samples(x.n, [&](int s, detail::Workspace&, int) {
    for (int ci = 0; ci < x.c; ++ci) {
      const float* src = x.sample(s) + static_cast<long>(ci) * H * W;
      float* dst = out.sample(s) + static_cast<long>(ci) * H * W * 4;
      for (int y = 0; y < H; ++y) {
        float* row0 = dst + (2 * y) * (2 * W);
        float* row1 = row0 + 2 * W;
        for (int xi = 0; xi < W; ++xi) {
          const float v = src[y * W + xi];
          row0[2 * xi] = v; row0[2 * xi + 1] = v;
          row1[2 * xi] = v; row1[2 * xi + 1] = v;
        }
      }
    }
  });
}

inline void upsample2_backward(const Tensor4& gout, Tensor4& grad_x) {
  require(gout.h % 2 == 0 && gout.w % 2 == 0, "upsample2_backward: odd dims");
  grad_x.resize(gout.n, gout.c, gout.h / 2, gout.w / 2);
  const int H = grad_x.h, W = grad_x.w;
  detail::for_samples(gout.n, [&](int s, detail::Workspace&, int) {
    for (int ci = 0; ci < gout.c; ++ci) {
      const float* src = gout.sample(s) + static_cast<long>(ci) * H * W * 4;
      float* dst = grad_x.sample(s) + static_cast<long>(ci) * H * W;
      for (int y = 0; y < H; ++y) {
        const float* row0 = src + (2 * y) * (2 * W);
        const float* row1 = row0 + 2 * W;
        for (int xi = 0; xi < W; ++xi)
          dst[y * W + xi] = row0[2 * xi] + row0[2 * xi + 1] + row1[2 * xi] + row1[2 * xi + 1];
      }
    }
  });
}

// Rectifier, in place. Backward masks on the stored output (gradient 0 at 0).
inline void relu_forward(Tensor4& x) {
  for (float& v : x.v) v = v > 0.f ? v : 0.f;
}

inline void relu_backward(const Tensor4& y, Tensor4& g) {
  require(y.same_shape(g), "relu_backward: shape mismatch");
  for (size_t i = 0; i < g.v.size(); ++i)
    if (y.v[i] <= 0.f) g.v[i] = 0.f;
}

}  // namespace lfd::nn
