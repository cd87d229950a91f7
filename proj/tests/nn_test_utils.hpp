#pragma once

// Test-only oracles for the tensor ops: a naive 6-loop convolution and a
// central finite-difference gradient checker. Both stay independent of the
// im2col/GEMM implementation they verify.

#include <cmath>
#include <functional>
#include <vector>

#include "lfd/nn/layers.hpp"
#include "lfd/rng.hpp"

namespace nn_test {

using lfd::nn::ConvWeights;
using lfd::nn::Tensor4;

// Direct cross-correlation with zero padding, no tricks.
inline Tensor4 reference_conv2d(const Tensor4& x, const ConvWeights& wb) {
  Tensor4 out(x.n, wb.c_out, x.h, x.w);
  const int r = wb.k / 2;
  for (int n = 0; n < x.n; ++n)
    for (int oc = 0; oc < wb.c_out; ++oc)
      for (int y = 0; y < x.h; ++y)
        for (int xo = 0; xo < x.w; ++xo) {
          double acc = wb.b[oc];
          for (int ic = 0; ic < wb.c_in; ++ic)
            for (int ky = 0; ky < wb.k; ++ky)
              for (int kx = 0; kx < wb.k; ++kx) {
                const int yy = y + ky - r, xx = xo + kx - r;
                if (yy < 0 || yy >= x.h || xx < 0 || xx >= x.w) continue;
                acc += static_cast<double>(x.at(n, ic, yy, xx)) *
                       wb.w[((static_cast<size_t>(oc) * wb.c_in + ic) * wb.k + ky) * wb.k + kx];
              }
          out.at(n, oc, y, xo) = static_cast<float>(acc);
        }
  return out;
}

inline void fill_random(std::vector<float>& v, lfd::Rng& rng, double lo = -1.0,
                        double hi = 1.0) {
  for (auto& x : v) x = static_cast<float>(rng.uniform(lo, hi));
}

inline double dot(const Tensor4& a, const Tensor4& b) {
  double s = 0;
  for (size_t i = 0; i < a.v.size(); ++i) s += static_cast<double>(a.v[i]) * b.v[i];
  return s;
}

// Central finite differences of a scalar function with respect to one float.
inline double numeric_grad(float& param, const std::function<double()>& f,
                           float h = 1e-2f) {
  const float saved = param;
  param = saved + h;
  const double fp = f();
  param = saved - h;
  const double fm = f();
  param = saved;
  return (fp - fm) / (2.0 * static_cast<double>(h));
}

inline double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-4});
  return std::abs(a - b) / denom;
}

// Checks a sample of analytic gradients against finite differences of f.
// Returns the worst relative error over the sampled entries. Elements whose
// gradient is far below the tensor's scale are skipped: a two-sided f32
// difference quotient cannot resolve them at any tolerance worth asserting.
inline double check_grad(float* params, const float* analytic, size_t count,
                         size_t n_samples, lfd::Rng& rng,
                         const std::function<double()>& f, float h = 1e-2f) {
  double scale = 0;
  for (size_t i = 0; i < count; ++i) scale = std::max(scale, std::abs((double)analytic[i]));
  double worst = 0;
  size_t checked = 0;
  for (size_t attempt = 0; attempt < 8 * n_samples && checked < n_samples; ++attempt) {
    const size_t i = static_cast<size_t>(rng.next_below(count));
    if (std::abs(analytic[i]) < 0.02 * scale) continue;
    const double num = numeric_grad(params[i], f, h);
    worst = std::max(worst, rel_err(static_cast<double>(analytic[i]), num));
    ++checked;
  }
  return worst;
}

}  // namespace nn_test
