#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lfd/common.hpp"

namespace lfd::nn {

// Dense 4-D tensor, contiguous row-major with width innermost:
// index = ((n*C + c)*H + y)*W + x. Always 32-bit floats.
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<float> v;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_) { resize(n_, c_, h_, w_); }

  void resize(int n_, int c_, int h_, int w_) {
    require(n_ >= 0 && c_ >= 0 && h_ >= 0 && w_ >= 0, "Tensor4: negative dim");
    n = n_; c = c_; h = h_; w = w_;
    v.assign(static_cast<size_t>(n) * c * h * w, 0.f);
  }

  size_t size() const { return v.size(); }
  long plane() const { return static_cast<long>(h) * w; }
  long sample_stride() const { return static_cast<long>(c) * h * w; }

  float* sample(int i) { return v.data() + i * sample_stride(); }
  const float* sample(int i) const { return v.data() + i * sample_stride(); }

  float& at(int ni, int ci, int y, int x) {
    return v[((static_cast<size_t>(ni) * c + ci) * h + y) * w + x];
  }
  float at(int ni, int ci, int y, int x) const {
    return v[((static_cast<size_t>(ni) * c + ci) * h + y) * w + x];
  }

  bool same_shape(const Tensor4& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }

  void fill(float x) { std::fill(v.begin(), v.end(), x); }

  bool all_finite() const {
    for (float x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }

  double sum_sq() const {
    double s = 0;
    for (float x : v) s += static_cast<double>(x) * x;
    return s;
  }
};

}  // namespace lfd::nn
