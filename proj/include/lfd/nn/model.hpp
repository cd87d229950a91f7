#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lfd/grid.hpp"
#include "lfd/nn/layers.hpp"
#include "lfd/rng.hpp"

namespace lfd::nn {

// Encoder-decoder saliency regressor:
//   encoder  conv-32, conv-32, pool, conv-64, conv-64, pool, conv-128, conv-128
//   decoder  tconv-128, up, tconv-64, up, tconv-32, 1x1 projection
// Rectifier on all hidden layers, linear single-channel output of the input's
// spatial size. Inputs are expected scaled to [0,1]; targets keep full scale.
struct Model {
  ConvWeights enc1, enc2, enc3, enc4, enc5, enc6;
  ConvWeights dec1, dec2, dec3;  // tconv banks: map c_out -> c_in channels
  std::vector<float> dec1_b, dec2_b, dec3_b;
  ConvWeights head;

  Model()
      : enc1(32, 1, 3), enc2(32, 32, 3), enc3(64, 32, 3), enc4(64, 64, 3),
        enc5(128, 64, 3), enc6(128, 128, 3),
        dec1(128, 128, 3), dec2(128, 64, 3), dec3(64, 32, 3),
        dec1_b(128, 0.f), dec2_b(64, 0.f), dec3_b(32, 0.f),
        head(1, 32, 1) {}

  struct ParamRef {
    std::string name;
    std::vector<uint32_t> shape;
    float* data;
    size_t size;
  };

  std::vector<ParamRef> params() {
    auto conv_shape = [](const ConvWeights& c) {
      return std::vector<uint32_t>{static_cast<uint32_t>(c.c_out),
                                   static_cast<uint32_t>(c.c_in),
                                   static_cast<uint32_t>(c.k),
                                   static_cast<uint32_t>(c.k)};
    };
    std::vector<ParamRef> out;
    auto add_conv = [&](const std::string& name, ConvWeights& c) {
      out.push_back({name + ".w", conv_shape(c), c.w.data(), c.w.size()});
      out.push_back({name + ".b", {static_cast<uint32_t>(c.b.size())}, c.b.data(), c.b.size()});
    };
    auto add_tconv = [&](const std::string& name, ConvWeights& c, std::vector<float>& b) {
      out.push_back({name + ".w", conv_shape(c), c.w.data(), c.w.size()});
      out.push_back({name + ".b", {static_cast<uint32_t>(b.size())}, b.data(), b.size()});
    };
    add_conv("enc1", enc1); add_conv("enc2", enc2);
    add_conv("enc3", enc3); add_conv("enc4", enc4);
    add_conv("enc5", enc5); add_conv("enc6", enc6);
    add_tconv("dec1", dec1, dec1_b);
    add_tconv("dec2", dec2, dec2_b);
    add_tconv("dec3", dec3, dec3_b);
    add_conv("head", head);
    return out;
  }

  // He-uniform weights (rectifier gain), zero biases; deterministic per
  // seed. Fan-in scaling keeps activation variance stable through the deep
  // rectified stack, which the 255-scale regression targets need. The
  // tconv banks apply the adjoint map, so their effective input fan is
  // c_out * k^2, not the conv orientation's c_in * k^2.
  void init(uint64_t seed) {
    Rng rng(mix_seed(seed, 0xC0FFEEull));
    auto init_weights = [&](ConvWeights& c, int fan_channels) {
      const double fan_in = static_cast<double>(fan_channels) * c.k * c.k;
      const double bound = std::sqrt(6.0 / fan_in);
      for (auto& v : c.w) v = static_cast<float>(rng.uniform(-bound, bound));
      for (auto& v : c.b) v = 0.f;
    };
    auto init_conv = [&](ConvWeights& c) { init_weights(c, c.c_in); };
    auto init_tconv = [&](ConvWeights& c) { init_weights(c, c.c_out); };
    init_conv(enc1); init_conv(enc2); init_conv(enc3);
    init_conv(enc4); init_conv(enc5); init_conv(enc6);
    init_tconv(dec1); init_tconv(dec2); init_tconv(dec3);
    for (auto& v : dec1_b) v = 0.f;
    for (auto& v : dec2_b) v = 0.f;
    for (auto& v : dec3_b) v = 0.f;
    init_conv(head);
  }
};

// Forward activations kept for the backward pass. Hidden activations are
// stored post-rectifier; the rectifier mask is recovered from the sign.
struct Activations {
  Tensor4 x;
  Tensor4 a1, a2, p1, a3, a4, p2, a5, a6;
  std::vector<uint8_t> arg1, arg2;
  Tensor4 d1, u1, d2, u2, d3, out;
};

inline void forward(Model& m, const Tensor4& x, Activations& acts) {
  require(x.c == 1, "forward: expected single-channel input");
  require(x.h % 4 == 0 && x.w % 4 == 0, "forward: spatial dims must be divisible by 4");
  acts.x = x;
  conv2d_forward(acts.x, m.enc1, acts.a1); relu_forward(acts.a1);
  conv2d_forward(acts.a1, m.enc2, acts.a2); relu_forward(acts.a2);
  maxpool2_forward(acts.a2, acts.p1, acts.arg1);
  conv2d_forward(acts.p1, m.enc3, acts.a3); relu_forward(acts.a3);
  conv2d_forward(acts.a3, m.enc4, acts.a4); relu_forward(acts.a4);
  maxpool2_forward(acts.a4, acts.p2, acts.arg2);
  conv2d_forward(acts.p2, m.enc5, acts.a5); relu_forward(acts.a5);
  conv2d_forward(acts.a5, m.enc6, acts.a6); relu_forward(acts.a6);
  tconv2d_forward(acts.a6, m.dec1, m.dec1_b, acts.d1); relu_forward(acts.d1);
  upsample2_forward(acts.d1, acts.u1);
  tconv2d_forward(acts.u1, m.dec2, m.dec2_b, acts.d2); relu_forward(acts.d2);
  upsample2_forward(acts.d2, acts.u2);
  tconv2d_forward(acts.u2, m.dec3, m.dec3_b, acts.d3); relu_forward(acts.d3);
  conv2d_forward(acts.d3, m.head, acts.out);
}

// Per-parameter gradients, same shapes as the model.
struct Gradients {
  Model g;  // reuse the container; values are gradients
  void zero() {
    for (auto& p : g.params())
      for (size_t i = 0; i < p.size; ++i) p.data[i] = 0.f;
  }
};

// Mean-squared-error loss over every element of the batch, plus its
// gradient with respect to the prediction.
inline double mse_loss(const Tensor4& pred, const Tensor4& target, Tensor4& grad) {
  require(pred.same_shape(target), "mse_loss: dimension mismatch");
  grad.resize(pred.n, pred.c, pred.h, pred.w);
  const double inv = 1.0 / static_cast<double>(pred.size());
  double loss = 0;
  for (size_t i = 0; i < pred.v.size(); ++i) {
    const double d = static_cast<double>(pred.v[i]) - target.v[i];
    loss += d * d * inv;
    grad.v[i] = static_cast<float>(2.0 * d * inv);
  }
  return loss;
}

inline void backward(Model& m, Activations& acts, const Tensor4& grad_out,
                     Gradients& grads) {
  Tensor4 ga, gb;  // ping-pong gradient buffers
  conv2d_backward(acts.d3, m.head, grad_out, &ga, grads.g.head);
  relu_backward(acts.d3, ga);
  tconv2d_backward(acts.u2, m.dec3, ga, &gb, grads.g.dec3, grads.g.dec3_b);
  upsample2_backward(gb, ga);
  relu_backward(acts.d2, ga);
  tconv2d_backward(acts.u1, m.dec2, ga, &gb, grads.g.dec2, grads.g.dec2_b);
  upsample2_backward(gb, ga);
  relu_backward(acts.d1, ga);
  tconv2d_backward(acts.a6, m.dec1, ga, &gb, grads.g.dec1, grads.g.dec1_b);
  relu_backward(acts.a6, gb);
  conv2d_backward(acts.a5, m.enc6, gb, &ga, grads.g.enc6);
  relu_backward(acts.a5, ga);
  conv2d_backward(acts.p2, m.enc5, ga, &gb, grads.g.enc5);
  maxpool2_backward(gb, acts.arg2, acts.a4.h, acts.a4.w, ga);
  relu_backward(acts.a4, ga);
  conv2d_backward(acts.a3, m.enc4, ga, &gb, grads.g.enc4);
  relu_backward(acts.a3, gb);
  conv2d_backward(acts.p1, m.enc3, gb, &ga, grads.g.enc3);
  maxpool2_backward(ga, acts.arg1, acts.a2.h, acts.a2.w, gb);
  relu_backward(acts.a2, gb);
  conv2d_backward(acts.a1, m.enc2, gb, &ga, grads.g.enc2);
  relu_backward(acts.a1, ga);
  conv2d_backward(acts.x, m.enc1, ga, nullptr, grads.g.enc1);
}

}  // namespace lfd::nn
