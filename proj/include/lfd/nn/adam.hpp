#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lfd/nn/model.hpp"

namespace lfd::nn {

struct AdamConfig {
  float learning_rate = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};

// Bias-corrected Adam over the model's parameter list. Moment buffers are
// keyed by position, which is stable because Model::params() order is fixed.
struct AdamState {
  std::vector<std::vector<float>> m, v;
  uint64_t t = 0;

  void ensure(Model& model) {
    if (!m.empty()) return;
    for (auto& p : model.params()) {
      m.emplace_back(p.size, 0.f);
      v.emplace_back(p.size, 0.f);
    }
  }
};

inline void adam_update(Model& model, Gradients& grads, AdamState& state,
                        const AdamConfig& cfg) {
  state.ensure(model);
  state.t += 1;
  const double b1t = 1.0 - std::pow(static_cast<double>(cfg.beta1), static_cast<double>(state.t));
  const double b2t = 1.0 - std::pow(static_cast<double>(cfg.beta2), static_cast<double>(state.t));
  auto ps = model.params();
  auto gs = grads.g.params();
  for (size_t i = 0; i < ps.size(); ++i) {
    float* p = ps[i].data;
    const float* g = gs[i].data;
    float* m = state.m[i].data();
    float* v = state.v[i].data();
    for (size_t j = 0; j < ps[i].size; ++j) {
      m[j] = cfg.beta1 * m[j] + (1.f - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.f - cfg.beta2) * g[j] * g[j];
      const double mhat = m[j] / b1t;
      const double vhat = v[j] / b2t;
      p[j] -= static_cast<float>(cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps));
    }
  }
}

}  // namespace lfd::nn
