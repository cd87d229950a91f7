#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lfd/dataset.hpp"
#include "lfd/grid.hpp"
#include "lfd/nn/adam.hpp"
#include "lfd/nn/model.hpp"
#include "lfd/rng.hpp"
#include "lfd/saliency.hpp"

namespace lfd::nn {

struct TrainConfig {
  int batch_size = 64;
  int epochs = 300;
  float learning_rate = 1e-3f;
  float adam_beta1 = 0.9f;
  float adam_beta2 = 0.999f;
  float adam_eps = 1e-8f;
  uint64_t seed = 1;
  int input_size = 64;

  void validate() const {
    require(batch_size >= 1 && epochs >= 1 && learning_rate > 0, "TrainConfig: bad values");
  }

  AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_eps}; }
};

// In-memory training set: inputs scaled to [0,1], targets at full scale.
struct TrainData {
  Tensor4 inputs;   // n x 1 x s x s
  Tensor4 targets;  // n x 1 x s x s
  int count() const { return inputs.n; }
};

// Loads every sample of a manifest and rasterizes its expert placements
// into the regression targets.
inline TrainData load_train_data(const Manifest& manifest, const SaliencyParams& saliency,
                                 int input_size) {
  require(!manifest.samples.empty(), "load_train_data: empty manifest");
  TrainData data;
  const int n = static_cast<int>(manifest.samples.size());
  data.inputs.resize(n, 1, input_size, input_size);
  data.targets.resize(n, 1, input_size, input_size);
  for (int i = 0; i < n; ++i) {
    const auto& record = manifest.samples[i];
    const ScalarField map = read_f32grid(manifest.resolve(record.map));
    require(static_cast<int>(map.width) == input_size &&
                static_cast<int>(map.height) == input_size,
            "load_train_data: map size mismatch at " + record.map);
    const auto placements = read_placements(manifest.resolve(record.placements));
    const ScalarField target =
        rasterize(placements, map.height, map.width, saliency);
    float* in = data.inputs.sample(i);
    float* tg = data.targets.sample(i);
    for (size_t k = 0; k < map.data.size(); ++k) {
      in[k] = map.data[k] / 255.f;
      tg[k] = target.data[k];
    }
  }
  return data;
}

inline std::string layer_norm_dump(Model& m) {
  std::ostringstream out;
  for (auto& p : m.params()) {
    double ss = 0;
    for (size_t i = 0; i < p.size; ++i) ss += static_cast<double>(p.data[i]) * p.data[i];
    out << " " << p.name << "=" << std::sqrt(ss);
  }
  return out.str();
}

// One optimization step on a batch: forward, MSE against the targets,
// backward, Adam update. Returns the batch loss.
inline double train_step(Model& model, const Tensor4& x, const Tensor4& target,
                         AdamState& adam, const TrainConfig& cfg, Activations& acts,
                         Gradients& grads, Tensor4& grad_pred) {
  forward(model, x, acts);
  const double batch_loss = mse_loss(acts.out, target, grad_pred);
  if (!std::isfinite(batch_loss))
    throw contract_error("train_step: non-finite loss; layer norms:" + layer_norm_dump(model));
  grads.zero();
  backward(model, acts, grad_pred, grads);
  adam_update(model, grads, adam, cfg.adam());
  return batch_loss;
}

// Deterministic epoch: samples are visited in a permutation drawn from
// (seed, epoch), so a resumed run replays the exact batch order.
inline double train_epoch(Model& model, AdamState& adam, const TrainData& data,
                          const TrainConfig& cfg, int epoch) {
  cfg.validate();
  const int n = data.count();
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(mix_seed(cfg.seed, 0xE50C000ull + static_cast<uint64_t>(epoch)));
  shuffle(order.data(), order.size(), rng);

  Activations acts;
  Gradients grads;
  Tensor4 grad_pred, x, target;
  double epoch_loss = 0;
  long seen = 0;
  for (int start = 0; start < n; start += cfg.batch_size) {
    const int b = std::min(cfg.batch_size, n - start);
    x.resize(b, 1, data.inputs.h, data.inputs.w);
    target.resize(b, 1, data.targets.h, data.targets.w);
    const long plane = data.inputs.plane();
    for (int i = 0; i < b; ++i) {
      std::copy_n(data.inputs.sample(order[start + i]), plane, x.sample(i));
      std::copy_n(data.targets.sample(order[start + i]), plane, target.sample(i));
    }
    const double batch_loss = train_step(model, x, target, adam, cfg, acts, grads, grad_pred);
    epoch_loss += batch_loss * b;
    seen += b;
  }
  return epoch_loss / static_cast<double>(seen);
}

// Inference helpers.
inline ScalarField infer_map(Model& model, const ScalarField& input) {
  Tensor4 x(1, 1, input.height, input.width);
  for (size_t i = 0; i < input.data.size(); ++i) x.v[i] = input.data[i] / 255.f;
  Activations acts;
  forward(model, x, acts);
  ScalarField out(input.width, input.height, 0.f);
  std::copy_n(acts.out.v.data(), out.data.size(), out.data.data());
  return out;
}

inline std::vector<GridPoint> infer_placements(Model& model, const ScalarField& input,
                                               const PeakParams& peaks) {
  return extract_peaks(infer_map(model, input), peaks);
}

}  // namespace lfd::nn
