#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "lfd/common.hpp"
#include "lfd/grid.hpp"

namespace lfd {

// The four parameters of the two-Gaussian target map: a narrow high peak
// that pins exact locations and a broad low one that carries learning
// signal toward them from far away.
struct SaliencyParams {
  float alpha1 = 255.f;
  float sigma1 = 1.f;
  float alpha2 = 40.f;
  float sigma2 = 40.f;

  void validate() const {
    require(alpha1 > alpha2 && alpha2 >= 0.f, "SaliencyParams: need alpha1 > alpha2 >= 0");
    require(sigma2 > sigma1 && sigma1 > 0.f, "SaliencyParams: need sigma2 > sigma1 > 0");
  }

  // Tuned defaults per task (grid-search winners).
  static SaliencyParams for_task(const std::string& task) {
    SaliencyParams p;
    if (task == "uav1") { p.alpha2 = 50.f; p.sigma2 = 50.f; }
    else if (task == "uav2") { p.alpha2 = 30.f; p.sigma2 = 30.f; }
    else if (task == "agp") { p.alpha2 = 40.f; p.sigma2 = 40.f; }
    else if (task == "fp") { p.alpha2 = 40.f; p.sigma2 = 20.f; }
    else throw contract_error("SaliencyParams: unknown task '" + task + "'");
    return p;
  }

  // Untuned fallback: a quarter of the mean distance between expert
  // positions, applied to both broad-Gaussian parameters.
  static SaliencyParams untuned(float mean_expert_distance) {
    SaliencyParams p;
    p.alpha2 = p.sigma2 = std::max(2.f, mean_expert_distance / 4.f);
    p.alpha2 = std::min(p.alpha2, 254.f);
    return p;
  }
};

struct PeakParams {
  float threshold = 100.f;  // above the broad plateau (alpha2 <= 60), below alpha1
  float nms_radius = 5.f;

  void validate() const {
    require(threshold > 0.f, "PeakParams: threshold must be > 0");
    require(nms_radius >= 1.f, "PeakParams: nms_radius must be >= 1");
  }
};

// Target map: R(x,y) = sum_k alpha_k sum_p exp(-|p-(x,y)|^2 / (2 sigma_k^2)),
// evaluated exactly at every pixel, no truncation window.
inline ScalarField rasterize(const std::vector<GridPoint>& placements, uint32_t height,
                             uint32_t width, const SaliencyParams& params) {
  params.validate();
  ScalarField field(width, height, 0.f);
  if (placements.empty()) return field;
  const double inv1 = 1.0 / (2.0 * static_cast<double>(params.sigma1) * params.sigma1);
  const double inv2 = 1.0 / (2.0 * static_cast<double>(params.sigma2) * params.sigma2);
  for (uint32_t y = 0; y < height; ++y)
    for (uint32_t x = 0; x < width; ++x) {
      double acc = 0;
      for (const auto& p : placements) {
        const double dx = static_cast<double>(p.x) - x;
        const double dy = static_cast<double>(p.y) - y;
        const double d2 = dx * dx + dy * dy;
        acc += params.alpha1 * std::exp(-d2 * inv1) + params.alpha2 * std::exp(-d2 * inv2);
      }
      field.at(x, y) = static_cast<float>(acc);
    }
  return field;
}

// Local maxima of the map: strict maxima of the 8-neighbourhood with value
// >= threshold, then greedy non-maximum suppression by descending value.
// The result is sorted by descending value and pairwise farther apart than
// nms_radius.
inline std::vector<GridPoint> extract_peaks(const ScalarField& map, const PeakParams& params) {
  params.validate();
  require(map.all_finite(), "extract_peaks: map must be finite");
  struct Peak { float value; uint32_t x, y; };
  std::vector<Peak> candidates;
  const int w = static_cast<int>(map.width), h = static_cast<int>(map.height);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float v = map.at(x, y);
      if (v < params.threshold) continue;
      bool strict = true;
      for (int dy = -1; dy <= 1 && strict; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          if (map.at(nx, ny) >= v) { strict = false; break; }
        }
      if (strict) candidates.push_back({v, static_cast<uint32_t>(x), static_cast<uint32_t>(y)});
    }
  std::sort(candidates.begin(), candidates.end(), [](const Peak& a, const Peak& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  std::vector<GridPoint> out;
  for (const auto& c : candidates) {
    const GridPoint p{static_cast<float>(c.x), static_cast<float>(c.y)};
    bool keep = true;
    for (const auto& a : out)
      if (distance(a, p) <= params.nms_radius) { keep = false; break; }
    if (keep) out.push_back(p);
  }
  return out;
}

// Mean squared error over pixels.
inline double loss(const ScalarField& pred, const ScalarField& target) {
  require(pred.width == target.width && pred.height == target.height,
          "loss: dimension mismatch");
  double acc = 0;
  for (size_t i = 0; i < pred.data.size(); ++i) {
    const double d = static_cast<double>(pred.data[i]) - target.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.data.size());
}

inline float mean_pairwise_distance(const std::vector<GridPoint>& pts) {
  if (pts.size() < 2) return 0.f;
  double acc = 0;
  size_t count = 0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) {
      acc += distance(pts[i], pts[j]);
      ++count;
    }
  return static_cast<float>(acc / static_cast<double>(count));
}

}  // namespace lfd
