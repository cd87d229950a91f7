#pragma once

// Dataset writer shared by the CLI and the acceptance suite: one sample =
// (F32GRID map, expert placement text, scene file) plus a JSONL manifest.

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lfd/config.hpp"
#include "lfd/dataset.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lfd {

inline std::string sample_file_name(int index, const char* suffix) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05d.%s", index, suffix);
  return buf;
}

// Writes sample `index` under `dir` unless its files already exist (the
// generator is deterministic per (config, seed, index), so existing files
// are already correct). Partial writes are removed on failure.
inline SampleRecord write_dataset_sample(const RunConfig& cfg, const std::string& dir,
                                         int index) {
  namespace fs = std::filesystem;
  SampleRecord record;
  const uint64_t sample_seed = mix_seed(cfg.seed, static_cast<uint64_t>(index));
  record.task = cfg.task;
  record.seed = sample_seed;
  record.map = sample_file_name(index, "map.f32");
  record.placements = sample_file_name(index, "place.txt");
  record.scene = sample_file_name(index, cfg.is_wifi() ? "scene.json" : "poly.txt");

  const fs::path base(dir);
  if (fs::exists(base / record.map) && fs::exists(base / record.placements) &&
      fs::exists(base / record.scene))
    return record;

  try {
    if (cfg.is_wifi()) {
      auto [scenario, placement] = generate_wifi_sample(cfg.wifi(), sample_seed);
      write_f32grid(density_map(scenario, cfg.scenario.sigma_density_px),
                    (base / record.map).string());
      write_placements(placement, (base / record.placements).string());
      std::ofstream scene(base / record.scene);
      scene << scenario_to_json(scenario).dump() << "\n";
    } else {
      auto [poly, guards] =
          generate_polygon_sample(cfg.polygon, cfg.task == "fp", sample_seed);
      write_f32grid(rasterize_polygon(poly, cfg.polygon.map_size),
                    (base / record.map).string());
      write_placements(guards, (base / record.placements).string());
      write_polygon(poly, (base / record.scene).string());
    }
  } catch (...) {
    std::error_code ec;
    fs::remove(base / record.map, ec);
    fs::remove(base / record.placements, ec);
    fs::remove(base / record.scene, ec);
    throw;
  }
  return record;
}

// Full dataset + manifest. Samples are independent, so generation runs in
// parallel; content is deterministic for any thread count.
inline Manifest generate_dataset(const RunConfig& cfg, const std::string& dir, int n_samples) {
  std::filesystem::create_directories(dir);
  Manifest manifest;
  manifest.dir = dir;
  manifest.samples.resize(n_samples);
  std::exception_ptr failure = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, cfg.threads))
#endif
  for (int i = 0; i < n_samples; ++i) {
    if (failure) continue;
    try {
      manifest.samples[i] = write_dataset_sample(cfg, dir, i);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  write_manifest(manifest, (std::filesystem::path(dir) / "manifest.jsonl").string());
  return manifest;
}

}  // namespace lfd
