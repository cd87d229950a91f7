#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lfd/common.hpp"
#include "lfd/crowd.hpp"
#include "lfd/geometry.hpp"
#include "lfd/grid.hpp"
#include "lfd/oracle.hpp"
#include "lfd/radio.hpp"
#include "lfd/rng.hpp"

#include <json.hpp>

namespace lfd {

// One demonstration: a task raster, the expert's placements, and the scene
// it came from (crowd snapshot or building polygon).
struct SampleRecord {
  std::string map;         // F32GRID path
  std::string placements;  // placement text path
  std::string task;        // uav1 | uav2 | agp | fp
  uint64_t seed = 0;
  std::string scene;       // scenario JSON (uav) or polygon text (agp/fp)
};

struct Manifest {
  std::vector<SampleRecord> samples;
  std::string dir;  // directory the relative paths resolve against

  std::string resolve(const std::string& rel) const {
    return (std::filesystem::path(dir) / rel).string();
  }
};

// JSONL, one sample per line:
// {"map": ..., "placements": ..., "task": ..., "seed": ..., "scene": ...}
inline void write_manifest(const Manifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot write manifest: " + path);
  for (const auto& s : m.samples) {
    nlohmann::json j;
    j["map"] = s.map;
    j["placements"] = s.placements;
    j["task"] = s.task;
    j["seed"] = s.seed;
    j["scene"] = s.scene;
    out << j.dump() << "\n";
  }
}

inline Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read manifest: " + path);
  Manifest m;
  m.dir = std::filesystem::path(path).parent_path().string();
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw format_error("manifest: bad JSON at line " + std::to_string(lineno) + " in " + path);
    SampleRecord s;
    s.map = j.at("map").get<std::string>();
    s.placements = j.at("placements").get<std::string>();
    s.task = j.at("task").get<std::string>();
    s.seed = j.at("seed").get<uint64_t>();
    if (j.contains("scene")) s.scene = j.at("scene").get<std::string>();
    m.samples.push_back(std::move(s));
  }
  return m;
}

struct PolygonTaskConfig {
  int min_vertices = 6;
  int max_vertices = 14;
  uint32_t map_size = 64;
  float margin_px = 4.f;
  float witness_spacing = 2.f;
  float candidate_stride = 2.f;
};

struct WifiTaskConfig {
  ScenarioConfig scenario;
  int warmup_steps = 240;  // lets agents gather at the attraction sites
  double dt = 0.5;
  RadioConfig radio = RadioConfig::standard();
  StrategyConfig strategy;
};

namespace dataset_detail {

inline bool wifi_expert_is_valid(const CrowdScenario& scenario,
                                 const std::vector<GridPoint>& placement,
                                 const WifiTaskConfig& cfg) {
  if (placement.empty()) return false;
  const CoverageReport report =
      qos(scenario, placement, cfg.strategy.strategy(), cfg.radio, cfg.strategy.min_group);
  if (report.qualifying_agents == 0) return false;
  const double q = report.qos(cfg.strategy.strategy());
  return cfg.strategy.strategy() == WifiStrategy::s1 ? q >= 1.0 : q >= 0.999;
}

}  // namespace dataset_detail

// One Wi-Fi demonstration: generate a scene, let the crowd settle at its
// attraction sites, and keep the snapshot only if the scripted expert fully
// serves it (a demonstration that fails its own mission teaches nothing).
// Deterministic per (config, seed); re-seeds internally until valid.
inline std::pair<CrowdScenario, std::vector<GridPoint>> generate_wifi_sample(
    const WifiTaskConfig& cfg, uint64_t seed, int max_attempts = 50) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const uint64_t sub = mix_seed(seed, static_cast<uint64_t>(attempt) + 1000);
    CrowdScenario s = generate_scenario(cfg.scenario, sub);
    for (int i = 0; i < cfg.warmup_steps; ++i) s = step(s, cfg.dt);
    const auto placement = solve_wifi(s, cfg.strategy, cfg.radio);
    if (dataset_detail::wifi_expert_is_valid(s, placement, cfg)) return {s, placement};
  }
  throw generation_error("generate_wifi_sample: no valid demonstration after " +
                         std::to_string(max_attempts) + " attempts");
}

// One monitoring demonstration: a random simple polygon whose witnesses the
// greedy guard oracle fully covers (uncoverable scenes are regenerated).
inline std::pair<Polygon, std::vector<GridPoint>> generate_polygon_sample(
    const PolygonTaskConfig& cfg, bool fortress, uint64_t seed, int max_attempts = 50) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const uint64_t sub = mix_seed(seed, static_cast<uint64_t>(attempt) + 2000);
    Rng rng(sub);
    const int n = rng.uniform_int(cfg.min_vertices, cfg.max_vertices);
    const PixelBox box{cfg.margin_px, cfg.margin_px,
                       static_cast<float>(cfg.map_size) - cfg.margin_px,
                       static_cast<float>(cfg.map_size) - cfg.margin_px};
    try {
      Polygon poly = random_polygon(n, box, mix_seed(sub, 17));
      auto guards = fortress
                        ? solve_fp(poly, cfg.map_size, cfg.witness_spacing, cfg.candidate_stride)
                        : solve_agp(poly, cfg.witness_spacing, cfg.candidate_stride);
      if (guards.empty()) continue;
      return {std::move(poly), std::move(guards)};
    } catch (const generation_error&) {
      continue;  // sliver polygon or uncoverable witness: try a fresh seed
    }
  }
  throw generation_error("generate_polygon_sample: no valid demonstration after " +
                         std::to_string(max_attempts) + " attempts");
}

}  // namespace lfd
