#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "lfd/common.hpp"
#include "lfd/grid.hpp"
#include "lfd/rng.hpp"

#include <json.hpp>

namespace lfd {

struct ScenarioConfig {
  int agents = 200;
  double world_size_m = 256.0;
  double scale_m_per_px = 1.0;
  int n_obstacles_min = 2;
  int n_obstacles_max = 5;
  int n_waypoints_min = 6;
  int n_waypoints_max = 9;
  double sigma_density_px = 2.0;
  uint64_t seed = 1;
};

// Axis-aligned obstacle, meters. Containment is strict: the boundary is
// walkable so sliding contact does not count as a violation.
struct Obstacle {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool contains(double x, double y) const { return x > x0 && x < x1 && y > y0 && y < y1; }
  double area() const { return (x1 - x0) * (y1 - y0); }
};

struct Waypoint {
  double x = 0, y = 0;
  double radius = 3.0;  // attraction radius, meters
};

struct AgentState {
  double x = 0, y = 0;
  int target_waypoint = 0;
  double speed = 1.0;  // meters/second, sampled in [0.5, 2.0]
};

// A crowd scene. Value type: `step` returns a new state, and the retarget
// draws are a pure function of (rng_seed, rng_cursor) so stepping stays
// deterministic under copying.
struct CrowdScenario {
  double world_size = 256.0;      // meters, square side
  double scale = 1.0;             // meters per pixel
  std::vector<Obstacle> obstacles;
  std::vector<Waypoint> waypoints;
  std::vector<AgentState> agents;
  uint64_t rng_seed = 0;
  uint64_t rng_cursor = 0;

  int map_dim() const { return static_cast<int>(std::lround(world_size / scale)); }

  bool in_obstacle(double x, double y) const {
    for (const auto& o : obstacles)
      if (o.contains(x, y)) return true;
    return false;
  }
};

namespace crowd_detail {

constexpr uint64_t kRetargetSalt = 0x7265746172676574ull;  // "retarget"

inline double free_space_fraction(const CrowdScenario& s) {
  const int dim = s.map_dim();
  long free_px = 0;
  for (int y = 0; y < dim; ++y)
    for (int x = 0; x < dim; ++x)
      if (!s.in_obstacle((x + 0.5) * s.scale, (y + 0.5) * s.scale)) ++free_px;
  return static_cast<double>(free_px) / (static_cast<double>(dim) * dim);
}

inline std::pair<double, double> sample_free(const CrowdScenario& s, Rng& rng) {
  for (int tries = 0; tries < 10000; ++tries) {
    const double x = rng.uniform(0, s.world_size);
    const double y = rng.uniform(0, s.world_size);
    if (!s.in_obstacle(x, y)) return {x, y};
  }
  throw generation_error("sample_free: world too blocked");
}

}  // namespace crowd_detail

// Random scenario: obstacles, then waypoints grouped into a few attraction
// sites (so groups large enough to be worth covering form naturally), then
// agents uniform in free space with a random target each. Deterministic for
// a fixed (config, seed).
inline CrowdScenario generate_scenario(const ScenarioConfig& cfg, uint64_t seed) {
  require(cfg.agents >= 0, "generate_scenario: negative agent count");
  require(cfg.world_size_m > 0 && cfg.scale_m_per_px > 0, "generate_scenario: bad scale");
  const double dim_f = cfg.world_size_m / cfg.scale_m_per_px;
  require(std::abs(dim_f - std::lround(dim_f)) < 1e-9,
          "generate_scenario: world_size/scale must be an integer pixel dimension");
  require(cfg.n_obstacles_min >= 0 && cfg.n_obstacles_max >= cfg.n_obstacles_min,
          "generate_scenario: bad obstacle range");
  require(cfg.n_waypoints_min >= 1 && cfg.n_waypoints_max >= cfg.n_waypoints_min,
          "generate_scenario: need at least one waypoint");

  Rng rng(mix_seed(seed, 0x5ce9a21ull));
  CrowdScenario s;
  s.world_size = cfg.world_size_m;
  s.scale = cfg.scale_m_per_px;
  s.rng_seed = mix_seed(seed, crowd_detail::kRetargetSalt);

  const int n_obstacles = rng.uniform_int(cfg.n_obstacles_min, cfg.n_obstacles_max);
  for (int i = 0; i < n_obstacles; ++i) {
    const double w = rng.uniform(0.08, 0.22) * s.world_size;
    const double h = rng.uniform(0.08, 0.22) * s.world_size;
    const double x0 = rng.uniform(0, s.world_size - w);
    const double y0 = rng.uniform(0, s.world_size - h);
    s.obstacles.push_back({x0, y0, x0 + w, y0 + h});
  }
  if (crowd_detail::free_space_fraction(s) < 0.10)
    throw generation_error("generate_scenario: free space below 10% of the world");

  // Attraction sites: well separated, away from the border, outside
  // obstacles. Waypoints are scattered around them so agents mill locally.
  const int n_waypoints = rng.uniform_int(cfg.n_waypoints_min, cfg.n_waypoints_max);
  const int n_sites = std::max(1, n_waypoints / 3);
  const double margin = 0.15 * s.world_size;
  const double min_gap = 0.35 * s.world_size;
  std::vector<std::pair<double, double>> sites;
  for (int i = 0; i < n_sites; ++i) {
    bool placed = false;
    for (int tries = 0; tries < 4000 && !placed; ++tries) {
      const double x = rng.uniform(margin, s.world_size - margin);
      const double y = rng.uniform(margin, s.world_size - margin);
      if (s.in_obstacle(x, y)) continue;
      bool far = true;
      for (const auto& site : sites) {
        const double dx = site.first - x, dy = site.second - y;
        if (std::sqrt(dx * dx + dy * dy) < min_gap) far = false;
      }
      if (!far) continue;
      sites.emplace_back(x, y);
      placed = true;
    }
    if (!placed) break;  // crowded world: fewer sites is fine
  }
  if (sites.empty()) sites.emplace_back(crowd_detail::sample_free(s, rng));

  const double site_radius = 0.04 * s.world_size;
  for (int i = 0; i < n_waypoints; ++i) {
    const auto& site = sites[i % sites.size()];
    Waypoint wp;
    for (int tries = 0; tries < 4000; ++tries) {
      wp.x = std::clamp(site.first + rng.uniform(-site_radius, site_radius), 0.0, s.world_size);
      wp.y = std::clamp(site.second + rng.uniform(-site_radius, site_radius), 0.0, s.world_size);
      if (!s.in_obstacle(wp.x, wp.y)) break;
    }
    wp.radius = rng.uniform(2.0, 4.0);
    s.waypoints.push_back(wp);
  }

  for (int i = 0; i < cfg.agents; ++i) {
    AgentState a;
    std::tie(a.x, a.y) = crowd_detail::sample_free(s, rng);
    a.target_waypoint = static_cast<int>(rng.next_below(s.waypoints.size()));
    a.speed = rng.uniform(0.5, 2.0);
    s.agents.push_back(a);
  }
  return s;
}

// One simulation step: every agent advances toward its waypoint at its own
// speed; the velocity component into an obstacle face (or the world border)
// is zeroed so agents slide along walls. An agent inside its waypoint's
// attraction radius re-targets a random waypoint.
inline CrowdScenario step(const CrowdScenario& scenario, double dt) {
  require(dt > 0 && dt <= 1.0, "step: dt must be in (0, 1]");
  CrowdScenario s = scenario;
  const double eps = 1e-9;
  for (auto& a : s.agents) {
    const Waypoint& wp = s.waypoints[a.target_waypoint];
    const double dx = wp.x - a.x, dy = wp.y - a.y;
    const double dist = std::sqrt(dx * dx + dy * dy);
    if (dist > eps) {
      const double travel = std::min(a.speed * dt, dist);
      const double mx = dx / dist * travel;
      const double my = dy / dist * travel;
      // axis-separated sliding: blocked components are dropped
      double nx = std::clamp(a.x + mx, 0.0, s.world_size);
      if (s.in_obstacle(nx, a.y)) nx = a.x;
      double ny = std::clamp(a.y + my, 0.0, s.world_size);
      if (s.in_obstacle(nx, ny)) ny = a.y;
      a.x = nx;
      a.y = ny;
    }
    const double rdx = wp.x - a.x, rdy = wp.y - a.y;
    if (std::sqrt(rdx * rdx + rdy * rdy) <= wp.radius) {
      uint64_t draw_state = s.rng_seed ^ (s.rng_cursor * 0x9e3779b97f4a7c15ull);
      a.target_waypoint = static_cast<int>(splitmix64(draw_state) % s.waypoints.size());
      s.rng_cursor += 1;
    }
  }
  return s;
}

// Unit deposit per agent into its containing pixel; sums exactly to the
// agent count.
inline ScalarField deposit_map(const CrowdScenario& s) {
  const int dim = s.map_dim();
  require(dim >= 1, "deposit_map: empty map");
  ScalarField field(dim, dim, 0.f);
  for (const auto& a : s.agents) {
    const int px = std::min(dim - 1, std::max(0, static_cast<int>(a.x / s.scale)));
    const int py = std::min(dim - 1, std::max(0, static_cast<int>(a.y / s.scale)));
    field.at(px, py) += 1.f;
  }
  return field;
}

// Deposit map blurred with an isotropic Gaussian (sigma_density px) and
// rescaled to [0, 255]; an all-zero map stays zero.
inline ScalarField density_map(const CrowdScenario& s, double sigma_density_px = 2.0) {
  const int dim = s.map_dim();
  ScalarField field = deposit_map(s);
  if (sigma_density_px > 0) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma_density_px));
    std::vector<float> kernel(2 * radius + 1);
    double ksum = 0;
    for (int i = -radius; i <= radius; ++i) {
      kernel[i + radius] = static_cast<float>(
          std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma_density_px * sigma_density_px)));
      ksum += kernel[i + radius];
    }
    for (auto& k : kernel) k = static_cast<float>(k / ksum);
    ScalarField tmp(dim, dim, 0.f);
    for (int y = 0; y < dim; ++y)  // horizontal pass, zero padding
      for (int x = 0; x < dim; ++x) {
        float acc = 0;
        for (int i = -radius; i <= radius; ++i) {
          const int xx = x + i;
          if (xx < 0 || xx >= dim) continue;
          acc += kernel[i + radius] * field.at(xx, y);
        }
        tmp.at(x, y) = acc;
      }
    for (int y = 0; y < dim; ++y)  // vertical pass
      for (int x = 0; x < dim; ++x) {
        float acc = 0;
        for (int i = -radius; i <= radius; ++i) {
          const int yy = y + i;
          if (yy < 0 || yy >= dim) continue;
          acc += kernel[i + radius] * tmp.at(x, yy);
        }
        field.at(x, y) = acc;
      }
  }
  float max_v = 0;
  for (float v : field.data) max_v = std::max(max_v, v);
  if (max_v > 0)
    for (auto& v : field.data) v = (v / max_v) * 255.f;  // max lands exactly on 255
  return field;
}

// n_steps successive (state, density map) pairs.
inline std::vector<std::pair<CrowdScenario, ScalarField>> run_sequence(
    const CrowdScenario& scenario, double dt, int n_steps, double sigma_density_px = 2.0) {
  require(n_steps >= 1, "run_sequence: n_steps must be >= 1");
  std::vector<std::pair<CrowdScenario, ScalarField>> out;
  out.reserve(n_steps);
  CrowdScenario s = scenario;
  for (int i = 0; i < n_steps; ++i) {
    s = step(s, dt);
    ScalarField d = density_map(s, sigma_density_px);
    out.emplace_back(s, std::move(d));
  }
  return out;
}

// Single-linkage clusters under the radio range: agents chained by pairwise
// gaps <= linkage_m form one cluster. Clusters are ordered by smallest
// member index; members are sorted.
inline std::vector<std::vector<int>> cluster_agents(const CrowdScenario& s,
                                                    double linkage_m = 30.0) {
  const int n = static_cast<int>(s.agents.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  const double l2 = linkage_m * linkage_m;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dx = s.agents[i].x - s.agents[j].x;
      const double dy = s.agents[i].y - s.agents[j].y;
      if (dx * dx + dy * dy <= l2) {
        const int ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  std::vector<std::vector<int>> clusters;
  std::vector<int> root_to_cluster(n, -1);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (root_to_cluster[r] < 0) {
      root_to_cluster[r] = static_cast<int>(clusters.size());
      clusters.emplace_back();
    }
    clusters[root_to_cluster[r]].push_back(i);
  }
  return clusters;
}

// Full-fidelity JSON snapshot (agents in meters), round-trippable.
inline nlohmann::json scenario_to_json(const CrowdScenario& s) {
  nlohmann::json j;
  j["world_size_m"] = s.world_size;
  j["scale_m_per_px"] = s.scale;
  j["rng_seed"] = s.rng_seed;
  j["rng_cursor"] = s.rng_cursor;
  j["obstacles"] = nlohmann::json::array();
  for (const auto& o : s.obstacles) j["obstacles"].push_back({o.x0, o.y0, o.x1, o.y1});
  j["waypoints"] = nlohmann::json::array();
  for (const auto& w : s.waypoints) j["waypoints"].push_back({w.x, w.y, w.radius});
  j["agents"] = nlohmann::json::array();
  for (const auto& a : s.agents)
    j["agents"].push_back({a.x, a.y, a.target_waypoint, a.speed});
  return j;
}

inline CrowdScenario scenario_from_json(const nlohmann::json& j) {
  CrowdScenario s;
  s.world_size = j.at("world_size_m").get<double>();
  s.scale = j.at("scale_m_per_px").get<double>();
  s.rng_seed = j.at("rng_seed").get<uint64_t>();
  s.rng_cursor = j.at("rng_cursor").get<uint64_t>();
  for (const auto& o : j.at("obstacles"))
    s.obstacles.push_back({o[0].get<double>(), o[1].get<double>(), o[2].get<double>(), o[3].get<double>()});
  for (const auto& w : j.at("waypoints"))
    s.waypoints.push_back({w[0].get<double>(), w[1].get<double>(), w[2].get<double>()});
  for (const auto& a : j.at("agents"))
    s.agents.push_back({a[0].get<double>(), a[1].get<double>(), a[2].get<int>(), a[3].get<double>()});
  return s;
}

}  // namespace lfd
