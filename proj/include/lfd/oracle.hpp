#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "lfd/common.hpp"
#include "lfd/crowd.hpp"
#include "lfd/geometry.hpp"
#include "lfd/grid.hpp"
#include "lfd/radio.hpp"

namespace lfd {

// Wi-Fi deployment strategy knobs: at most max_uavs drones, a drone is only
// worth placing for more than min_group newly served end-users, and S2
// additionally requires min_throughput per agent (which caps a UAV's useful
// load at max_throughput / min_throughput agents).
struct StrategyConfig {
  int max_uavs = 10;
  int min_group = 30;
  std::optional<double> min_throughput_mbps;  // nullopt for S1, 5 for S2
  int candidate_stride = 4;                   // pixels

  WifiStrategy strategy() const {
    return min_throughput_mbps.has_value() ? WifiStrategy::s2 : WifiStrategy::s1;
  }

  static StrategyConfig s1() { return {}; }
  static StrategyConfig s2() {
    StrategyConfig cfg;
    cfg.min_throughput_mbps = 5.0;
    return cfg;
  }
};

// Greedy max-coverage placement over a free-space candidate grid.
// Each round places the candidate serving the most still-uncovered agents
// (ties to the lowest candidate index); agents count only when they belong
// to a cluster larger than min_group. Under S2 a UAV can serve at most
// floor(max_throughput / min_throughput) agents, nearest first. The loop
// stops when the best marginal gain drops below min_group or max_uavs is
// reached. An empty placement is a legal result.
inline std::vector<GridPoint> solve_wifi(const CrowdScenario& scenario,
                                         const StrategyConfig& strategy,
                                         const RadioConfig& radio = RadioConfig::standard()) {
  require(strategy.max_uavs >= 1 && strategy.min_group >= 1, "solve_wifi: bad strategy");
  const int dim = scenario.map_dim();
  const int stride = std::max(1, strategy.candidate_stride);

  // eligible agents: members of clusters with size > min_group
  std::vector<char> eligible(scenario.agents.size(), 0);
  for (const auto& cluster : cluster_agents(scenario, radio.range_m))
    if (static_cast<int>(cluster.size()) > strategy.min_group)
      for (int idx : cluster) eligible[idx] = 1;

  struct Candidate { float px, py; double mx, my; };
  std::vector<Candidate> candidates;
  for (int y = 0; y < dim; y += stride)
    for (int x = 0; x < dim; x += stride) {
      const double mx = x * scenario.scale, my = y * scenario.scale;
      if (scenario.in_obstacle(mx, my)) continue;
      candidates.push_back({static_cast<float>(x), static_cast<float>(y), mx, my});
    }

  const int capacity = strategy.min_throughput_mbps.has_value()
                           ? static_cast<int>(radio.max_throughput_mbps /
                                              *strategy.min_throughput_mbps)
                           : static_cast<int>(scenario.agents.size()) + 1;

  std::vector<char> covered(scenario.agents.size(), 0);
  std::vector<char> used(candidates.size(), 0);
  std::vector<GridPoint> placement;
  std::vector<int> in_range;  // scratch: agents a candidate could newly serve

  while (static_cast<int>(placement.size()) < strategy.max_uavs) {
    int best_gain = 0;
    size_t best_c = 0;
    for (size_t c = 0; c < candidates.size(); ++c) {
      if (used[c]) continue;
      int gain = 0;
      for (size_t a = 0; a < scenario.agents.size() && gain < capacity; ++a) {
        if (!eligible[a] || covered[a]) continue;
        const double dx = scenario.agents[a].x - candidates[c].mx;
        const double dy = scenario.agents[a].y - candidates[c].my;
        if (dx * dx + dy * dy <= radio.range_m * radio.range_m) ++gain;
      }
      if (gain > best_gain) {
        best_gain = gain;
        best_c = c;
      }
    }
    if (best_gain < strategy.min_group) break;

    const Candidate& win = candidates[best_c];
    used[best_c] = 1;
    placement.push_back({win.px, win.py});

    // mark the served agents: nearest first up to the capacity
    in_range.clear();
    for (size_t a = 0; a < scenario.agents.size(); ++a) {
      if (!eligible[a] || covered[a]) continue;
      const double dx = scenario.agents[a].x - win.mx;
      const double dy = scenario.agents[a].y - win.my;
      if (dx * dx + dy * dy <= radio.range_m * radio.range_m)
        in_range.push_back(static_cast<int>(a));
    }
    std::sort(in_range.begin(), in_range.end(), [&](int a, int b) {
      const double da = (scenario.agents[a].x - win.mx) * (scenario.agents[a].x - win.mx) +
                        (scenario.agents[a].y - win.my) * (scenario.agents[a].y - win.my);
      const double db = (scenario.agents[b].x - win.mx) * (scenario.agents[b].x - win.mx) +
                        (scenario.agents[b].y - win.my) * (scenario.agents[b].y - win.my);
      if (da != db) return da < db;
      return a < b;
    });
    const int take = std::min<int>(capacity, static_cast<int>(in_range.size()));
    for (int i = 0; i < take; ++i) covered[in_range[i]] = 1;
  }
  return placement;
}

namespace oracle_detail {

// Greedy set cover over a precomputed candidate x witness visibility
// relation: repeatedly pick the candidate seeing the most uncovered
// witnesses, ties to the lowest candidate index.
inline std::vector<GridPoint> greedy_cover(const std::vector<GridPoint>& candidates,
                                           const std::vector<GridPoint>& witnesses,
                                           const Polygon& poly, VisibilityDomain domain) {
  const size_t nc = candidates.size(), nw = witnesses.size();
  require(nc > 0 && nw > 0, "greedy_cover: empty candidates or witnesses");
  std::vector<std::vector<char>> sees(nc, std::vector<char>(nw, 0));
  for (size_t c = 0; c < nc; ++c)
    for (size_t w = 0; w < nw; ++w)
      sees[c][w] = visible(candidates[c], witnesses[w], poly, domain) ? 1 : 0;

  std::vector<char> covered(nw, 0);
  std::vector<char> used(nc, 0);
  std::vector<GridPoint> guards;
  size_t remaining = nw;
  while (remaining > 0) {
    size_t best_c = nc;
    int best_gain = 0;
    for (size_t c = 0; c < nc; ++c) {
      if (used[c]) continue;
      int gain = 0;
      for (size_t w = 0; w < nw; ++w)
        if (!covered[w] && sees[c][w]) ++gain;
      if (gain > best_gain) {
        best_gain = gain;
        best_c = c;
      }
    }
    if (best_c == nc)
      throw generation_error("greedy_cover: witness invisible from every candidate");
    used[best_c] = 1;
    guards.push_back(candidates[best_c]);
    for (size_t w = 0; w < nw; ++w)
      if (sees[best_c][w]) {
        if (!covered[w]) --remaining;
        covered[w] = 1;
      }
  }
  return guards;
}

}  // namespace oracle_detail

// Art-gallery expert: minimum-ish guards watching the whole interior.
// Candidates are the polygon vertices plus an interior lattice; witnesses
// are the interior lattice at `witness_spacing`.
inline std::vector<GridPoint> solve_agp(const Polygon& poly, float witness_spacing = 2.f,
                                        float candidate_stride = 2.f) {
  std::vector<GridPoint> witnesses =
      sample_witnesses(poly, WitnessDomain::interior, witness_spacing);
  std::vector<GridPoint> candidates = poly.vertices();
  if (candidate_stride == witness_spacing) {
    candidates.insert(candidates.end(), witnesses.begin(), witnesses.end());
  } else {
    auto lattice = sample_witnesses(poly, WitnessDomain::interior, candidate_stride);
    candidates.insert(candidates.end(), lattice.begin(), lattice.end());
  }
  return oracle_detail::greedy_cover(candidates, witnesses, poly,
                                     VisibilityDomain::interior);
}

// Fortress expert: guards outside the building watching its whole
// perimeter. Candidates live on a lattice ring 2-6 px outside the boundary
// (and inside the map); witnesses sit on the boundary.
inline std::vector<GridPoint> solve_fp(const Polygon& poly, uint32_t map_size,
                                       float witness_spacing = 2.f,
                                       float candidate_stride = 2.f) {
  std::vector<GridPoint> witnesses =
      sample_witnesses(poly, WitnessDomain::perimeter, witness_spacing);
  std::vector<GridPoint> candidates;
  const int steps = static_cast<int>(map_size / candidate_stride);
  for (int j = 0; j <= steps; ++j)
    for (int i = 0; i <= steps; ++i) {
      const GridPoint p{i * candidate_stride, j * candidate_stride};
      if (p.x >= static_cast<float>(map_size) || p.y >= static_cast<float>(map_size)) continue;
      if (poly.contains(p)) continue;
      const double d = poly.boundary_distance(p);
      if (d < 2.0 || d > 6.0) continue;
      candidates.push_back(p);
    }
  if (candidates.empty())
    throw generation_error("solve_fp: no exterior ring candidates fit the map");
  return oracle_detail::greedy_cover(candidates, witnesses, poly,
                                     VisibilityDomain::exterior);
}

}  // namespace lfd
