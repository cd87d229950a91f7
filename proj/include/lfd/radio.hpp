#pragma once

#include <cmath>
#include <vector>

#include "lfd/common.hpp"
#include "lfd/crowd.hpp"
#include "lfd/grid.hpp"

#include <json.hpp>

namespace lfd {

// Scaled Wi-Fi link model: free-space path loss approximated by an
// unnormalized Gaussian exp(-d^2 / (2 sigma^2)) after rescaling the power
// from [-65, 13] dBm to [0.1, 1]. sigma^2 is derived from the boundary
// condition pathloss(range_m) = sensitivity, i.e. 450/ln(10) for the 30 m /
// 0.1 defaults. A raw sigma^2 of 450 would put e^-1 at 30 m instead; the
// sensing radius is the operative quantity for coverage, so the boundary
// condition wins. sigma_sq stays a plain field so other calibrations remain
// expressible.
struct RadioConfig {
  double sigma_sq = 450.0 / 2.302585092994046;  // 450 / ln(10)
  double range_m = 30.0;
  double sensitivity_scaled = 0.1;
  double max_throughput_mbps = 200.0;
  double min_throughput_mbps = 5.0;

  void validate() const {
    const double at_range = std::exp(-range_m * range_m / (2.0 * sigma_sq));
    require(std::abs(at_range - sensitivity_scaled) < 1e-9,
            "RadioConfig: pathloss(range_m) must equal sensitivity_scaled");
  }

  static RadioConfig standard() {
    RadioConfig cfg;
    cfg.validate();
    return cfg;
  }
};

inline double pathloss(double d, const RadioConfig& cfg) {
  require(d >= 0, "pathloss: negative distance");
  return std::exp(-d * d / (2.0 * cfg.sigma_sq));
}

struct MeterPoint {
  double x = 0, y = 0;
};

// Nearest in-range UAV per agent (power >= sensitivity, i.e. distance <=
// range), ties to the lowest UAV index; -1 when none is in range.
inline std::vector<int> associate(const std::vector<MeterPoint>& agents,
                                  const std::vector<MeterPoint>& uavs,
                                  const RadioConfig& cfg) {
  std::vector<int> out(agents.size(), -1);
  for (size_t i = 0; i < agents.size(); ++i) {
    double best = cfg.range_m;
    for (size_t u = 0; u < uavs.size(); ++u) {
      const double dx = agents[i].x - uavs[u].x;
      const double dy = agents[i].y - uavs[u].y;
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d < best || (d <= best && out[i] < 0)) {
        best = d;
        out[i] = static_cast<int>(u);
      }
    }
  }
  return out;
}

// Equal-share throughput: each of the n_k agents on UAV k receives
// max_throughput / n_k; unassociated agents receive 0.
inline std::vector<double> throughput(const std::vector<int>& association,
                                      size_t n_uavs, const RadioConfig& cfg) {
  std::vector<int> load(n_uavs, 0);
  for (int a : association)
    if (a >= 0) load[a] += 1;
  std::vector<double> out(association.size(), 0.0);
  for (size_t i = 0; i < association.size(); ++i)
    if (association[i] >= 0) out[i] = cfg.max_throughput_mbps / load[association[i]];
  return out;
}

enum class WifiStrategy { s1, s2 };

struct CoverageReport {
  std::vector<bool> covered;        // per agent
  std::vector<double> throughput;   // per agent, Mbps
  std::vector<int> association;     // per agent, UAV index or -1
  double qos_covered_ratio = 0;     // over agents in qualifying clusters
  double qos_throughput_ratio = 0;  // same population, throughput >= minimum
  int qualifying_agents = 0;

  double qos(WifiStrategy strategy) const {
    return strategy == WifiStrategy::s1 ? qos_covered_ratio : qos_throughput_ratio;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["qos_covered_ratio"] = qos_covered_ratio;
    j["qos_throughput_ratio"] = qos_throughput_ratio;
    j["qualifying_agents"] = qualifying_agents;
    j["n_covered"] = static_cast<int>(std::count(covered.begin(), covered.end(), true));
    return j;
  }
};

// Coverage and QoS of a placement (pixel coordinates, converted to meters
// by the scenario scale). The QoS population is the set of agents in
// clusters larger than min_group; with no such cluster the mission is
// vacuously served and both ratios are 1.
inline CoverageReport qos(const CrowdScenario& scenario,
                          const std::vector<GridPoint>& placement_px,
                          WifiStrategy /*strategy*/, const RadioConfig& cfg,
                          int min_group = 30) {
  std::vector<MeterPoint> agents(scenario.agents.size());
  for (size_t i = 0; i < agents.size(); ++i)
    agents[i] = {scenario.agents[i].x, scenario.agents[i].y};
  std::vector<MeterPoint> uavs(placement_px.size());
  for (size_t i = 0; i < uavs.size(); ++i)
    uavs[i] = {placement_px[i].x * scenario.scale, placement_px[i].y * scenario.scale};

  CoverageReport report;
  report.association = associate(agents, uavs, cfg);
  report.throughput = throughput(report.association, uavs.size(), cfg);
  report.covered.resize(agents.size());
  for (size_t i = 0; i < agents.size(); ++i)
    report.covered[i] = report.association[i] >= 0;

  int population = 0, covered = 0, served = 0;
  for (const auto& cluster : cluster_agents(scenario, cfg.range_m)) {
    if (static_cast<int>(cluster.size()) <= min_group) continue;
    for (int idx : cluster) {
      ++population;
      if (report.covered[idx]) ++covered;
      if (report.throughput[idx] >= cfg.min_throughput_mbps - 1e-9) ++served;
    }
  }
  report.qualifying_agents = population;
  if (population == 0) {
    report.qos_covered_ratio = 1.0;
    report.qos_throughput_ratio = 1.0;
  } else {
    report.qos_covered_ratio = static_cast<double>(covered) / population;
    report.qos_throughput_ratio = static_cast<double>(served) / population;
  }
  return report;
}

}  // namespace lfd
