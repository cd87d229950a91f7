#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lfd/assignment.hpp"
#include "lfd/common.hpp"
#include "lfd/crowd.hpp"
#include "lfd/dataset.hpp"
#include "lfd/geometry.hpp"
#include "lfd/grid.hpp"
#include "lfd/oracle.hpp"
#include "lfd/radio.hpp"
#include "lfd/saliency.hpp"

#include <json.hpp>

namespace lfd {

struct EvalConfig {
  double epsilon_frac = 0.10;  // of the max map dimension
  std::string task = "agp";
  float witness_spacing = 2.f;         // agp/fp coverage discretization
  RadioConfig radio = RadioConfig::standard();
  int min_group = 30;

  void validate() const {
    require(epsilon_frac > 0 && epsilon_frac < 1, "EvalConfig: epsilon_frac in (0,1)");
  }
};

struct EvalReport {
  double corr = 0;
  double precision = 0;
  double qos = 0;
  int n_expert = 0;
  int n_predicted = 0;
  std::vector<std::pair<int, int>> matches;

  nlohmann::json to_json() const {
    return {{"corr", corr},       {"precision", precision},   {"qos", qos},
            {"n_expert", n_expert}, {"n_predicted", n_predicted},
            {"n_matched", matches.size()}};
  }
};

// corr = |match| / |expert|; precision = |match| / (|match| + unmatched
// predictions). Empty-set conventions: both empty is a perfect score; an
// empty expert set makes corr 0 for any prediction (undefined case, scored
// through precision); no predictions at all is vacuously precise.
inline std::pair<double, double> correspondence(const std::vector<GridPoint>& expert,
                                                const std::vector<GridPoint>& predicted,
                                                double eps_px) {
  const auto matches = match_placements(expert, predicted, eps_px);
  const double n_match = static_cast<double>(matches.size());
  double corr;
  if (expert.empty())
    corr = predicted.empty() ? 1.0 : 0.0;
  else
    corr = n_match / static_cast<double>(expert.size());
  double precision;
  if (predicted.empty())
    precision = 1.0;  // no spurious maxima to penalize
  else
    precision = n_match / static_cast<double>(predicted.size());
  return {corr, precision};
}

// Fraction-of-perfect-coverage QoS for the monitoring tasks: 1 when every
// witness is visible from some predicted guard standing in the valid
// domain (inside for agp, outside for fp), else 0 for this building.
inline double monitoring_qos(const Polygon& poly, const std::vector<GridPoint>& guards,
                             bool fortress, float witness_spacing) {
  std::vector<GridPoint> witnesses;
  try {
    witnesses = sample_witnesses(
        poly, fortress ? WitnessDomain::perimeter : WitnessDomain::interior, witness_spacing);
  } catch (const generation_error&) {
    return 0.0;  // degenerate building
  }
  std::vector<GridPoint> valid;
  for (const auto& g : guards) {
    // boundary guards (vertex guards in particular) belong to the interior
    // domain; the fortress domain is everything not strictly inside
    const bool interior_ok = poly.contains(g) || poly.boundary_distance(g) < 1e-6;
    const bool exterior_ok = !poly.contains(g);
    if (fortress ? exterior_ok : interior_ok) valid.push_back(g);
  }
  const auto domain = fortress ? VisibilityDomain::exterior : VisibilityDomain::interior;
  for (const auto& w : witnesses) {
    bool seen = false;
    for (const auto& g : valid)
      if (visible(g, w, poly, domain)) { seen = true; break; }
    if (!seen) return 0.0;
  }
  return 1.0;
}

// Evaluation of one sample given its prediction.
inline EvalReport evaluate_sample(const Manifest& manifest, const SampleRecord& record,
                                  const std::vector<GridPoint>& predicted,
                                  const EvalConfig& cfg) {
  cfg.validate();
  const ScalarField map = read_f32grid(manifest.resolve(record.map));
  const auto expert = read_placements(manifest.resolve(record.placements));
  const double eps = cfg.epsilon_frac * std::max(map.width, map.height);

  EvalReport report;
  report.n_expert = static_cast<int>(expert.size());
  report.n_predicted = static_cast<int>(predicted.size());
  report.matches = match_placements(expert, predicted, eps);
  auto [corr, precision] = correspondence(expert, predicted, eps);
  report.corr = corr;
  report.precision = precision;

  if (record.task == "uav1" || record.task == "uav2") {
    const CrowdScenario scenario = scenario_from_json(
        nlohmann::json::parse(detail::read_file(manifest.resolve(record.scene))));
    const auto strategy = record.task == "uav1" ? WifiStrategy::s1 : WifiStrategy::s2;
    report.qos = qos(scenario, predicted, strategy, cfg.radio, cfg.min_group).qos(strategy);
  } else if (record.task == "agp" || record.task == "fp") {
    const Polygon poly = read_polygon(manifest.resolve(record.scene));
    report.qos = monitoring_qos(poly, predicted, record.task == "fp", cfg.witness_spacing);
  } else {
    throw contract_error("evaluate_sample: unknown task '" + record.task + "'");
  }
  return report;
}

// Mean of per-sample evaluations produced by `predict`.
inline EvalReport evaluate_task(
    const Manifest& manifest,
    const std::function<std::vector<GridPoint>(const SampleRecord&, const ScalarField&)>& predict,
    const EvalConfig& cfg, std::vector<EvalReport>* per_sample = nullptr) {
  require(!manifest.samples.empty(), "evaluate_task: empty manifest");
  EvalReport agg;
  for (const auto& record : manifest.samples) {
    const ScalarField map = read_f32grid(manifest.resolve(record.map));
    const auto predicted = predict(record, map);
    EvalReport r = evaluate_sample(manifest, record, predicted, cfg);
    agg.corr += r.corr;
    agg.precision += r.precision;
    agg.qos += r.qos;
    agg.n_expert += r.n_expert;
    agg.n_predicted += r.n_predicted;
    if (per_sample != nullptr) per_sample->push_back(std::move(r));
  }
  const double n = static_cast<double>(manifest.samples.size());
  agg.corr /= n;
  agg.precision /= n;
  agg.qos /= n;
  return agg;
}

struct SequenceRow {
  int frame = 0;
  double mean_throughput_mbps = 0;
  double qos = 0;
  std::string source;  // "expert" or "learned"
};

// Per-frame throughput/QoS rows for a dynamic scene, expert and learned
// placements side by side. The learned placements come from `predict` on
// each frame's density map.
inline std::vector<SequenceRow> evaluate_sequence(
    const CrowdScenario& start, double dt, int n_steps, double sigma_density_px,
    const WifiTaskConfig& task,
    const std::function<std::vector<GridPoint>(const ScalarField&)>& predict) {
  std::vector<SequenceRow> rows;
  CrowdScenario s = start;
  for (int frame = 0; frame < n_steps; ++frame) {
    s = step(s, dt);
    const ScalarField density = density_map(s, sigma_density_px);
    const auto expert = solve_wifi(s, task.strategy, task.radio);
    const auto learned = predict(density);
    for (const auto& [source, placement] :
         {std::pair<std::string, const std::vector<GridPoint>&>{"expert", expert},
          {"learned", learned}}) {
      const CoverageReport report =
          qos(s, placement, task.strategy.strategy(), task.radio, task.strategy.min_group);
      double mean_tput = 0;
      for (double t : report.throughput) mean_tput += t;
      if (!report.throughput.empty()) mean_tput /= static_cast<double>(report.throughput.size());
      rows.push_back({frame, mean_tput, report.qos(task.strategy.strategy()), source});
    }
  }
  return rows;
}

}  // namespace lfd
