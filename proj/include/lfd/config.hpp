#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lfd/common.hpp"
#include "lfd/crowd.hpp"
#include "lfd/dataset.hpp"
#include "lfd/eval.hpp"
#include "lfd/nn/trainer.hpp"
#include "lfd/oracle.hpp"
#include "lfd/radio.hpp"
#include "lfd/saliency.hpp"

#include <json.hpp>

namespace lfd {

namespace config_detail {

inline void check_keys(const nlohmann::json& j, const std::string& section,
                       const std::vector<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const auto& k : allowed)
      if (it.key() == k) { known = true; break; }
    if (!known)
      throw contract_error("config: unknown key '" + it.key() + "' in " + section);
  }
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace config_detail

// Everything one experiment needs, merged from per-task defaults, a JSON
// config file, and command-line overrides; unknown keys are rejected.
struct RunConfig {
  std::string task = "agp";  // uav1 | uav2 | agp | fp
  uint64_t seed = 1;
  int threads = 1;

  ScenarioConfig scenario;          // uav tasks
  PolygonTaskConfig polygon;        // monitoring tasks
  int warmup_steps = 240;
  double dt = 0.5;
  RadioConfig radio = RadioConfig::standard();
  StrategyConfig strategy;
  SaliencyParams saliency;
  PeakParams peaks;
  nn::TrainConfig train;
  int checkpoint_every = 10;
  int eval_every = 5;
  EvalConfig eval;

  static RunConfig for_task(const std::string& task) {
    RunConfig cfg;
    cfg.task = task;
    cfg.eval.task = task;
    if (task == "uav1" || task == "uav2") {
      cfg.scenario.agents = task == "uav1" ? 210 : 40;
      cfg.scenario.world_size_m = 256.0;
      cfg.scenario.scale_m_per_px = 1.0;
      cfg.scenario.n_waypoints_min = 3;
      cfg.scenario.n_waypoints_max = task == "uav1" ? 6 : 5;
      cfg.warmup_steps = 480;
      cfg.strategy = task == "uav1" ? StrategyConfig::s1() : StrategyConfig::s2();
      cfg.strategy.candidate_stride = 4;
      cfg.train.input_size = 256;
      cfg.train.batch_size = 10;
      cfg.train.epochs = 500;
    } else if (task == "agp" || task == "fp") {
      cfg.train.input_size = 64;
      cfg.train.batch_size = 64;
      cfg.train.epochs = 300;
    } else {
      throw contract_error("config: unknown task '" + task + "'");
    }
    cfg.saliency = SaliencyParams::for_task(task);
    return cfg;
  }

  WifiTaskConfig wifi() const {
    WifiTaskConfig w;
    w.scenario = scenario;
    w.warmup_steps = warmup_steps;
    w.dt = dt;
    w.radio = radio;
    w.strategy = strategy;
    return w;
  }

  bool is_wifi() const { return task == "uav1" || task == "uav2"; }

  void apply_json(const nlohmann::json& j) {
    using config_detail::check_keys;
    using config_detail::maybe;
    check_keys(j, "root",
               {"task", "seed", "threads", "scenario", "polygon", "gen", "radio",
                "strategy", "saliency", "peaks", "train", "eval"});
    maybe(j, "seed", seed);
    maybe(j, "threads", threads);
    if (j.contains("scenario")) {
      const auto& s = j.at("scenario");
      check_keys(s, "scenario",
                 {"agents", "world_size_m", "scale_m_per_px", "n_obstacles",
                  "n_waypoints", "sigma_density_px", "seed"});
      maybe(s, "agents", scenario.agents);
      maybe(s, "world_size_m", scenario.world_size_m);
      maybe(s, "scale_m_per_px", scenario.scale_m_per_px);
      if (s.contains("n_obstacles")) {
        scenario.n_obstacles_min = s.at("n_obstacles").at(0).get<int>();
        scenario.n_obstacles_max = s.at("n_obstacles").at(1).get<int>();
      }
      if (s.contains("n_waypoints")) {
        scenario.n_waypoints_min = s.at("n_waypoints").at(0).get<int>();
        scenario.n_waypoints_max = s.at("n_waypoints").at(1).get<int>();
      }
      maybe(s, "sigma_density_px", scenario.sigma_density_px);
      maybe(s, "seed", scenario.seed);
    }
    if (j.contains("polygon")) {
      const auto& p = j.at("polygon");
      check_keys(p, "polygon",
                 {"min_vertices", "max_vertices", "map_size", "margin_px",
                  "witness_spacing", "candidate_stride"});
      maybe(p, "min_vertices", polygon.min_vertices);
      maybe(p, "max_vertices", polygon.max_vertices);
      maybe(p, "map_size", polygon.map_size);
      maybe(p, "margin_px", polygon.margin_px);
      maybe(p, "witness_spacing", polygon.witness_spacing);
      maybe(p, "candidate_stride", polygon.candidate_stride);
    }
    if (j.contains("gen")) {
      const auto& g = j.at("gen");
      check_keys(g, "gen", {"warmup_steps", "dt"});
      maybe(g, "warmup_steps", warmup_steps);
      maybe(g, "dt", dt);
    }
    if (j.contains("radio")) {
      const auto& r = j.at("radio");
      check_keys(r, "radio",
                 {"sigma_sq", "range_m", "sensitivity_scaled", "max_throughput_mbps",
                  "min_throughput_mbps"});
      maybe(r, "sigma_sq", radio.sigma_sq);
      maybe(r, "range_m", radio.range_m);
      maybe(r, "sensitivity_scaled", radio.sensitivity_scaled);
      maybe(r, "max_throughput_mbps", radio.max_throughput_mbps);
      maybe(r, "min_throughput_mbps", radio.min_throughput_mbps);
    }
    if (j.contains("strategy")) {
      const auto& s = j.at("strategy");
      check_keys(s, "strategy",
                 {"max_uavs", "min_group", "min_throughput_mbps", "candidate_stride"});
      maybe(s, "max_uavs", strategy.max_uavs);
      maybe(s, "min_group", strategy.min_group);
      if (s.contains("min_throughput_mbps")) {
        if (s.at("min_throughput_mbps").is_null())
          strategy.min_throughput_mbps.reset();
        else
          strategy.min_throughput_mbps = s.at("min_throughput_mbps").get<double>();
      }
      maybe(s, "candidate_stride", strategy.candidate_stride);
    }
    if (j.contains("saliency")) {
      const auto& s = j.at("saliency");
      check_keys(s, "saliency", {"alpha1", "sigma1", "alpha2", "sigma2"});
      maybe(s, "alpha1", saliency.alpha1);
      maybe(s, "sigma1", saliency.sigma1);
      maybe(s, "alpha2", saliency.alpha2);
      maybe(s, "sigma2", saliency.sigma2);
      saliency.validate();
    }
    if (j.contains("peaks")) {
      const auto& p = j.at("peaks");
      check_keys(p, "peaks", {"threshold", "nms_radius"});
      maybe(p, "threshold", peaks.threshold);
      maybe(p, "nms_radius", peaks.nms_radius);
      peaks.validate();
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      check_keys(t, "train",
                 {"batch_size", "epochs", "learning_rate", "adam_beta1", "adam_beta2",
                  "adam_eps", "seed", "input_size", "checkpoint_every", "eval_every"});
      maybe(t, "batch_size", train.batch_size);
      maybe(t, "epochs", train.epochs);
      maybe(t, "learning_rate", train.learning_rate);
      maybe(t, "adam_beta1", train.adam_beta1);
      maybe(t, "adam_beta2", train.adam_beta2);
      maybe(t, "adam_eps", train.adam_eps);
      maybe(t, "seed", train.seed);
      maybe(t, "input_size", train.input_size);
      maybe(t, "checkpoint_every", checkpoint_every);
      maybe(t, "eval_every", eval_every);
    }
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      check_keys(e, "eval", {"epsilon_frac", "witness_spacing", "min_group"});
      maybe(e, "epsilon_frac", eval.epsilon_frac);
      maybe(e, "witness_spacing", eval.witness_spacing);
      maybe(e, "min_group", eval.min_group);
      eval.validate();
    }
    eval.task = task;
    eval.radio = radio;
    eval.min_group = strategy.min_group;
  }

  static RunConfig from_json(const nlohmann::json& j) {
    const std::string task = j.contains("task") ? j.at("task").get<std::string>() : "agp";
    RunConfig cfg = for_task(task);
    cfg.apply_json(j);
    return cfg;
  }

  int input_map_size() const {
    return is_wifi() ? static_cast<int>(std::lround(scenario.world_size_m /
                                                    scenario.scale_m_per_px))
                     : static_cast<int>(polygon.map_size);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["task"] = task;
    j["seed"] = seed;
    j["threads"] = threads;
    j["scenario"] = {
        {"agents", scenario.agents},
        {"world_size_m", scenario.world_size_m},
        {"scale_m_per_px", scenario.scale_m_per_px},
        {"n_obstacles", {scenario.n_obstacles_min, scenario.n_obstacles_max}},
        {"n_waypoints", {scenario.n_waypoints_min, scenario.n_waypoints_max}},
        {"sigma_density_px", scenario.sigma_density_px},
        {"seed", scenario.seed}};
    j["polygon"] = {{"min_vertices", polygon.min_vertices},
                    {"max_vertices", polygon.max_vertices},
                    {"map_size", polygon.map_size},
                    {"margin_px", polygon.margin_px},
                    {"witness_spacing", polygon.witness_spacing},
                    {"candidate_stride", polygon.candidate_stride}};
    j["gen"] = {{"warmup_steps", warmup_steps}, {"dt", dt}};
    j["radio"] = {{"sigma_sq", radio.sigma_sq},
                  {"range_m", radio.range_m},
                  {"sensitivity_scaled", radio.sensitivity_scaled},
                  {"max_throughput_mbps", radio.max_throughput_mbps},
                  {"min_throughput_mbps", radio.min_throughput_mbps}};
    j["strategy"] = {{"max_uavs", strategy.max_uavs},
                     {"min_group", strategy.min_group},
                     {"candidate_stride", strategy.candidate_stride}};
    if (strategy.min_throughput_mbps.has_value())
      j["strategy"]["min_throughput_mbps"] = *strategy.min_throughput_mbps;
    else
      j["strategy"]["min_throughput_mbps"] = nullptr;
    j["saliency"] = {{"alpha1", saliency.alpha1},
                     {"sigma1", saliency.sigma1},
                     {"alpha2", saliency.alpha2},
                     {"sigma2", saliency.sigma2}};
    j["peaks"] = {{"threshold", peaks.threshold}, {"nms_radius", peaks.nms_radius}};
    j["train"] = {{"batch_size", train.batch_size},
                  {"epochs", train.epochs},
                  {"learning_rate", train.learning_rate},
                  {"adam_beta1", train.adam_beta1},
                  {"adam_beta2", train.adam_beta2},
                  {"adam_eps", train.adam_eps},
                  {"seed", train.seed},
                  {"input_size", train.input_size},
                  {"checkpoint_every", checkpoint_every},
                  {"eval_every", eval_every}};
    j["eval"] = {{"epsilon_frac", eval.epsilon_frac},
                 {"witness_spacing", eval.witness_spacing},
                 {"min_group", eval.min_group}};
    return j;
  }
};

}  // namespace lfd
