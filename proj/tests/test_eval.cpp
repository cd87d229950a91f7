#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "lfd/config.hpp"
#include "lfd/eval.hpp"

using namespace lfd;
namespace fs = std::filesystem;

TEST_CASE("correspondence formulas and empty conventions", "[eval]") {
  const std::vector<GridPoint> expert = {{10, 10}, {30, 30}, {50, 10}};
  // perfect prediction
  {
    auto [corr, prec] = correspondence(expert, expert, 5.0);
    CHECK(corr == 1.0);
    CHECK(prec == 1.0);
  }
  // 3 expert, 2 matched, 2 extra predictions: corr 2/3, precision 2/4
  {
    const std::vector<GridPoint> predicted = {{10.5f, 10}, {30, 30.5f}, {5, 60}, {60, 60}};
    auto [corr, prec] = correspondence(expert, predicted, 5.0);
    CHECK(corr == Catch::Approx(2.0 / 3.0));
    CHECK(prec == Catch::Approx(2.0 / 4.0));
  }
  // both empty is perfect; empty expert with predictions scores 0 corr and
  // is otherwise penalized through precision
  {
    auto [corr, prec] = correspondence({}, {}, 5.0);
    CHECK(corr == 1.0);
    CHECK(prec == 1.0);
  }
  {
    auto [corr, prec] = correspondence({}, {{1, 1}}, 5.0);
    CHECK(corr == 0.0);
    CHECK(prec == 0.0);
  }
  // no predictions: nothing spurious
  {
    auto [corr, prec] = correspondence(expert, {}, 5.0);
    CHECK(corr == 0.0);
    CHECK(prec == 1.0);
  }
}

TEST_CASE("correspondence is permutation invariant", "[eval]") {
  Rng rng(88);
  std::vector<GridPoint> expert, predicted;
  for (int i = 0; i < 5; ++i) {
    expert.push_back({static_cast<float>(rng.uniform(0, 64)), static_cast<float>(rng.uniform(0, 64))});
    predicted.push_back({static_cast<float>(rng.uniform(0, 64)), static_cast<float>(rng.uniform(0, 64))});
  }
  auto [c1, p1] = correspondence(expert, predicted, 6.4);
  std::reverse(expert.begin(), expert.end());
  std::reverse(predicted.begin(), predicted.end());
  auto [c2, p2] = correspondence(expert, predicted, 6.4);
  CHECK(c1 == Catch::Approx(c2));
  CHECK(p1 == Catch::Approx(p2));
}

TEST_CASE("matching threshold boundary at 10% of the map dimension", "[eval]") {
  // 64 map: eps = 6.4 px; displacement 0.09*64 = 5.76 matches, 0.11*64 = 7.04 does not
  const std::vector<GridPoint> expert = {{30, 30}};
  const double eps = 0.10 * 64;
  {
    auto [corr, prec] = correspondence(expert, {{30.f + 5.76f, 30.f}}, eps);
    CHECK(corr == 1.0);
  }
  {
    auto [corr, prec] = correspondence(expert, {{30.f + 7.04f, 30.f}}, eps);
    CHECK(corr == 0.0);
  }
}

TEST_CASE("monitoring qos demands full witness coverage in-domain", "[eval]") {
  Polygon convex({{10, 10}, {50, 12}, {55, 40}, {30, 55}, {8, 35}});
  // a single interior guard covers a convex polygon
  CHECK(monitoring_qos(convex, {{30, 30}}, false, 2.f) == 1.0);
  // a guard outside the polygon does not count for agp
  CHECK(monitoring_qos(convex, {{1, 1}}, false, 2.f) == 0.0);
  // no guards, no coverage
  CHECK(monitoring_qos(convex, {}, false, 2.f) == 0.0);
  // fp: interior guards are invalid
  CHECK(monitoring_qos(convex, {{30, 30}}, true, 2.f) == 0.0);
  // fp with the oracle's own guards
  auto guards = solve_fp(convex, 64);
  CHECK(monitoring_qos(convex, guards, true, 2.f) == 1.0);
}

TEST_CASE("evaluate_task aggregates hand-built samples", "[eval]") {
  const auto dir = fs::temp_directory_path() / "lfd_eval_agg";
  fs::create_directories(dir);
  // three agp samples with known displacements: matched, missed, matched
  Manifest manifest;
  manifest.dir = dir.string();
  Polygon tri({{8, 6}, {52, 14}, {22, 55}});
  for (int i = 0; i < 3; ++i) {
    SampleRecord rec;
    rec.task = "agp";
    rec.seed = i;
    rec.map = "m" + std::to_string(i) + ".f32";
    rec.placements = "p" + std::to_string(i) + ".txt";
    rec.scene = "s" + std::to_string(i) + ".txt";
    write_f32grid(rasterize_polygon(tri, 64), manifest.resolve(rec.map));
    write_placements({{30, 30}}, manifest.resolve(rec.placements));
    write_polygon(tri, manifest.resolve(rec.scene));
    manifest.samples.push_back(rec);
  }
  // predictions: exact, 10 px off (miss at eps 6.4), 2 px off (match)
  auto predict = [&](const SampleRecord& rec, const ScalarField&) -> std::vector<GridPoint> {
    if (rec.seed == 0) return {{30, 30}};
    if (rec.seed == 1) return {{40, 30}};
    return {{32, 30}};
  };
  EvalConfig cfg;
  cfg.task = "agp";
  const EvalReport agg = evaluate_task(manifest, predict, cfg);
  CHECK(agg.corr == Catch::Approx(2.0 / 3.0));
  CHECK(agg.precision == Catch::Approx(2.0 / 3.0));
  fs::remove_all(dir);
}

TEST_CASE("oracle self-evaluation is perfect on fresh samples", "[eval]") {
  const auto dir = fs::temp_directory_path() / "lfd_eval_self";
  fs::create_directories(dir);
  Manifest manifest;
  manifest.dir = dir.string();
  PolygonTaskConfig pcfg;
  for (int i = 0; i < 5; ++i) {
    auto [poly, guards] = generate_polygon_sample(pcfg, i % 2 == 1, 900 + i);
    SampleRecord rec;
    rec.task = i % 2 == 1 ? "fp" : "agp";
    rec.seed = 900 + i;
    rec.map = "m" + std::to_string(i) + ".f32";
    rec.placements = "p" + std::to_string(i) + ".txt";
    rec.scene = "s" + std::to_string(i) + ".txt";
    write_f32grid(rasterize_polygon(poly, pcfg.map_size), manifest.resolve(rec.map));
    write_placements(guards, manifest.resolve(rec.placements));
    write_polygon(poly, manifest.resolve(rec.scene));
    manifest.samples.push_back(rec);
  }
  auto predict = [&](const SampleRecord& rec, const ScalarField&) {
    return read_placements(manifest.resolve(rec.placements));
  };
  EvalConfig cfg;
  const EvalReport agg = evaluate_task(manifest, predict, cfg);
  CHECK(agg.corr == 1.0);
  CHECK(agg.precision == 1.0);
  CHECK(agg.qos == 1.0);
  fs::remove_all(dir);
}

TEST_CASE("sequence rows: static crowd gives constant expert rows", "[eval]") {
  CrowdScenario s;
  s.world_size = 256;
  s.scale = 1.0;
  s.waypoints.push_back({128, 128, 3.0});
  Rng rng(3);
  for (int i = 0; i < 40; ++i)
    s.agents.push_back({120 + rng.uniform(0, 10), 120 + rng.uniform(0, 10), 0, 0.0});
  WifiTaskConfig task;
  task.strategy = StrategyConfig::s1();
  auto predict = [](const ScalarField&) -> std::vector<GridPoint> { return {{124, 124}}; };
  const auto rows = evaluate_sequence(s, 0.5, 4, 2.0, task, predict);
  REQUIRE(rows.size() == 8);  // expert + learned per frame
  for (size_t i = 2; i < rows.size(); i += 2) {
    CHECK(rows[i].mean_throughput_mbps == Catch::Approx(rows[0].mean_throughput_mbps));
    CHECK(rows[i].qos == rows[0].qos);
  }
  // expert rows on a fully covered static cluster are perfect
  CHECK(rows[0].source == "expert");
  CHECK(rows[0].qos == 1.0);
}
