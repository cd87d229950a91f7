// Command-line entry point: dataset generation, training, inference and
// evaluation as reproducible runs driven by one JSON config.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lfd/config.hpp"
#include "lfd/datagen.hpp"
#include "lfd/eval.hpp"
#include "lfd/nn/trainer.hpp"
#include "lfd/nn/weights_io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;  // key.path=value
  uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string task;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--set", args.overrides, "override a config key, e.g. --set train.epochs=5");
  cmd->add_option("--seed", args.seed, "global seed override")->each([&](const std::string&) {
    args.seed_set = true;
  });
  cmd->add_option("--threads", args.threads, "worker threads (1 = bitwise deterministic)");
  cmd->add_option("--task", args.task, "task id: uav1|uav2|agp|fp");
  cmd->add_option("--out", args.out_dir, "output directory");
}

json parse_override_value(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) return json(text);  // plain string
  return v;
}

lfd::RunConfig load_config(const CommonArgs& args) {
  json merged = json::object();
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw lfd::io_error("cannot open config: " + args.config_path);
    in >> merged;
  }
  if (!args.task.empty()) merged["task"] = args.task;
  for (const auto& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw lfd::io_error("--set expects key=value, got: " + kv);
    std::string path = kv.substr(0, eq);
    json* node = &merged;
    size_t start = 0;
    for (size_t dot = path.find('.'); dot != std::string::npos;
         start = dot + 1, dot = path.find('.', start))
      node = &(*node)[path.substr(start, dot - start)];
    (*node)[path.substr(start)] = parse_override_value(kv.substr(eq + 1));
  }
  lfd::RunConfig cfg = lfd::RunConfig::from_json(merged);
  if (args.seed_set) cfg.seed = args.seed;
  if (args.threads > 0) cfg.threads = args.threads;
  lfd::nn::set_threads(cfg.threads);
  return cfg;
}

void echo_config(const lfd::RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "config.json");
  out << cfg.to_json().dump(2) << "\n";
}

// ---------------------------------------------------------------- gen ----

int cmd_gen(const CommonArgs& args, int n_samples) {
  lfd::RunConfig cfg = load_config(args);
  const std::string dir = args.out_dir.empty() ? "dataset" : args.out_dir;
  echo_config(cfg, dir);
  lfd::generate_dataset(cfg, dir, n_samples);
  std::cout << "wrote " << n_samples << " " << cfg.task << " samples to " << dir << "\n";
  return 0;
}

// -------------------------------------------------------------- train ----

double test_correspondence(const lfd::Manifest& test, lfd::nn::Model& model,
                           const lfd::RunConfig& cfg) {
  auto predict = [&](const lfd::SampleRecord&, const lfd::ScalarField& map) {
    return lfd::nn::infer_placements(model, map, cfg.peaks);
  };
  return lfd::evaluate_task(test, predict, cfg.eval).corr;
}

int cmd_train(const CommonArgs& args, const std::string& manifest_path,
              const std::string& test_manifest_path, const std::string& resume_path) {
  lfd::RunConfig cfg = load_config(args);
  const std::string dir = args.out_dir.empty() ? "run" : args.out_dir;
  echo_config(cfg, dir);

  const lfd::Manifest manifest = lfd::read_manifest(manifest_path);
  const lfd::nn::TrainData data =
      lfd::nn::load_train_data(manifest, cfg.saliency, cfg.train.input_size);
  lfd::Manifest test;
  if (!test_manifest_path.empty()) test = lfd::read_manifest(test_manifest_path);

  lfd::nn::Model model;
  lfd::nn::AdamState adam;
  int start_epoch = 0;
  const int steps_per_epoch =
      (data.count() + cfg.train.batch_size - 1) / cfg.train.batch_size;
  if (!resume_path.empty()) {
    lfd::nn::load_weights(model, &adam, resume_path);
    start_epoch = static_cast<int>(adam.t / steps_per_epoch);
    std::cout << "resumed at epoch " << start_epoch << "\n";
  } else {
    model.init(cfg.train.seed);
  }

  std::ofstream log(fs::path(dir) / "train_log.csv",
                    resume_path.empty() ? std::ios::trunc : std::ios::app);
  if (resume_path.empty()) log << "epoch,train_loss,test_corr\n";

  for (int epoch = start_epoch; epoch < cfg.train.epochs; ++epoch) {
    const double train_loss = lfd::nn::train_epoch(model, adam, data, cfg.train, epoch);
    std::string corr_text = "nan";
    if (!test.samples.empty() &&
        (epoch % cfg.eval_every == 0 || epoch + 1 == cfg.train.epochs)) {
      corr_text = std::to_string(test_correspondence(test, model, cfg));
    }
    log << epoch << "," << train_loss << "," << corr_text << "\n";
    log.flush();
    std::cout << "epoch " << epoch << " loss " << train_loss << " corr " << corr_text
              << std::endl;
    if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0)
      lfd::nn::save_weights(model, &adam,
                            (fs::path(dir) / ("checkpoint_" + std::to_string(epoch + 1) +
                                              ".lfdw")).string());
  }
  lfd::nn::save_weights(model, &adam, (fs::path(dir) / "weights.lfdw").string());
  std::cout << "weights written to " << (fs::path(dir) / "weights.lfdw").string() << "\n";
  return 0;
}

// -------------------------------------------------------------- infer ----

int cmd_infer(const CommonArgs& args, const std::string& weights_path,
              const std::string& map_path, const std::string& out_map,
              const std::string& out_pgm, const std::string& out_placements) {
  lfd::RunConfig cfg = load_config(args);
  lfd::nn::Model model;
  lfd::nn::load_weights(model, nullptr, weights_path);
  const lfd::ScalarField input = lfd::read_f32grid(map_path);
  const lfd::ScalarField saliency = lfd::nn::infer_map(model, input);
  if (!out_map.empty()) lfd::write_f32grid(saliency, out_map);
  if (!out_pgm.empty()) lfd::write_pgm(saliency, out_pgm);
  const auto placements = lfd::extract_peaks(saliency, cfg.peaks);
  if (!out_placements.empty()) lfd::write_placements(placements, out_placements);
  std::cout << placements.size() << " placements extracted\n";
  return 0;
}

// --------------------------------------------------------------- eval ----

int cmd_eval(const CommonArgs& args, const std::string& manifest_path,
             const std::string& weights_path, bool self_eval) {
  lfd::RunConfig cfg = load_config(args);
  const lfd::Manifest manifest = lfd::read_manifest(manifest_path);

  lfd::nn::Model model;
  if (!self_eval) {
    if (weights_path.empty())
      throw lfd::io_error("eval: --weights required (or pass --self)");
    lfd::nn::load_weights(model, nullptr, weights_path);
  }
  auto predict = [&](const lfd::SampleRecord& record,
                     const lfd::ScalarField& map) -> std::vector<lfd::GridPoint> {
    if (self_eval) return lfd::read_placements(manifest.resolve(record.placements));
    return lfd::nn::infer_placements(model, map, cfg.peaks);
  };
  std::vector<lfd::EvalReport> per_sample;
  const lfd::EvalReport agg = lfd::evaluate_task(manifest, predict, cfg.eval, &per_sample);

  json report = agg.to_json();
  report["n_samples"] = manifest.samples.size();
  report["task"] = cfg.task;
  report["samples"] = json::array();
  for (const auto& r : per_sample) report["samples"].push_back(r.to_json());
  if (!args.out_dir.empty()) {
    echo_config(cfg, args.out_dir);
    std::ofstream out(fs::path(args.out_dir) / "report.json");
    out << report.dump(2) << "\n";
  }
  std::cout << "task " << cfg.task << " corr " << agg.corr << " precision " << agg.precision
            << " qos " << agg.qos << "\n";
  return 0;
}

// --------------------------------------------------------- gridsearch ----

int cmd_gridsearch(const CommonArgs& args, const std::string& manifest_path,
                   const std::string& test_manifest_path, std::vector<double> alphas,
                   std::vector<double> sigmas, double budget_frac) {
  lfd::RunConfig cfg = load_config(args);
  const std::string dir = args.out_dir.empty() ? "gridsearch" : args.out_dir;
  echo_config(cfg, dir);
  const lfd::Manifest manifest = lfd::read_manifest(manifest_path);
  const lfd::Manifest test = lfd::read_manifest(test_manifest_path);

  if (alphas.empty())
    for (double a = 20; a <= 60; a += 10) alphas.push_back(a);
  if (sigmas.empty())
    for (double s = 20; s <= 60; s += 10) sigmas.push_back(s);
  const int budget_epochs = std::max(1, static_cast<int>(cfg.train.epochs * budget_frac));

  std::ofstream csv(fs::path(dir) / "gridsearch.csv");
  csv << "alpha2,sigma2,corr,precision\n";
  double best = -1, worst = 2;
  for (double alpha2 : alphas)
    for (double sigma2 : sigmas) {
      lfd::RunConfig cell = cfg;
      cell.saliency.alpha2 = static_cast<float>(alpha2);
      cell.saliency.sigma2 = static_cast<float>(sigma2);
      cell.saliency.validate();
      const lfd::nn::TrainData data =
          lfd::nn::load_train_data(manifest, cell.saliency, cell.train.input_size);
      lfd::nn::Model model;
      model.init(cell.train.seed);
      lfd::nn::AdamState adam;
      for (int epoch = 0; epoch < budget_epochs; ++epoch)
        lfd::nn::train_epoch(model, adam, data, cell.train, epoch);
      auto predict = [&](const lfd::SampleRecord&, const lfd::ScalarField& map) {
        return lfd::nn::infer_placements(model, map, cell.peaks);
      };
      std::vector<lfd::EvalReport> per_sample;
      const lfd::EvalReport r = lfd::evaluate_task(test, predict, cell.eval, &per_sample);
      csv << alpha2 << "," << sigma2 << "," << r.corr << "," << r.precision << "\n";
      csv.flush();
      std::cout << "alpha2 " << alpha2 << " sigma2 " << sigma2 << " corr " << r.corr
                << " precision " << r.precision << std::endl;
      best = std::max(best, r.corr);
      worst = std::min(worst, r.corr);
    }
  std::cout << "alpha2-rise " << (best - worst) << "\n";
  return 0;
}

// ----------------------------------------------------------- sequence ----

int cmd_sequence(const CommonArgs& args, const std::string& weights_path, int frames) {
  lfd::RunConfig cfg = load_config(args);
  if (!cfg.is_wifi())
    throw lfd::contract_error("sequence: needs a uav task config");
  const std::string dir = args.out_dir.empty() ? "sequence" : args.out_dir;
  echo_config(cfg, dir);

  lfd::nn::Model model;
  lfd::nn::load_weights(model, nullptr, weights_path);

  auto [scenario, placement] = lfd::generate_wifi_sample(cfg.wifi(), cfg.seed);
  (void)placement;
  auto predict = [&](const lfd::ScalarField& density) {
    return lfd::nn::infer_placements(model, density, cfg.peaks);
  };
  const auto rows = lfd::evaluate_sequence(scenario, cfg.dt, frames,
                                           cfg.scenario.sigma_density_px, cfg.wifi(), predict);
  std::ofstream csv(fs::path(dir) / "sequence.csv");
  csv << "frame,mean_throughput_mbps,qos,source\n";
  for (const auto& r : rows)
    csv << r.frame << "," << r.mean_throughput_mbps << "," << r.qos << "," << r.source << "\n";
  std::cout << "wrote " << rows.size() << " rows to " << (fs::path(dir) / "sequence.csv").string()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sensor placement from demonstrations"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, infer_args, eval_args, grid_args, seq_args;
  int n_samples = 10;
  std::string manifest_path, test_manifest_path, resume_path, weights_path, map_path;
  std::string out_map, out_pgm, out_placements;
  bool self_eval = false;
  std::vector<double> alphas, sigmas;
  double budget_frac = 0.2;
  int frames = 100;

  CLI::App* gen = app.add_subcommand("gen", "generate demonstrations");
  add_common(gen, gen_args);
  gen->add_option("-n,--samples", n_samples, "number of samples");

  CLI::App* train = app.add_subcommand("train", "train the saliency regressor");
  add_common(train, train_args);
  train->add_option("--manifest", manifest_path, "training manifest")->required();
  train->add_option("--test-manifest", test_manifest_path, "test manifest for corr logging");
  train->add_option("--resume", resume_path, "checkpoint to resume from");

  CLI::App* infer = app.add_subcommand("infer", "run the model on one map");
  add_common(infer, infer_args);
  infer->add_option("--weights", weights_path, "weight file")->required();
  infer->add_option("--map", map_path, "input F32GRID map")->required();
  infer->add_option("--out-map", out_map, "output saliency F32GRID");
  infer->add_option("--out-pgm", out_pgm, "human-viewable PGM export of the saliency map");
  infer->add_option("--out-placements", out_placements, "output placement text");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate placements on a manifest");
  add_common(eval_cmd, eval_args);
  eval_cmd->add_option("--manifest", manifest_path, "dataset manifest")->required();
  eval_cmd->add_option("--weights", weights_path, "weight file");
  eval_cmd->add_flag("--self", self_eval, "evaluate the expert against itself");

  CLI::App* grid = app.add_subcommand("gridsearch", "sweep (alpha2, sigma2)");
  add_common(grid, grid_args);
  grid->add_option("--manifest", manifest_path, "training manifest")->required();
  grid->add_option("--test-manifest", test_manifest_path, "test manifest")->required();
  grid->add_option("--alpha2", alphas, "alpha2 grid values");
  grid->add_option("--sigma2", sigmas, "sigma2 grid values");
  grid->add_option("--budget", budget_frac, "fraction of full epochs per cell");

  CLI::App* seq = app.add_subcommand("sequence", "dynamic-scene throughput curves");
  add_common(seq, seq_args);
  seq->add_option("--weights", weights_path, "weight file")->required();
  seq->add_option("--frames", frames, "number of frames");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_args, n_samples);
    if (train->parsed())
      return cmd_train(train_args, manifest_path, test_manifest_path, resume_path);
    if (infer->parsed())
      return cmd_infer(infer_args, weights_path, map_path, out_map, out_pgm, out_placements);
    if (eval_cmd->parsed()) return cmd_eval(eval_args, manifest_path, weights_path, self_eval);
    if (grid->parsed())
      return cmd_gridsearch(grid_args, manifest_path, test_manifest_path, alphas, sigmas,
                            budget_frac);
    if (seq->parsed()) return cmd_sequence(seq_args, weights_path, frames);
  } catch (const lfd::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const lfd::format_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const lfd::contract_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const lfd::generation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
