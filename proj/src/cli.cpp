// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include "posegan/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "posegan/composition.hpp"
#include "posegan/curation.hpp"
#include "posegan/dataset.hpp"
#include "posegan/evaluation.hpp"
#include "posegan/features.hpp"
#include "posegan/image_io.hpp"
#include "posegan/sampling.hpp"
#include "posegan/toy.hpp"
#include "posegan/training.hpp"

namespace posegan {

namespace fs = std::filesystem;

nlohmann::json default_run_config(const std::string& preset) {
  GeneratorConfig g;
  TrainConfig t;
  if (preset == "toy") {
    g = toy_generator_config();
    t = toy_train_config();
  } else if (preset != "full") {
    throw std::invalid_argument("preset: unknown value " + preset);
  }
  return {{"schema_version", kRunConfigSchemaVersion},
          {"seed", 0},
          {"generator", to_json(g)},
          {"train", to_json(t)},
          {"sample", {{"n", 1}, {"psi", 0.75}, {"mean_samples", 1000}, {"without_human", true}}},
          {"eval", to_json(EvalConfig{})},
          {"compose", to_json(ComposeConfig{})},
          {"curation", to_json(CurationConfig{})}};
}

namespace {

const std::vector<std::string> kCommands = {"curate",  "train", "sample",  "truncate-sweep",
                                            "eval",    "compose", "animate", "toy-data"};

nlohmann::json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(p.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& p, const nlohmann::json& j) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

/// Merges the config file (if any) over the defaults.
nlohmann::json load_run_config(const std::string& path, const std::string& preset) {
  nlohmann::json cfg = default_run_config(preset);
  if (path.empty()) return cfg;
  const nlohmann::json file = read_json_file(path);
  if (!file.is_object()) throw std::invalid_argument("config: expected a JSON object");
  const int version = file.value("schema_version", kRunConfigSchemaVersion);
  if (version != kRunConfigSchemaVersion) {
    throw std::invalid_argument("schema_version: unsupported value " + std::to_string(version));
  }
  cfg.merge_patch(file);
  return cfg;
}

std::vector<Pose> read_poses(const fs::path& p) {
  const nlohmann::json j = read_json_file(p);
  std::vector<Pose> poses;
  const auto add = [&](const nlohmann::json& e) {
    Pose pose = pose_from_json(e);
    pose.validate();
    poses.push_back(pose);
  };
  if (j.is_array()) {
    for (const auto& e : j) add(e);
  } else {
    add(j);
  }
  return poses;
}

/// Rescales a pose to the generator's resolution.
Pose at_resolution(const Pose& p, int r) {
  if (p.reference_resolution == r) return p;
  Pose q = p;
  const double s = static_cast<double>(r) / p.reference_resolution;
  q.keypoints = (p.keypoints.array() + 0.5) * s - 0.5;
  q.reference_resolution = r;
  return q;
}

std::string numbered(const std::string& stem, std::size_t i, std::size_t j) {
  std::ostringstream s;
  s << stem << "_" << std::setw(3) << std::setfill('0') << i << "_" << std::setw(3) << j << ".png";
  return s.str();
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("psi: not a number: " + item);
    }
  }
  if (out.empty()) throw std::invalid_argument("psi: empty list");
  return out;
}

/// A latent given as an integer seed (mapped with the pose) or a JSON file
/// holding {"ws": [...]} or {"w": [...]}.
PerScaleLatent resolve_latent(const Generator<float>& G, const std::string& source, const Pose& pose,
                              std::uint64_t seed) {
  char* end = nullptr;
  const unsigned long long s = std::strtoull(source.c_str(), &end, 10);
  if (!source.empty() && *end == '\0') {
    const Eigen::VectorXd z = sample_noise(seed, 0, static_cast<std::size_t>(s), G.config().z_dim);
    return PerScaleLatent::broadcast(map_latent(G, z, pose), G.config().num_scales());
  }
  const nlohmann::json j = read_json_file(source);
  PerScaleLatent l;
  if (j.contains("ws")) {
    l = per_scale_latent_from_json(j);
  } else {
    const auto w = j.at("w").get<std::vector<double>>();
    l = PerScaleLatent::broadcast(Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())),
                                  G.config().num_scales());
  }
  l.validate(G.config());
  return l;
}

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : cout_(out), cerr_(err) {}

  int run(int argc, const char* const* argv);

 private:
  void common(CLI::App* sub, bool wants_checkpoint);
  fs::path out_dir(const std::string& command) const;
  /// Applies a flag to the config tree when it was given.
  template <class T>
  void set_if(CLI::App* sub, const std::string& flag, nlohmann::json& node, const std::string& key, const T& v) {
    if (sub->count(flag) > 0) node[key] = v;
  }

  int cmd_toy_data(CLI::App* sub);
  int cmd_curate(CLI::App* sub);
  int cmd_train(CLI::App* sub);
  int cmd_sample(CLI::App* sub);
  int cmd_sweep(CLI::App* sub);
  int cmd_eval(CLI::App* sub);
  int cmd_compose(CLI::App* sub);
  int cmd_animate(CLI::App* sub);

  std::ostream& cout_;
  std::ostream& cerr_;

  // Shared flags.
  std::string config_path_, preset_ = "full", out_, checkpoint_;
  std::uint64_t seed_ = 0;

  // Command flags.
  std::string manifest_, data_, pose_path_, poses_path_, person_, scene_, psi_list_ = "0,0.25,0.5,0.75,1",
                                                                          conditioning_, stats_path_;
  int count_ = 2000, resolution_ = 32, n_ = 1, batch_ = 0, toy_ = 0, steps_int_ = 0, mean_samples_ = 0,
      test_count_ = 0;
  long steps_ = 0, log_every_ = 0;
  double psi_ = 0.75, lr_ = 0.0, alpha_ = 0.5;
  bool no_scene_ = false;
};

void Cli::common(CLI::App* sub, bool wants_checkpoint) {
  sub->add_option("--config", config_path_, "JSON run config; flags override its values");
  sub->add_option("--preset", preset_, "Defaults to start from: full or toy");
  sub->add_option("--seed", seed_, "Master seed");
  sub->add_option("--out", out_, "Output path");
  if (wants_checkpoint) sub->add_option("--checkpoint", checkpoint_, "Checkpoint directory")->required();
}

fs::path Cli::out_dir(const std::string& command) const {
  if (!out_.empty()) return out_;
  const char* root = std::getenv("POSEGAN_RUN_DIR");
  return fs::path(root != nullptr && *root != '\0' ? root : "runs") / command;
}

int Cli::run(int argc, const char* const* argv) {
  CLI::App app{"Pose-conditioned scene generation"};
  app.name("posegan");
  app.require_subcommand(1);

  auto* toy = app.add_subcommand("toy-data", "Write a procedural stick-figure dataset");
  common(toy, false);
  toy->add_option("--count", count_, "Number of images");
  toy->add_option("--resolution", resolution_, "Image size");

  auto* curate_cmd = app.add_subcommand("curate", "Filter video manifests into clips");
  common(curate_cmd, false);
  curate_cmd->add_option("--manifest", manifest_, "Input JSON-lines manifest")->required();
  curate_cmd->add_option("--stats", stats_path_, "Write rejection statistics here");
  curate_cmd->add_option("--test-count", test_count_, "Clips held out for testing");

  auto* train_cmd = app.add_subcommand("train", "Train a generator");
  common(train_cmd, false);
  train_cmd->add_option("--data", data_, "Image directory dataset");
  train_cmd->add_option("--toy", toy_, "Train on this many procedural toy images instead");
  train_cmd->add_option("--steps", steps_, "Total steps");
  train_cmd->add_option("--batch", batch_, "Batch size");
  train_cmd->add_option("--lr", lr_, "Learning rate");
  train_cmd->add_option("--resolution", resolution_, "Generator resolution");
  train_cmd->add_option("--conditioning", conditioning_, "latent, heatmap or dual");
  train_cmd->add_option("--log-every", log_every_, "Steps between log lines");

  auto* sample_cmd = app.add_subcommand("sample", "Sample images for poses");
  common(sample_cmd, true);
  sample_cmd->add_option("--pose", pose_path_, "Pose JSON (object or array)")->required();
  sample_cmd->add_option("--n", n_, "Samples per pose");
  sample_cmd->add_option("--psi", psi_, "Truncation");
  sample_cmd->add_option("--mean-samples", mean_samples_, "Draws for the conditional mean");
  sample_cmd->add_flag("--no-scene", no_scene_, "Skip the scene-only variants");

  auto* sweep_cmd = app.add_subcommand("truncate-sweep", "Conditional vs unconditional truncation grid");
  common(sweep_cmd, true);
  sweep_cmd->add_option("--pose", pose_path_, "Pose JSON")->required();
  sweep_cmd->add_option("--psi", psi_list_, "Comma-separated truncation values");
  sweep_cmd->add_option("--n", n_, "Samples (row pairs)");
  sweep_cmd->add_option("--data", data_, "Dataset whose poses define the unconditional mean");
  sweep_cmd->add_option("--mean-samples", mean_samples_, "Draws for each mean");

  auto* eval_cmd = app.add_subcommand("eval", "PCKh and FID on a test set");
  common(eval_cmd, true);
  eval_cmd->add_option("--data", data_, "Test image directory")->required();
  eval_cmd->add_option("--alpha", alpha_, "PCKh radius relative to head size");
  eval_cmd->add_option("--psi", psi_, "Truncation");
  eval_cmd->add_option("--mean-samples", mean_samples_, "Draws for the conditional mean");

  auto* compose_cmd = app.add_subcommand("compose", "Place one sample's person into another's scene");
  common(compose_cmd, true);
  compose_cmd->add_option("--person", person_, "Seed or latent JSON of the person source")->required();
  compose_cmd->add_option("--scene", scene_, "Seed or latent JSON of the scene source")->required();
  compose_cmd->add_option("--pose", pose_path_, "Shared pose JSON")->required();
  compose_cmd->add_option("--steps", steps_int_, "Optimization steps");
  compose_cmd->add_option("--lr", lr_, "Learning rate");

  auto* animate_cmd = app.add_subcommand("animate", "Render a pose sequence with a fixed scene latent");
  common(animate_cmd, true);
  animate_cmd->add_option("--poses", poses_path_, "JSON array of poses")->required();
  animate_cmd->add_option("--latent", person_, "Seed or latent JSON (default: seed 0)");

  if (argc < 2) {
    cerr_ << app.help();
    return 2;
  }
  const std::string first = argv[1];
  const bool help = first == "-h" || first == "--help";
  if (!help && std::find(kCommands.begin(), kCommands.end(), first) == kCommands.end()) {
    cerr_ << "error: unknown command '" << first << "'\n" << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    cout_ << (help ? app.help() : app.get_subcommands().front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    cerr_ << "error: " << e.what() << "\n";
    return 2;
  }
  CLI::App* sub = app.get_subcommands().front();
  try {
    const std::string name = sub->get_name();
    if (name == "toy-data") return cmd_toy_data(sub);
    if (name == "curate") return cmd_curate(sub);
    if (name == "train") return cmd_train(sub);
    if (name == "sample") return cmd_sample(sub);
    if (name == "truncate-sweep") return cmd_sweep(sub);
    if (name == "eval") return cmd_eval(sub);
    if (name == "compose") return cmd_compose(sub);
    return cmd_animate(sub);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    cerr_ << "error: " << msg << "\n";
    return 1;
  }
}

int Cli::cmd_toy_data(CLI::App*) {
  if (count_ < 1) throw std::invalid_argument("count: must be positive");
  const fs::path dir = out_dir("toy-data");
  write_image_directory(dir, make_toy_dataset(count_, resolution_, seed_));
  cout_ << nlohmann::json{{"out", dir.string()}, {"count", count_}, {"resolution", resolution_}}.dump() << "\n";
  return 0;
}

int Cli::cmd_curate(CLI::App* sub) {
  nlohmann::json cfg = load_run_config(config_path_, preset_);
  set_if(sub, "--seed", cfg, "seed", seed_);
  const CurationConfig cc = curation_config_from_json(cfg["curation"]);
  std::ifstream in(manifest_);
  if (!in) throw std::runtime_error("cannot open " + manifest_);
  const auto videos = read_manifest(in);
  const CurationResult r = curate(videos, cc);
  const fs::path path = out_.empty() ? out_dir("curate") / "clips.jsonl" : fs::path(out_);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto write_clips = [](const fs::path& p, const std::vector<Clip>& clips) {
    std::ofstream o(p);
    for (const Clip& c : clips) o << to_json(c).dump() << "\n";
    if (!o) throw std::runtime_error("cannot write " + p.string());
  };
  write_clips(path, r.clips);
  if (test_count_ > 0) {
    const ClipSplit split =
        split_clips(r.clips, static_cast<std::size_t>(test_count_), cfg["seed"].get<std::uint64_t>());
    for (const auto& w : split.warnings) cerr_ << "warning: " << w << "\n";
    write_clips(fs::path(path).replace_extension(".train.jsonl"), split.train);
    write_clips(fs::path(path).replace_extension(".test.jsonl"), split.test);
  }
  if (!stats_path_.empty()) write_json_file(stats_path_, to_json(r.stats));
  cout_ << to_json(r.stats).dump() << "\n";
  return 0;
}

int Cli::cmd_train(CLI::App* sub) {
  nlohmann::json cfg = load_run_config(config_path_, preset_);
  set_if(sub, "--seed", cfg, "seed", seed_);
  set_if(sub, "--steps", cfg["train"], "total_steps", steps_);
  set_if(sub, "--batch", cfg["train"], "batch_size", batch_);
  set_if(sub, "--lr", cfg["train"], "learning_rate", lr_);
  set_if(sub, "--log-every", cfg["train"], "log_every", log_every_);
  set_if(sub, "--resolution", cfg["generator"], "resolution", resolution_);
  set_if(sub, "--conditioning", cfg["generator"], "conditioning", conditioning_);
  cfg["train"]["seed"] = cfg["seed"];
  const GeneratorConfig g = generator_config_from_json(cfg["generator"]);
  const DiscriminatorConfig d = cfg.contains("discriminator")
                                    ? discriminator_config_from_json(cfg["discriminator"])
                                    : DiscriminatorConfig::matching(g);
  const TrainConfig t = train_config_from_json(cfg["train"]);
  if (data_.empty() == (toy_ == 0)) throw std::invalid_argument("train: give exactly one of --data or --toy");

  std::unique_ptr<Dataset> data;
  if (toy_ > 0) {
    data = std::make_unique<InMemoryDataset>(make_toy_dataset(toy_, g.resolution, t.seed));
  } else {
    data = std::make_unique<ImageDirectoryDataset>(data_);
  }
  const fs::path dir = out_dir("train");
  fs::create_directories(dir);
  cfg["discriminator"] = to_json(d);
  write_json_file(dir / "run_config.json", cfg);
  Trainer trainer(g, d, t, *data);
  std::ofstream log(dir / "metrics.jsonl");
  train(trainer, dir, &log, [&](const StepMetrics& m) {
    if (t.log_every > 0 && m.step % t.log_every == 0) {
      cerr_ << "step " << m.step << " d_loss " << m.d_loss << " g_loss " << m.g_loss << "\n";
    }
  });
  cout_ << nlohmann::json{{"out", dir.string()}, {"steps", trainer.state().step}}.dump() << "\n";
  return 0;
}

int Cli::cmd_sample(CLI::App* sub) {
  nlohmann::json cfg = load_run_config(config_path_, preset_);
  set_if(sub, "--seed", cfg, "seed", seed_);
  set_if(sub, "--n", cfg["sample"], "n", n_);
  set_if(sub, "--psi", cfg["sample"], "psi", psi_);
  set_if(sub, "--mean-samples", cfg["sample"], "mean_samples", mean_samples_);
  if (no_scene_) cfg["sample"]["without_human"] = false;
  SampleConfig sc;
  sc.n = cfg["sample"].value("n", 1);
  sc.psi = cfg["sample"].value("psi", 0.75);
  sc.mean_samples = cfg["sample"].value("mean_samples", 1000);
  sc.without_human = cfg["sample"].value("without_human", true);
  sc.seed = cfg["seed"].get<std::uint64_t>();
  if (sc.n < 0) throw std::invalid_argument("sample.n: must be non-negative");
  if (sc.mean_samples < 1) throw std::invalid_argument("sample.mean_samples: must be positive");
  if (!std::isfinite(sc.psi)) throw std::invalid_argument("sample.psi: must be finite");

  const Generator<float> G = load_generator(checkpoint_);
  const auto poses = read_poses(pose_path_);
  const fs::path dir = out_dir("sample");
  fs::create_directories(dir);
  nlohmann::json latents = nlohmann::json::array();
  std::size_t written = 0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Pose pose = at_resolution(poses[i], G.config().resolution);
    const auto samples = sample_pose(G, pose, i, sc);
    for (std::size_t j = 0; j < samples.size(); ++j) {
      write_png(dir / numbered("sample", i, j), samples[j].image);
      ++written;
      if (sc.without_human) {
        write_png(dir / numbered("scene", i, j), samples[j].scene);
        ++written;
      }
      const Eigen::VectorXd& w = samples[j].w;
      latents.push_back({{"pose", i}, {"index", j}, {"w", std::vector<double>(w.data(), w.data() + w.size())}});
    }
  }
  write_json_file(dir / "latents.json", latents);
  cout_ << nlohmann::json{{"out", dir.string()}, {"images", written}}.dump() << "\n";
  return 0;
}

int Cli::cmd_sweep(CLI::App* sub) {
  nlohmann::json cfg = load_run_config(config_path_, preset_);
  set_if(sub, "--seed", cfg, "seed", seed_);
  set_if(sub, "--mean-samples", cfg["sample"], "mean_samples", mean_samples_);
  const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
  const int mean_n = cfg["sample"].value("mean_samples", 1000);
  if (n_ < 1) throw std::invalid_argument("n: must be positive");
  const std::vector<double> psis = parse_list(psi_list_);

  const Generator<float> G = load_generator(checkpoint_);
  const Pose pose = at_resolution(read_poses(pose_path_).front(), G.config().resolution);
  std::vector<Pose> pool;
  if (!data_.empty()) {
    const ImageDirectoryDataset data(data_);
    for (std::size_t i = 0; i < data.size(); ++i) pool.push_back(at_resolution(data.get(i).pose, G.config().resolution));
  } else {
    pool.push_back(pose);
  }
  const Eigen::VectorXd cond = generator_conditional_mean(G, pose, mean_n, seed);
  const Eigen::VectorXd uncond = generator_unconditional_mean(G, pool, mean_n, seed);
  // Rows alternate conditional / unconditional truncation per sample;
  // columns follow the psi list.
  std::vector<FeatureMap<float>> tiles;
  for (int i = 0; i < n_; ++i) {
    const Eigen::VectorXd w = map_latent(G, sample_noise(seed, 0, static_cast<std::size_t>(i), G.config().z_dim), pose);
    for (const Eigen::VectorXd* mean : {&cond, &uncond}) {
      for (double psi : psis) tiles.push_back(render_latent(G, truncate(w, *mean, psi), pose));
    }
  }
  const fs::path dir = out_dir("truncate-sweep");
  fs::create_directories(dir);
  write_png(dir / "grid.png", tile_images(tiles, static_cast<int>(psis.size())));
  write_json_file(dir / "layout.json", {{"columns", psis}, {"rows", 2 * n_}, {"row_order", {"conditional", "unconditional"}}});
  cout_ << nlohmann::json{{"out", dir.string()}, {"images", tiles.size()}}.dump() << "\n";
  return 0;
}

int Cli::cmd_eval(CLI::App* sub) {
  nlohmann::json cfg = load_run_config(config_path_, preset_);
  set_if(sub, "--seed", cfg, "seed", seed_);
  set_if(sub, "--alpha", cfg["eval"], "alpha", alpha_);
  set_if(sub, "--psi", cfg["eval"], "psi", psi_);
  set_if(sub, "--mean-samples", cfg["eval"], "mean_samples", mean_samples_);
  cfg["eval"]["seed"] = cfg["seed"];
  const EvalConfig ec = eval_config_from_json(cfg["eval"]);
  const Generator<float> G = load_generator(checkpoint_);
  const ImageDirectoryDataset test(data_);
  if (test.resolution() != G.config().resolution) {
    throw std::invalid_argument("eval: test images are " + std::to_string(test.resolution()) +
                                " px but the generator makes " + std::to_string(G.config().resolution));
  }
  const ConvEmbedder<float> embed(0, 64);
  const FeatureExtractor features = [&](const FeatureMap<float>& x) { return embed.features(x); };
  const EvalReport r = evaluate_model(G, test, ToyPoseExtractor(), features, ec);
  const fs::path path = out_.empty() ? out_dir("eval") / "report.json" : fs::path(out_);
  write_json_file(path, to_json(r, true));
  cout_ << to_json(r).dump() << "\n";
  return 0;
}

int Cli::cmd_compose(CLI::App* sub) {
  nlohmann::json cfg = load_run_config(config_path_, preset_);
  set_if(sub, "--seed", cfg, "seed", seed_);
  set_if(sub, "--steps", cfg["compose"], "steps", steps_int_);
  set_if(sub, "--lr", cfg["compose"], "learning_rate", lr_);
  const ComposeConfig cc = compose_config_from_json(cfg["compose"]);
  const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
  const Generator<float> G = load_generator(checkpoint_);
  const Pose pose = at_resolution(read_poses(pose_path_).front(), G.config().resolution);
  const PerScaleLatent person = resolve_latent(G, person_, pose, seed);
  const PerScaleLatent scene = resolve_latent(G, scene_, pose, seed);
  const ConvEmbedder<float> embed(seed, cc.crop_size);
  const ComposeResult r = compose(G, embed, person, scene, pose, cc, [&](int step, double loss) {
    if (step % 100 == 0) cerr_ << "step " << step << " loss " << loss << "\n";
  });
  const fs::path dir = out_dir("compose");
  fs::create_directories(dir);
  write_png(dir / "composite.png", r.image);
  write_json_file(dir / "latent.json", to_json(r.latent));
  write_json_file(dir / "losses.json", r.losses);
  cout_ << nlohmann::json{{"out", dir.string()}, {"initial_loss", r.losses.front()}, {"final_loss", r.losses.back()}}
              .dump()
       << "\n";
  return 0;
}

int Cli::cmd_animate(CLI::App* sub) {
  nlohmann::json cfg = load_run_config(config_path_, preset_);
  set_if(sub, "--seed", cfg, "seed", seed_);
  const Generator<float> G = load_generator(checkpoint_);
  std::vector<Pose> poses;
  for (const Pose& p : read_poses(poses_path_)) poses.push_back(at_resolution(p, G.config().resolution));
  if (poses.empty()) throw std::invalid_argument("animate: empty pose sequence");
  const PerScaleLatent l = resolve_latent(G, person_.empty() ? "0" : person_, poses.front(), cfg["seed"].get<std::uint64_t>());
  const auto frames = animate_latent(G, l.ws.front(), poses);
  const fs::path dir = out_dir("animate");
  fs::create_directories(dir);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::ostringstream name;
    name << "frame_" << std::setw(4) << std::setfill('0') << t << ".png";
    write_png(dir / name.str(), frames[t]);
  }
  cout_ << nlohmann::json{{"out", dir.string()}, {"frames", frames.size()}}.dump() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return Cli(out, err).run(argc, argv);
}

}  // namespace posegan
