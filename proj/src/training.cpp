// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include "posegan/training.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>

#include "posegan/checkpoint.hpp"

namespace posegan {

namespace {

constexpr int kSchemaVersion = 1;

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::invalid_argument(field + ": " + what);
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void TrainConfig::validate() const {
  check(learning_rate > 0, "train.learning_rate", "must be positive");
  check(adam_beta1 >= 0 && adam_beta1 < 1, "train.adam_beta1", "must be in [0, 1)");
  check(adam_beta2 >= 0 && adam_beta2 < 1, "train.adam_beta2", "must be in [0, 1)");
  check(adam_epsilon > 0, "train.adam_epsilon", "must be positive");
  check(batch_size >= 2, "train.batch_size", "must be at least 2");
  check(r1_gamma >= 0, "train.r1_gamma", "must be non-negative");
  check(ema_beta > 0 && ema_beta < 1, "train.ema_beta", "must be in (0, 1)");
  check(ema_warmup_steps >= 0, "train.ema_warmup_steps", "must be non-negative");
  check(d_reg_interval >= 1, "train.d_reg_interval", "must be positive");
  check(g_reg_interval >= 1, "train.g_reg_interval", "must be positive");
  check(pl_weight >= 0, "train.pl_weight", "must be non-negative");
  check(pl_decay > 0 && pl_decay <= 1, "train.pl_decay", "must be in (0, 1]");
  check(total_steps >= 0, "train.total_steps", "must be non-negative");
  check(checkpoint_every >= 0, "train.checkpoint_every", "must be non-negative");
  check(log_every >= 1, "train.log_every", "must be positive");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_epsilon", c.adam_epsilon},
          {"batch_size", c.batch_size},
          {"r1_gamma", c.r1_gamma},
          {"ema_beta", c.ema_beta},
          {"ema_warmup_steps", c.ema_warmup_steps},
          {"d_reg_interval", c.d_reg_interval},
          {"g_reg_interval", c.g_reg_interval},
          {"pl_weight", c.pl_weight},
          {"pl_decay", c.pl_decay},
          {"total_steps", c.total_steps},
          {"mismatch", c.mismatch},
          {"augment", to_json(c.augment)},
          {"seed", c.seed},
          {"checkpoint_every", c.checkpoint_every},
          {"log_every", c.log_every}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.r1_gamma = j.value("r1_gamma", c.r1_gamma);
  c.ema_beta = j.value("ema_beta", c.ema_beta);
  c.ema_warmup_steps = j.value("ema_warmup_steps", c.ema_warmup_steps);
  c.d_reg_interval = j.value("d_reg_interval", c.d_reg_interval);
  c.g_reg_interval = j.value("g_reg_interval", c.g_reg_interval);
  c.pl_weight = j.value("pl_weight", c.pl_weight);
  c.pl_decay = j.value("pl_decay", c.pl_decay);
  c.total_steps = j.value("total_steps", c.total_steps);
  c.mismatch = j.value("mismatch", c.mismatch);
  if (j.contains("augment")) c.augment = augment_config_from_json(j.at("augment"));
  c.seed = j.value("seed", c.seed);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.log_every = j.value("log_every", c.log_every);
  c.validate();
  return c;
}

double ema_beta_at(long step, double beta, long warmup) {
  if (warmup <= 0) return beta;
  return beta * std::min(1.0, static_cast<double>(step) / static_cast<double>(warmup));
}

PathLengthStats path_length_update(std::span<const double> lengths, double& target, double decay) {
  PathLengthStats s;
  s.lengths.assign(lengths.begin(), lengths.end());
  s.mean_before = target;
  double penalty = 0.0;
  for (double l : lengths) penalty += (l - target) * (l - target);
  s.penalty = penalty / static_cast<double>(lengths.size());
  const double mean = std::accumulate(lengths.begin(), lengths.end(), 0.0) / static_cast<double>(lengths.size());
  target += decay * (mean - target);
  s.mean_after = target;
  return s;
}

nlohmann::json to_json(const StepMetrics& m) {
  return {{"step", m.step},
          {"d_loss", m.d_loss},
          {"g_loss", m.g_loss},
          {"r1", finite_or_null(m.r1)},
          {"pl", finite_or_null(m.pl)},
          {"ema_beta", m.ema_beta},
          {"real_logit", m.real_logit},
          {"fake_logit", m.fake_logit},
          {"mismatch_logit", m.mismatch_logit}};
}

TrainState TrainState::initialize(const GeneratorConfig& g, const DiscriminatorConfig& d, std::uint64_t seed) {
  Rng init = Rng::substream(seed, "init");
  TrainState s{Generator<float>::initialized(g, init),
               {},
               Discriminator<float>::initialized(d, init),
               {},
               {},
               0,
               0.0,
               Rng::substream(seed, "data"),
               Rng::substream(seed, "train")};
  s.G_ema = s.G;
  s.g_opt = AdamState<float>::like(s.G.params());
  s.d_opt = AdamState<float>::like(s.D.params());
  return s;
}

Trainer::Trainer(GeneratorConfig gcfg, DiscriminatorConfig dcfg, TrainConfig tcfg, const Dataset& data)
    : Trainer(TrainState::initialize(gcfg, dcfg, tcfg.seed), gcfg, dcfg, tcfg, data) {}

Trainer::Trainer(TrainState state, GeneratorConfig gcfg, DiscriminatorConfig dcfg, TrainConfig tcfg,
                 const Dataset& data)
    : gcfg_(std::move(gcfg)), dcfg_(std::move(dcfg)), tcfg_(std::move(tcfg)), data_(&data), state_(std::move(state)) {
  gcfg_.validate();
  dcfg_.validate();
  tcfg_.validate();
  if (data.size() == 0) throw std::invalid_argument("train: dataset is empty");
  if (data.resolution() != gcfg_.resolution || dcfg_.resolution != gcfg_.resolution) {
    throw std::invalid_argument("train: dataset resolution does not match the model resolution");
  }
}

void Trainer::sample_batch(std::vector<FeatureMap<float>>& images, std::vector<Pose>& poses) {
  images.clear();
  poses.clear();
  const int last = static_cast<int>(data_->size()) - 1;
  for (int i = 0; i < tcfg_.batch_size; ++i) {
    Example e = data_->get(static_cast<std::size_t>(state_.data_rng.uniform_int(0, last)));
    images.push_back(std::move(e.image));
    poses.push_back(std::move(e.pose));
  }
}

StepMetrics Trainer::step() {
  TrainState& s = state_;
  StepMetrics m;
  m.step = s.step;
  std::vector<FeatureMap<float>> images;
  std::vector<Pose> poses;
  sample_batch(images, poses);

  auto fail = [&](const std::string& what) {
    throw TrainingError("non-finite " + what + " at step " + std::to_string(s.step));
  };

  // Discriminator.
  ParamSet<float> d_grads = s.D.params().zeros_like();
  const bool do_r1 = tcfg_.r1_gamma > 0.0 && s.step % tcfg_.d_reg_interval == 0;
  std::vector<DiscriminatorInput<float>> reals;
  const DLossTerms terms = d_loss<float>(s.G, s.D, images, poses, tcfg_.mismatch, tcfg_.augment, s.train_rng, &d_grads,
                                         do_r1 ? &reals : nullptr);
  m.d_loss = terms.loss;
  m.real_logit = terms.real_logit;
  m.fake_logit = terms.fake_logit;
  m.mismatch_logit = terms.mismatch_logit;
  if (!std::isfinite(m.d_loss)) fail("d_loss");
  if (do_r1) {
    m.r1 = r1_penalty(s.D, std::span<const DiscriminatorInput<float>>(reals), tcfg_.r1_gamma, &d_grads,
                      static_cast<double>(tcfg_.d_reg_interval));
    if (!std::isfinite(m.r1)) fail("r1 penalty");
  }
  if (!d_grads.all_finite()) fail("discriminator gradient");
  s.d_opt.update(s.D.params(), d_grads, tcfg_.adam());

  // Generator.
  ParamSet<float> g_grads = s.G.params().zeros_like();
  m.g_loss = g_loss<float>(s.G, s.D, poses, tcfg_.augment, s.train_rng, &g_grads);
  if (!std::isfinite(m.g_loss)) fail("g_loss");
  if (tcfg_.pl_weight > 0.0 && s.step % tcfg_.g_reg_interval == 0) {
    std::vector<Vec<float>> zs;
    std::vector<FeatureMap<float>> noise;
    for (std::size_t i = 0; i < poses.size(); ++i) {
      zs.push_back(s.train_rng.normal_vector<float>(gcfg_.z_dim));
      noise.push_back(path_length_noise<float>(gcfg_.resolution, s.train_rng));
    }
    const PathLengthStats pl = path_length_penalty<float>(s.G, zs, poses, noise, s.pl_mean, tcfg_.pl_decay, &g_grads,
                                                          tcfg_.pl_weight * tcfg_.g_reg_interval);
    m.pl = pl.penalty;
    if (!std::isfinite(m.pl)) fail("path-length penalty");
  }
  if (!g_grads.all_finite()) fail("generator gradient");
  s.g_opt.update(s.G.params(), g_grads, tcfg_.adam());

  m.ema_beta = ema_beta_at(s.step, tcfg_.ema_beta, tcfg_.ema_warmup_steps);
  ema_update(s.G_ema.params(), s.G.params(), m.ema_beta);
  ++s.step;
  return m;
}

void save_checkpoint(const std::filesystem::path& dir, const Trainer& trainer) {
  const TrainState& s = trainer.state();
  std::filesystem::create_directories(dir);
  BlobMap blobs;
  put_params(blobs, "G.", s.G.params());
  put_params(blobs, "G_ema.", s.G_ema.params());
  put_params(blobs, "D.", s.D.params());
  put_params(blobs, "G_opt.m.", s.g_opt.m);
  put_params(blobs, "G_opt.v.", s.g_opt.v);
  put_params(blobs, "D_opt.m.", s.d_opt.m);
  put_params(blobs, "D_opt.v.", s.d_opt.v);
  write_blobs(dir / "params.bin", blobs);
  const nlohmann::json config = {
      {"schema_version", kSchemaVersion},
      {"generator", to_json(trainer.generator_config())},
      {"discriminator", to_json(trainer.discriminator_config())},
      {"train", to_json(trainer.train_config())},
      {"state",
       {{"step", s.step},
        {"pl_mean", s.pl_mean},
        {"g_opt_step", s.g_opt.step},
        {"d_opt_step", s.d_opt.step},
        {"data_rng", s.data_rng.state()},
        {"train_rng", s.train_rng.state()}}}};
  std::ofstream(dir / "config.json") << config.dump(2) << "\n";
}

namespace {

nlohmann::json read_config(const std::filesystem::path& dir) {
  std::ifstream in(dir / "config.json");
  if (!in) throw std::runtime_error("checkpoint: cannot open " + (dir / "config.json").string());
  const nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("schema_version", 0) != kSchemaVersion) throw std::runtime_error("checkpoint: unsupported schema version");
  return j;
}

}  // namespace

TrainState load_train_state(const std::filesystem::path& dir, GeneratorConfig* gcfg, DiscriminatorConfig* dcfg,
                            TrainConfig* tcfg) {
  const nlohmann::json j = read_config(dir);
  const GeneratorConfig g = generator_config_from_json(j.at("generator"));
  const DiscriminatorConfig d = discriminator_config_from_json(j.at("discriminator"));
  const TrainConfig t = train_config_from_json(j.at("train"));
  TrainState s{Generator<float>(g), Generator<float>(g), Discriminator<float>(d), {}, {}, 0, 0.0, Rng(), Rng()};
  s.g_opt = AdamState<float>::like(s.G.params());
  s.d_opt = AdamState<float>::like(s.D.params());
  const BlobMap blobs = read_blobs(dir / "params.bin");
  get_params(blobs, "G.", s.G.params());
  get_params(blobs, "G_ema.", s.G_ema.params());
  get_params(blobs, "D.", s.D.params());
  get_params(blobs, "G_opt.m.", s.g_opt.m);
  get_params(blobs, "G_opt.v.", s.g_opt.v);
  get_params(blobs, "D_opt.m.", s.d_opt.m);
  get_params(blobs, "D_opt.v.", s.d_opt.v);
  const auto& st = j.at("state");
  s.step = st.at("step").get<long>();
  s.pl_mean = st.at("pl_mean").get<double>();
  s.g_opt.step = st.at("g_opt_step").get<long>();
  s.d_opt.step = st.at("d_opt_step").get<long>();
  s.data_rng.set_state(st.at("data_rng").get<std::string>());
  s.train_rng.set_state(st.at("train_rng").get<std::string>());
  if (gcfg != nullptr) *gcfg = g;
  if (dcfg != nullptr) *dcfg = d;
  if (tcfg != nullptr) *tcfg = t;
  return s;
}

Generator<float> load_generator(const std::filesystem::path& dir, bool ema) {
  const nlohmann::json j = read_config(dir);
  Generator<float> g(generator_config_from_json(j.at("generator")));
  get_params(read_blobs(dir / "params.bin"), ema ? "G_ema." : "G.", g.params());
  return g;
}

Discriminator<float> load_discriminator(const std::filesystem::path& dir) {
  const nlohmann::json j = read_config(dir);
  Discriminator<float> d(discriminator_config_from_json(j.at("discriminator")));
  get_params(read_blobs(dir / "params.bin"), "D.", d.params());
  return d;
}

void train(Trainer& trainer, const std::filesystem::path& run_dir, std::ostream* metrics_log,
           const std::function<void(const StepMetrics&)>& on_step) {
  const TrainConfig& cfg = trainer.train_config();
  while (trainer.state().step < cfg.total_steps) {
    const StepMetrics m = trainer.step();
    if (metrics_log != nullptr && m.step % cfg.log_every == 0) *metrics_log << to_json(m).dump() << "\n";
    if (on_step) on_step(m);
    const long done = trainer.state().step;
    if (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 && done < cfg.total_steps) {
      char name[32];
      std::snprintf(name, sizeof(name), "step-%08ld", done);
      save_checkpoint(run_dir / name, trainer);
    }
  }
  if (metrics_log != nullptr) metrics_log->flush();
  save_checkpoint(run_dir / "latest", trainer);
}

}  // namespace posegan
