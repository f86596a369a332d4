// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// Adversarial training: non-saturating losses with mismatched-pose fakes,
// lazy R1 and path-length regularization, generator EMA.
//
// Second-order terms use forward-over-reverse differentiation: the network is
// re-run on dual numbers with the tangent seeded along the first-order
// gradient, and the dual parts of the parameter gradients are the required
// Hessian-vector products.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "posegan/augment.hpp"
#include "posegan/dataset.hpp"
#include "posegan/networks.hpp"

namespace posegan {

struct TrainConfig {
  double learning_rate = 2.5e-3;
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.99;
  double adam_epsilon = 1e-8;
  int batch_size = 40;
  double r1_gamma = 0.05;
  double ema_beta = 0.995;
  long ema_warmup_steps = 150000;
  int d_reg_interval = 16;
  int g_reg_interval = 8;
  double pl_weight = 2.0;
  double pl_decay = 0.01;
  long total_steps = 1000;
  bool mismatch = true;
  AugmentConfig augment;
  std::uint64_t seed = 0;
  long checkpoint_every = 0;  // 0: final checkpoint only
  long log_every = 1;

  AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_epsilon}; }
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// EMA

/// Linear ramp of the decay from 0 to beta over warmup steps.
double ema_beta_at(long step, double beta, long warmup);

template <class S>
void ema_update(ParamSet<S>& ema, const ParamSet<S>& params, double beta) {
  if (beta == 0.0) {
    ema = params;
    return;
  }
  const S a(1.0 - beta);
  for (int i = 0; i < ema.size(); ++i) ema[i] += a * (params[i] - ema[i]);
}

// ---------------------------------------------------------------------------
// Adversarial losses

/// One discriminator input after augmentation.
template <class S>
struct DiscriminatorInput {
  FeatureMap<S> image;
  HeatmapStack heatmaps;
  Pose pose;
};

template <class S>
DiscriminatorInput<S> discriminator_input(const FeatureMap<S>& image, const Pose& pose, const Augmentation& aug) {
  DiscriminatorInput<S> in{aug.apply(image), {}, aug.pose(pose)};
  in.heatmaps = render_heatmaps(in.pose, image.height);
  return in;
}

struct DLossTerms {
  double loss = 0.0;
  double real_logit = 0.0;  // batch means
  double fake_logit = 0.0;
  double mismatch_logit = 0.0;
};

/// Mean over the batch of softplus(-D(real)) + softplus(D(fake)) +
/// softplus(D(real, pose of the next sample)). Accumulates dL/dtheta_D into
/// d_grads and returns the augmented reals (for R1) through reals_out.
template <class S>
DLossTerms d_loss(const Generator<S>& G, const Discriminator<S>& D, std::span<const FeatureMap<S>> images,
                  std::span<const Pose> poses, bool mismatch, const AugmentConfig& augment, Rng& rng,
                  ParamSet<S>* d_grads, std::vector<DiscriminatorInput<S>>* reals_out = nullptr) {
  const std::size_t n = images.size();
  if (n < 2 || poses.size() != n) throw std::invalid_argument("d_loss: need a batch of at least two (image, pose) pairs");
  const int res = images[0].height;
  const S inv_n(1.0 / static_cast<double>(n));
  DLossTerms out;
  if (reals_out != nullptr) reals_out->clear();
  for (std::size_t i = 0; i < n; ++i) {
    // Real pair.
    const Augmentation real_aug(draw_augment(augment, rng), res, res);
    DiscriminatorInput<S> real = discriminator_input(images[i], poses[i], real_aug);
    typename Discriminator<S>::template Tape<S> tape;
    const S lr = D.forward(real.image, real.heatmaps, real.pose, &tape);
    out.real_logit += value_of(lr);
    out.loss += value_of(softplus(S(-lr)));
    if (d_grads != nullptr) D.backward(tape, real.pose, S(-sigmoid(S(-lr))) * inv_n, d_grads, false);

    // Fake with the same pose.
    const Vec<S> z = rng.normal_vector<S>(G.config().z_dim);
    const FeatureMap<S> fake_img = G.generate(G.map(z, poses[i]), G.pyramid(poses[i]));
    const Augmentation fake_aug(draw_augment(augment, rng), res, res);
    const DiscriminatorInput<S> fake = discriminator_input(fake_img, poses[i], fake_aug);
    const S lf = D.forward(fake.image, fake.heatmaps, fake.pose, &tape);
    out.fake_logit += value_of(lf);
    out.loss += value_of(softplus(lf));
    if (d_grads != nullptr) D.backward(tape, fake.pose, S(sigmoid(lf)) * inv_n, d_grads, false);

    // Real image, another sample's pose, the real's transform.
    if (mismatch) {
      const Pose other = real_aug.pose(poses[(i + 1) % n]);
      const HeatmapStack other_heat = render_heatmaps(other, res);
      const S lm = D.forward(real.image, other_heat, other, &tape);
      out.mismatch_logit += value_of(lm);
      out.loss += value_of(softplus(lm));
      if (d_grads != nullptr) D.backward(tape, other, S(sigmoid(lm)) * inv_n, d_grads, false);
    }
    if (reals_out != nullptr) reals_out->push_back(std::move(real));
  }
  const double dn = static_cast<double>(n);
  out.loss /= dn;
  out.real_logit /= dn;
  out.fake_logit /= dn;
  out.mismatch_logit /= dn;
  return out;
}

/// Mean softplus(-D(augment(G(z, pose)), pose)). Accumulates dL/dtheta_G.
template <class S>
double g_loss(const Generator<S>& G, const Discriminator<S>& D, std::span<const Pose> poses,
              const AugmentConfig& augment, Rng& rng, ParamSet<S>* g_grads) {
  if (poses.empty()) throw std::invalid_argument("g_loss: empty batch");
  const int res = G.config().resolution;
  const int scales = G.config().num_scales();
  const S inv_n(1.0 / static_cast<double>(poses.size()));
  double loss = 0.0;
  for (const Pose& pose : poses) {
    const Vec<S> z = rng.normal_vector<S>(G.config().z_dim);
    MappingTape<S> mtape;
    const Vec<S> w = G.map(z, pose, &mtape);
    const std::vector<Vec<S>> ws(static_cast<std::size_t>(scales), w);
    const auto pyramid = G.pyramid(pose);
    SynthesisTape<S> stape;
    const FeatureMap<S> img = G.synthesize(ws, pyramid, {}, &stape);
    const Augmentation aug(draw_augment(augment, rng), res, res);
    const DiscriminatorInput<S> in = discriminator_input(img, pose, aug);
    typename Discriminator<S>::template Tape<S> dtape;
    const S logit = D.forward(in.image, in.heatmaps, in.pose, &dtape);
    loss += value_of(softplus(S(-logit)));
    if (g_grads == nullptr) continue;
    const FeatureMap<S> g_in = D.backward(dtape, in.pose, S(-sigmoid(S(-logit))) * inv_n, nullptr, true);
    const auto g_ws = G.synthesize_backward(stape, aug.apply_transpose(g_in), g_grads);
    Vec<S> g_w = Vec<S>::Zero(w.size());
    for (const auto& g : g_ws) g_w += g;
    G.map_backward(pose, mtape, g_w, g_grads);
  }
  return loss / static_cast<double>(poses.size());
}

// ---------------------------------------------------------------------------
// R1

/// (gamma / 2) * mean_i |grad_x D(x_i)|^2 over the given inputs. When grads is
/// non-null, adds grad_scale times its parameter gradient. Model needs
/// forward / backward / params / cast<Dual<T>> and a Tape<U> alias.
template <class Model>
double r1_penalty(const Model& D, std::span<const DiscriminatorInput<typename Model::Scalar>> inputs, double gamma,
                  ParamSet<typename Model::Scalar>* grads = nullptr, double grad_scale = 1.0) {
  using T = typename Model::Scalar;
  using D2 = Dual<T>;
  if (inputs.empty()) throw std::invalid_argument("r1_penalty: empty batch");
  const double n = static_cast<double>(inputs.size());
  double sum = 0.0;
  std::optional<decltype(D.template cast<D2>())> dual_model;
  std::optional<ParamSet<D2>> dual_grads;
  if (grads != nullptr && gamma != 0.0) {
    dual_model.emplace(D.template cast<D2>());
    dual_grads.emplace(dual_model->params().zeros_like());
  }
  for (const auto& in : inputs) {
    typename Model::template Tape<T> tape;
    D.forward(in.image, in.heatmaps, in.pose, &tape);
    const FeatureMap<T> g = D.backward(tape, in.pose, T(1), nullptr, true);
    sum += value_of(g.data.squaredNorm());
    if (!dual_model) continue;
    // Tangent along g: the dual parts of the parameter gradient are H_{theta,x} g.
    const FeatureMap<D2> x(in.image.height, in.image.width, make_dual(in.image.data, g.data));
    typename Model::template Tape<D2> dtape;
    dual_model->forward(x, in.heatmaps, in.pose, &dtape);
    dual_model->backward(dtape, in.pose, D2(T(1)), &*dual_grads, false);
  }
  if (dual_grads) {
    ParamSet<T> hv = dual_parts(*dual_grads);
    hv *= T(gamma / n * grad_scale);
    *grads += hv;
  }
  return 0.5 * gamma * sum / n;
}

// ---------------------------------------------------------------------------
// Path length

/// sqrt(mean over scales of |J_{w_s}^T y|^2).
template <class S>
double path_length_of(std::span<const Vec<S>> grads_per_scale) {
  double sq = 0.0;
  for (const auto& g : grads_per_scale) sq += value_of(g.squaredNorm());
  return std::sqrt(sq / static_cast<double>(grads_per_scale.size()));
}

struct PathLengthStats {
  std::vector<double> lengths;
  double penalty = 0.0;      // mean (L_i - a)^2 with a before the update
  double mean_before = 0.0;
  double mean_after = 0.0;
};

/// Penalty against the running target a, then a <- a + decay * (mean L - a).
PathLengthStats path_length_update(std::span<const double> lengths, double& target, double decay);

/// Unit-variance image-space noise scaled by 1 / sqrt(H * W).
template <class S>
FeatureMap<S> path_length_noise(int resolution, Rng& rng) {
  FeatureMap<S> y(3, resolution, resolution);
  const double scale = 1.0 / resolution;
  for (Eigen::Index i = 0; i < y.data.size(); ++i) y.data.data()[i] = S(rng.normal() * scale);
  return y;
}

/// Path-length regularizer on G for the given (z, pose) batch. Updates the
/// running target and, when grads is non-null, adds grad_scale times the
/// gradient of the penalty.
template <class S>
PathLengthStats path_length_penalty(const Generator<S>& G, std::span<const Vec<S>> zs, std::span<const Pose> poses,
                                    std::span<const FeatureMap<S>> noise, double& target, double decay,
                                    ParamSet<S>* grads = nullptr, double grad_scale = 1.0) {
  using D2 = Dual<S>;
  const std::size_t n = zs.size();
  if (n == 0 || poses.size() != n || noise.size() != n) throw std::invalid_argument("path_length_penalty: batch mismatch");
  const int scales = G.config().num_scales();
  const double a = target;
  std::optional<Generator<D2>> dual_g;
  if (grads != nullptr) dual_g.emplace(G.template cast<D2>());
  std::vector<double> lengths;
  for (std::size_t i = 0; i < n; ++i) {
    MappingTape<S> mtape;
    const Vec<S> w = G.map(zs[i], poses[i], &mtape);
    const std::vector<Vec<S>> ws(static_cast<std::size_t>(scales), w);
    const auto pyramid = G.pyramid(poses[i]);
    SynthesisTape<S> stape;
    G.synthesize(ws, pyramid, {}, &stape);
    const auto g = G.synthesize_backward(stape, noise[i], nullptr);
    const double len = path_length_of<S>(g);
    lengths.push_back(len);
    if (!dual_g || len == 0.0) continue;
    // d/dg_s of (L - a)^2 / n, with L = sqrt(mean_s |g_s|^2).
    const double coef = 2.0 * (len - a) / (scales * len) / static_cast<double>(n) * grad_scale;
    std::vector<Vec<D2>> dws;
    for (int s = 0; s < scales; ++s) dws.push_back(make_dual(w, Vec<S>(g[static_cast<std::size_t>(s)] * S(coef))));
    SynthesisTape<D2> dtape;
    dual_g->synthesize(dws, pyramid, {}, &dtape);
    const FeatureMap<D2> dy(noise[i].height, noise[i].width, noise[i].data.template cast<D2>());
    ParamSet<D2> dgrads = dual_g->params().zeros_like();
    const auto dg_ws = dual_g->synthesize_backward(dtape, dy, &dgrads);
    *grads += dual_parts(dgrads);
    Vec<S> gw = Vec<S>::Zero(w.size());
    for (const auto& v : dg_ws) gw += dual_part(v);
    G.map_backward(poses[i], mtape, gw, grads);
  }
  return path_length_update(lengths, target, decay);
}

// ---------------------------------------------------------------------------
// Training loop

struct TrainState {
  Generator<float> G;
  Generator<float> G_ema;
  Discriminator<float> D;
  AdamState<float> g_opt;
  AdamState<float> d_opt;
  long step = 0;
  double pl_mean = 0.0;
  Rng data_rng;
  Rng train_rng;

  static TrainState initialize(const GeneratorConfig& g, const DiscriminatorConfig& d, std::uint64_t seed);
};

struct StepMetrics {
  long step = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double r1 = std::nan("");
  double pl = std::nan("");
  double ema_beta = 0.0;
  double real_logit = 0.0;
  double fake_logit = 0.0;
  double mismatch_logit = 0.0;
};

nlohmann::json to_json(const StepMetrics& m);

class Trainer {
 public:
  Trainer(GeneratorConfig gcfg, DiscriminatorConfig dcfg, TrainConfig tcfg, const Dataset& data);
  Trainer(TrainState state, GeneratorConfig gcfg, DiscriminatorConfig dcfg, TrainConfig tcfg, const Dataset& data);

  /// One discriminator update followed by one generator update and the EMA.
  /// Throws TrainingError on a non-finite loss.
  StepMetrics step();

  const TrainState& state() const { return state_; }
  TrainState& state() { return state_; }
  const GeneratorConfig& generator_config() const { return gcfg_; }
  const DiscriminatorConfig& discriminator_config() const { return dcfg_; }
  const TrainConfig& train_config() const { return tcfg_; }

 private:
  void sample_batch(std::vector<FeatureMap<float>>& images, std::vector<Pose>& poses);

  GeneratorConfig gcfg_;
  DiscriminatorConfig dcfg_;
  TrainConfig tcfg_;
  const Dataset* data_;
  TrainState state_;
};

/// Checkpoint layout: <dir>/config.json and <dir>/params.bin.
void save_checkpoint(const std::filesystem::path& dir, const Trainer& trainer);
/// Restores a full training state.
TrainState load_train_state(const std::filesystem::path& dir, GeneratorConfig* gcfg, DiscriminatorConfig* dcfg,
                            TrainConfig* tcfg);
/// The EMA generator (or the raw one) from a checkpoint.
Generator<float> load_generator(const std::filesystem::path& dir, bool ema = true);
Discriminator<float> load_discriminator(const std::filesystem::path& dir);

/// Runs tcfg.total_steps steps (resuming from the trainer's step). Writes
/// JSON-lines metrics to metrics_log and checkpoints under run_dir as
/// step-XXXXXXXX directories plus a final "latest" checkpoint.
void train(Trainer& trainer, const std::filesystem::path& run_dir, std::ostream* metrics_log,
           const std::function<void(const StepMetrics&)>& on_step = {});

}  // namespace posegan
