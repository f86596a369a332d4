// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// Pose-conditioned generator and discriminator.
//
// Generator: skip architecture with weight-demodulated convolutions. One w
// per scale (the same w for every scale unless a per-scale list is given),
// keypoint heatmaps concatenated onto the activations at every scale, no
// spatial noise inputs.
//
// Discriminator: residual architecture over concat(image, heatmaps), with a
// projection head: logit = out(phi) + <f_D(pose), phi> / sqrt(dim(phi)).
// There is no minibatch-stddev layer, so every logit depends on its own
// sample only.

#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "posegan/conditioning.hpp"
#include "posegan/layers.hpp"
#include "posegan/pose.hpp"

namespace posegan {

enum class HeatmapPlacement {
  kBlockInput,  // once per resolution, before the block's first convolution
  kEveryConv,   // before every convolution of the block
};

struct GeneratorConfig {
  int resolution = 64;
  int channel_base = 16384;
  int channel_max = 512;
  int channel_multiplier = 1;
  int z_dim = 512;
  int w_dim = 512;
  int embed_dim = 512;
  int mapping_layers = 8;
  double mapping_lr_multiplier = 0.01;
  PoseConditioning conditioning = PoseConditioning::kDual;
  HeatmapPlacement heatmap_placement = HeatmapPlacement::kBlockInput;
  bool use_spatial_noise = false;

  int channels_at(int res) const;
  /// Synthesis resolutions 4, 8, ..., resolution.
  std::vector<int> scales() const;
  int num_scales() const { return static_cast<int>(scales().size()); }
  MappingConfig mapping() const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct DiscriminatorConfig {
  int resolution = 64;
  int channel_base = 16384;
  int channel_max = 512;
  int channel_multiplier = 1;
  int embed_dim = 512;
  int mapping_layers = 8;
  int mapping_hidden = 512;
  double mapping_lr_multiplier = 0.01;
  PoseConditioning conditioning = PoseConditioning::kDual;

  int channels_at(int res) const;
  int input_channels() const { return 3 + (uses_heatmaps(conditioning) ? kNumKeypoints : 0); }
  int projection_dim() const { return channels_at(4); }
  MappingConfig mapping() const;
  void validate() const;

  /// Mirrors the generator's resolution, channel schedule and conditioning.
  static DiscriminatorConfig matching(const GeneratorConfig& g);
};

nlohmann::json to_json(const GeneratorConfig& c);
nlohmann::json to_json(const DiscriminatorConfig& c);
GeneratorConfig generator_config_from_json(const nlohmann::json& j);
DiscriminatorConfig discriminator_config_from_json(const nlohmann::json& j);

struct SynthesisOptions {
  bool zero_const = false;  // replace the learned constant input by zeros
};

template <class S>
struct SynthesisTape {
  std::vector<Vec<S>> ws;
  std::vector<ModConvTape<S>> conv0, conv1, torgb;
  SynthesisOptions options;
};

template <class S>
class Generator {
 public:
  Generator() = default;
  explicit Generator(GeneratorConfig cfg);

  /// Fresh parameters drawn from rng (unit-variance weights, unit style bias).
  static Generator initialized(const GeneratorConfig& cfg, Rng& rng);

  const GeneratorConfig& config() const { return cfg_; }
  ParamSet<S>& params() { return params_; }
  const ParamSet<S>& params() const { return params_; }
  const MappingNetwork& mapping() const { return mapping_; }

  template <class T>
  Generator<T> cast() const {
    Generator<T> g(cfg_);
    g.params() = params_.template cast<T>();
    return g;
  }

  /// w = f_G(embed(pose), z).
  Vec<S> map(const Vec<S>& z, const Pose& pose, MappingTape<S>* tape = nullptr) const {
    return mapping_.forward(params_, z, pose, tape);
  }
  void map_backward(const Pose& pose, const MappingTape<S>& tape, const Vec<S>& grad_w, ParamSet<S>* grads) const {
    mapping_.backward(params_, pose, tape, grad_w, grads);
  }

  /// Heatmap pyramid at the synthesis scales (empty for latent-only models).
  std::vector<HeatmapStack> pyramid(const Pose& pose) const;
  std::vector<HeatmapStack> zero_pyramid() const;

  /// Image (3 x R x R) from one w per synthesis scale.
  FeatureMap<S> synthesize(std::span<const Vec<S>> ws, std::span<const HeatmapStack> pyramid,
                           const SynthesisOptions& options = {}, SynthesisTape<S>* tape = nullptr) const;
  /// Accumulates parameter gradients and returns dL/dw for every scale.
  std::vector<Vec<S>> synthesize_backward(const SynthesisTape<S>& tape, const FeatureMap<S>& grad_image,
                                          ParamSet<S>* grads) const;

  /// Single-w convenience: the same latent at every scale.
  FeatureMap<S> generate(const Vec<S>& w, std::span<const HeatmapStack> pyramid,
                         const SynthesisOptions& options = {}) const {
    const std::vector<Vec<S>> ws(static_cast<std::size_t>(cfg_.num_scales()), w);
    return synthesize(ws, pyramid, options);
  }

  std::size_t parameter_count() const { return params_.total_size(); }

 private:
  GeneratorConfig cfg_;
  ParamSet<S> params_;
  MappingNetwork mapping_;
  int const_ = -1;
  std::vector<ModConvLayer> conv0_, conv1_, torgb_;
};

template <class S>
struct DiscriminatorTape {
  FeatureMap<S> input;
  std::vector<FeatureMap<S>> block_in, conv0_pre, conv1_in, conv1_pre, skip_in;
  Mat<S> fromrgb_pre;
  FeatureMap<S> epi_in;
  Mat<S> epi_pre;
  Vec<S> flat, fc_pre, phi, cmap;
  MappingTape<S> mapping;
};

template <class S>
class Discriminator {
 public:
  using Scalar = S;
  template <class U>
  using Tape = DiscriminatorTape<U>;

  Discriminator() = default;
  explicit Discriminator(DiscriminatorConfig cfg);
  static Discriminator initialized(const DiscriminatorConfig& cfg, Rng& rng);

  const DiscriminatorConfig& config() const { return cfg_; }
  ParamSet<S>& params() { return params_; }
  const ParamSet<S>& params() const { return params_; }
  const MappingNetwork& mapping() const { return mapping_; }

  template <class T>
  Discriminator<T> cast() const {
    Discriminator<T> d(cfg_);
    d.params() = params_.template cast<T>();
    return d;
  }

  /// Scalar logit for one (image, heatmaps, pose) triple. Heatmaps must be at
  /// the image resolution (ignored for latent-only models).
  S forward(const FeatureMap<S>& image, const HeatmapStack& heatmaps, const Pose& pose,
            DiscriminatorTape<S>* tape = nullptr) const;
  /// Accumulates parameter gradients scaled by grad_logit; returns dL/dimage.
  FeatureMap<S> backward(const DiscriminatorTape<S>& tape, const Pose& pose, const S& grad_logit,
                         ParamSet<S>* grads, bool need_input_grad = true) const;

  /// One logit per item.
  std::vector<S> forward_batch(std::span<const FeatureMap<S>> images, std::span<const HeatmapStack> heatmaps,
                               std::span<const Pose> poses) const;

  std::size_t parameter_count() const { return params_.total_size(); }

 private:
  DiscriminatorConfig cfg_;
  ParamSet<S> params_;
  MappingNetwork mapping_;
  ConvLayer fromrgb_;
  std::vector<ConvLayer> conv0_, conv1_, skip_;
  ConvLayer epi_conv_;
  DenseLayer epi_fc_, out_;
};

/// Number of parameters in convolution weights (generator or discriminator).
template <class S>
std::size_t conv_weight_count(const ParamSet<S>& p) {
  std::size_t n = 0;
  for (int i = 0; i < p.size(); ++i) {
    if (p.shape(i).size() == 4) n += static_cast<std::size_t>(p[i].size());
  }
  return n;
}

/// Image encoding for PNG export: round(127.5 * (x + 1)) clamped to [0, 255].
std::uint8_t to_byte(double x);

extern template class Generator<float>;
extern template class Generator<double>;
extern template class Generator<Dual<float>>;
extern template class Generator<Dual<double>>;
extern template class Discriminator<float>;
extern template class Discriminator<double>;
extern template class Discriminator<Dual<float>>;
extern template class Discriminator<Dual<double>>;

}  // namespace posegan
