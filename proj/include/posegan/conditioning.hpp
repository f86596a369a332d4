// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// Pose-latent conditioning: the learned pose projection, the mapping MLP that
// turns (pose embedding, noise) into a scene latent w, and truncation toward
// per-pose latent means.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "posegan/layers.hpp"
#include "posegan/pose.hpp"

namespace posegan {

/// Which pose pathways a model uses.
enum class PoseConditioning { kLatentOnly, kHeatmapOnly, kDual };

inline bool uses_heatmaps(PoseConditioning c) { return c != PoseConditioning::kLatentOnly; }
inline bool uses_pose_latent(PoseConditioning c) { return c != PoseConditioning::kHeatmapOnly; }

std::string to_string(PoseConditioning c);
PoseConditioning conditioning_from_string(const std::string& s);

struct MappingConfig {
  int z_dim = 512;       // 0 when there is no noise input (discriminator side)
  int embed_dim = 512;   // width of the pose projection; 0 disables pose input
  int hidden_dim = 512;
  int out_dim = 512;
  int num_layers = 8;
  double lr_multiplier = 0.01;
};

template <class S>
struct MappingTape {
  Vec<S> z;
  Vec<S> embed;  // raw pose projection
  std::vector<Vec<S>> inputs;  // input of each fc layer (inputs[0] is the normalized concat)
  std::vector<Vec<S>> pre;     // pre-activation of each fc layer
};

/// Mapping network f: concat(norm(P * flatten(pose)), norm(z)) -> MLP -> w.
/// P has no bias, so the embedding is linear in the flattened pose.
/// Parameters live in a caller-owned ParamSet under `prefix`.
class MappingNetwork {
 public:
  MappingNetwork() = default;

  template <class S>
  MappingNetwork(const MappingConfig& cfg, ParamSet<S>& params, const std::string& prefix) : cfg_(cfg) {
    if (cfg.embed_dim > 0) {
      embed_ = DenseLayer::add(params, prefix + ".embed", kPoseFeatureDim, cfg.embed_dim, false);
    }
    int in = cfg.embed_dim + cfg.z_dim;
    for (int i = 0; i < cfg.num_layers; ++i) {
      const int out = i + 1 == cfg.num_layers ? cfg.out_dim : cfg.hidden_dim;
      layers_.push_back(DenseLayer::add(params, prefix + ".fc" + std::to_string(i), in, out, true, cfg.lr_multiplier));
      in = out;
    }
  }

  const MappingConfig& config() const { return cfg_; }
  int output_dim() const { return cfg_.num_layers > 0 ? cfg_.out_dim : cfg_.embed_dim + cfg_.z_dim; }

  template <class S>
  void init(ParamSet<S>& p, Rng& rng) const {
    if (cfg_.embed_dim > 0) embed_.init(p, rng);
    for (const auto& l : layers_) l.init(p, rng);
  }

  /// Linear projection of the flattened pose (embed_dim values).
  template <class S>
  Vec<S> embed_pose(const ParamSet<S>& p, const Pose& pose) const {
    if (cfg_.embed_dim == 0) return {};
    return embed_.forward(p, Vec<S>(flatten_pose(pose).cast<S>()));
  }

  template <class S>
  Vec<S> forward(const ParamSet<S>& p, const Vec<S>& z, const Pose& pose, MappingTape<S>* tape = nullptr) const {
    if (z.size() != cfg_.z_dim) throw std::invalid_argument("mapping: noise dimension mismatch");
    const Vec<S> e = embed_pose(p, pose);
    Vec<S> x(cfg_.embed_dim + cfg_.z_dim);
    if (cfg_.embed_dim > 0) x.head(cfg_.embed_dim) = normalize_2nd_moment(e);
    if (cfg_.z_dim > 0) x.tail(cfg_.z_dim) = normalize_2nd_moment(z);
    if (tape != nullptr) {
      tape->z = z;
      tape->embed = e;
      tape->inputs.clear();
      tape->pre.clear();
    }
    for (const auto& l : layers_) {
      if (tape != nullptr) tape->inputs.push_back(x);
      Vec<S> pre = l.forward(p, x);
      x = lrelu(pre);
      if (tape != nullptr) tape->pre.push_back(std::move(pre));
    }
    return x;
  }

  /// Backpropagates dL/dw into the mapping parameters.
  template <class S>
  void backward(const ParamSet<S>& p, const Pose& pose, const MappingTape<S>& tape, const Vec<S>& grad_w,
                ParamSet<S>* grads) const {
    Vec<S> g = grad_w;
    for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i) {
      g = lrelu_backward(g, tape.pre[static_cast<std::size_t>(i)]);
      g = layers_[static_cast<std::size_t>(i)].backward(p, tape.inputs[static_cast<std::size_t>(i)], g, grads);
    }
    if (cfg_.embed_dim > 0 && grads != nullptr) {
      const Vec<S> ge = normalize_2nd_moment_backward(Vec<S>(g.head(cfg_.embed_dim)), tape.embed);
      embed_.backward(p, Vec<S>(flatten_pose(pose).cast<S>()), ge, grads);
    }
  }

 private:
  MappingConfig cfg_;
  DenseLayer embed_;
  std::vector<DenseLayer> layers_;
};

/// w' = mean + psi * (w - mean). Works with conditional or unconditional means.
template <class Derived, class DerivedMean>
auto truncate(const Eigen::MatrixBase<Derived>& w, const Eigen::MatrixBase<DerivedMean>& mean, double psi) {
  using S = typename Derived::Scalar;
  if (w.size() != mean.size()) throw std::invalid_argument("truncate: dimension mismatch");
  return (mean + S(psi) * (w - mean)).eval();
}

/// Maps a noise vector to a latent for a fixed pose.
using LatentSampler = std::function<Eigen::VectorXd(const Eigen::VectorXd& z)>;

/// Monte-Carlo estimate of E_z[w | p] over n standard-normal draws.
Eigen::VectorXd conditional_mean(const LatentSampler& map_z, int z_dim, int n, std::uint64_t seed);

/// Unconditional mean E_z[w] over poses drawn uniformly from `poses`, each
/// paired with a fresh z.
Eigen::VectorXd unconditional_mean(const std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Pose&)>& map,
                                   std::span<const Pose> poses, int z_dim, int n, std::uint64_t seed);

/// Stable key for a pose: coordinates quantized to 1/8 pixel, visibility and
/// reference resolution, hashed with FNV-1a.
std::uint64_t pose_hash(const Pose& pose);

/// Per-pose cache of conditional means. Single writer, many readers.
class MeanCache {
 public:
  MeanCache() = default;
  MeanCache(MeanCache&& other) noexcept : entries_(std::move(other.entries_)) {}
  MeanCache& operator=(MeanCache&& other) noexcept {
    if (this != &other) {
      std::unique_lock lock(mutex_);
      entries_ = std::move(other.entries_);
    }
    return *this;
  }

  std::optional<Eigen::VectorXd> find(std::uint64_t key) const;
  void insert(std::uint64_t key, Eigen::VectorXd mean);
  /// Returns the cached mean or computes and stores it.
  Eigen::VectorXd get_or_compute(const Pose& pose, const std::function<Eigen::VectorXd()>& compute);
  std::size_t size() const;

  /// {"version": 1, "entries": {"<hex hash>": [w...]}}
  nlohmann::json to_json() const;
  static MeanCache from_json(const nlohmann::json& j);

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::uint64_t, Eigen::VectorXd> entries_;
};

}  // namespace posegan
