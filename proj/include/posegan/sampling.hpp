// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// Inference helpers over a trained generator: per-pose latent means,
// truncated sampling and scene-only variants.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "posegan/conditioning.hpp"
#include "posegan/networks.hpp"

namespace posegan {

/// Noise for sample `index` of pose `pose_index`; independent of how many
/// other samples are drawn.
Eigen::VectorXd sample_noise(std::uint64_t seed, std::size_t pose_index, std::size_t index, int z_dim);

Eigen::VectorXd map_latent(const Generator<float>& G, const Eigen::VectorXd& z, const Pose& pose);

/// E_z[w | pose] over n draws.
Eigen::VectorXd generator_conditional_mean(const Generator<float>& G, const Pose& pose, int n, std::uint64_t seed);
/// E_z[w] with poses drawn from `poses`.
Eigen::VectorXd generator_unconditional_mean(const Generator<float>& G, std::span<const Pose> poses, int n,
                                             std::uint64_t seed);

/// Image for latent w; with_human = false zeroes every heatmap.
FeatureMap<float> render_latent(const Generator<float>& G, const Eigen::VectorXd& w, const Pose& pose,
                                bool with_human = true);

struct SampleConfig {
  int n = 1;
  double psi = 0.75;
  bool without_human = true;
  int mean_samples = 1000;
  std::uint64_t seed = 0;
};

struct PoseSample {
  Eigen::VectorXd w;  // after truncation
  FeatureMap<float> image;
  FeatureMap<float> scene;  // empty unless without_human
};

/// n truncated samples toward the pose's conditional mean; the scene-only
/// variant of sample i uses the same w. The mean is taken from (or stored
/// in) cache when given.
std::vector<PoseSample> sample_pose(const Generator<float>& G, const Pose& pose, std::size_t pose_index,
                                    const SampleConfig& cfg, MeanCache* cache = nullptr);

}  // namespace posegan
