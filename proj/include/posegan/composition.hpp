// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// Scene-only and subject-only rendering, latent optimization that places
// the person of one sample into the scene of another, and pose animation.

#pragma once

#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "posegan/features.hpp"
#include "posegan/networks.hpp"

namespace posegan {

/// One w per synthesis scale.
struct PerScaleLatent {
  std::vector<Eigen::VectorXd> ws;

  static PerScaleLatent broadcast(const Eigen::VectorXd& w, int num_scales);
  /// Throws std::invalid_argument unless there is one w_dim entry per scale.
  void validate(const GeneratorConfig& cfg) const;
};

nlohmann::json to_json(const PerScaleLatent& l);
PerScaleLatent per_scale_latent_from_json(const nlohmann::json& j);

FeatureMap<float> render(const Generator<float>& G, const PerScaleLatent& w, const Pose& pose);
/// All heatmaps zeroed.
FeatureMap<float> render_scene_only(const Generator<float>& G, const PerScaleLatent& w);
/// Learned constant input replaced by zeros; heatmaps as usual. With an
/// all-invisible pose the output is close to degenerate.
FeatureMap<float> render_subject_only(const Generator<float>& G, const PerScaleLatent& w, const Pose& pose);

/// Continuous image rectangle; pixel i covers [i, i + 1).
struct CropRect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

/// Bounding box of the visible keypoints grown by margin * image size on
/// each side and clamped to the image. Throws std::invalid_argument when no
/// keypoint is visible.
CropRect person_crop(const Pose& pose, int image_size, double margin = 0.1);

/// Bilinear resampling of rect to a size x size patch.
Resampler crop_resampler(const CropRect& rect, int image_size, int size);

struct ComposeConfig {
  int steps = 1000;
  double learning_rate = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double margin = 0.1;
  int crop_size = 64;

  void validate() const;
};

nlohmann::json to_json(const ComposeConfig& c);
ComposeConfig compose_config_from_json(const nlohmann::json& j);

struct ComposeResult {
  PerScaleLatent latent;
  FeatureMap<float> image;      // render(latent, pose)
  std::vector<double> losses;   // losses[t] before update t; back() after the last update
};

/// Perceptual person term on the subject-only crops plus scene term on the
/// scene-only renders, as a function of the optimized latent.
class CompositionObjective {
 public:
  CompositionObjective(const Generator<float>& G, const ConvEmbedder<float>& embed, const PerScaleLatent& person,
                       const PerScaleLatent& scene, const Pose& pose, const ComposeConfig& cfg);

  /// Total loss; writes d loss / d ws when grad is non-null.
  double evaluate(const PerScaleLatent& w, std::vector<Eigen::VectorXd>* grad = nullptr) const;

 private:
  double term(const PerScaleLatent& w, bool subject, std::vector<Eigen::VectorXd>* grad) const;

  const Generator<float>* G_;
  const ConvEmbedder<float>* embed_;
  Pose pose_;
  std::vector<HeatmapStack> pyramid_, zero_;
  Resampler crop_;
  ConvEmbedder<float>::Target person_target_, scene_target_;
};

/// Adam over the per-scale latent, initialized from the scene latent.
/// Throws std::runtime_error naming the step when the loss is non-finite.
ComposeResult compose(const Generator<float>& G, const ConvEmbedder<float>& embed, const PerScaleLatent& person,
                      const PerScaleLatent& scene, const Pose& pose, const ComposeConfig& cfg = {},
                      const std::function<void(int step, double loss)>& progress = {});

/// Frames for a pose sequence with w fixed: frame t = generate(w, poses[t]).
std::vector<FeatureMap<float>> animate_latent(const Generator<float>& G, const Eigen::VectorXd& w,
                                              const std::vector<Pose>& poses);
/// w is mapped once from z and the first pose.
std::vector<FeatureMap<float>> animate(const Generator<float>& G, const Eigen::VectorXd& z,
                                       const std::vector<Pose>& poses);

}  // namespace posegan
