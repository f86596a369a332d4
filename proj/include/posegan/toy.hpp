// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// Procedural stick-figure data for desk-scale experiments. Each image shows
// one figure whose keypoints are drawn as small discs in a per-keypoint
// color, over a background whose layout depends on the figure's activity
// and placement. The matching oracle extractor recovers keypoints by color.

#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "posegan/dataset.hpp"
#include "posegan/rng.hpp"
#include "posegan/training.hpp"

namespace posegan {

enum class ToyActivity { kStanding, kArmsRaised, kWalking, kSitting, kLying, kSquatting };
inline constexpr int kNumToyActivities = 6;

struct ToyPose {
  Pose pose;
  ToyActivity activity = ToyActivity::kStanding;
};

/// RGB color of keypoint k's marker, in [-1, 1].
Eigen::Vector3d toy_keypoint_color(int k);

/// Random figure at the given resolution; all keypoints visible and at least
/// one pixel inside the frame.
ToyPose sample_toy_pose(Rng& rng, int resolution);

/// Background for the activity plus figure and markers; pixel noise from rng.
FeatureMap<float> render_toy(const ToyPose& p, Rng& rng);

InMemoryDataset make_toy_dataset(int count, int resolution, std::uint64_t seed);

/// Small model for toy experiments: 16 channels at 32 px, 64-dim latents and a
/// two-layer mapping trained at the full learning rate.
GeneratorConfig toy_generator_config(PoseConditioning c = PoseConditioning::kDual, int resolution = 32);

/// Training settings for toy runs: batch 8, lr 0.01, short EMA warmup and no
/// augmentation.
TrainConfig toy_train_config(std::uint64_t seed = 0);

/// Color-template keypoint extractor for toy images. A keypoint is visible
/// when some pixel is within the color tolerance of its marker color; its
/// location is the match-weighted centroid around the best pixel.
class ToyPoseExtractor {
 public:
  explicit ToyPoseExtractor(double tolerance = 0.5, double min_match = 0.25)
      : tolerance_(tolerance), min_match_(min_match) {}

  Pose operator()(const FeatureMap<float>& image) const;

 private:
  double tolerance_;
  double min_match_;
};

}  // namespace posegan
