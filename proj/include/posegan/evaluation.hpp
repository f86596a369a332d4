// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// Placement accuracy (PCKh against the conditioning pose) and realism (FID
// between Gaussian fits of embedding features).

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "posegan/dataset.hpp"
#include "posegan/networks.hpp"

namespace posegan {

/// Nose-to-neck distance; nullopt when either is invisible.
std::optional<double> head_size(const Pose& pose);

/// Percent of reference-visible keypoints whose prediction is visible and
/// within alpha * head_size(reference). Frames without a positive head size
/// are excluded; returns 0 when nothing is evaluated.
double pckh(std::span<const Pose> predicted, std::span<const Pose> reference, double alpha = 0.5);

struct FeatureSet {
  Eigen::MatrixXd features;  // N x d
  std::string extractor;

  void validate() const;
};

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Sample mean and unbiased covariance of the rows of x; needs N >= 2.
GaussianFit fit_gaussian(const Eigen::MatrixXd& x);

/// |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)).
double frechet_distance(const GaussianFit& a, const GaussianFit& b);

double fid(const FeatureSet& real, const FeatureSet& fake);

using PoseExtractor = std::function<Pose(const FeatureMap<float>&)>;
using FeatureExtractor = std::function<Eigen::VectorXd(const FeatureMap<float>&)>;
/// Produces the image to evaluate for test pose `index`.
using ImageSource = std::function<FeatureMap<float>(const Pose&, std::size_t index)>;

struct EvalConfig {
  double alpha = 0.5;
  double psi = 0.75;
  int mean_samples = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const EvalConfig& c);
EvalConfig eval_config_from_json(const nlohmann::json& j);

struct FrameResult {
  std::size_t index = 0;
  std::optional<double> pckh;  // nullopt when skipped
  std::string skipped;         // reason, empty when evaluated
};

struct EvalReport {
  double pckh = 0.0;
  double fid = 0.0;
  std::size_t n_eval = 0;
  std::size_t n_skipped = 0;
  double alpha = 0.5;
  double psi = 0.75;
  std::vector<FrameResult> frames;
};

/// {pckh, fid, n_eval, n_skipped, alpha, psi}; frames are included when
/// with_frames is set.
nlohmann::json to_json(const EvalReport& r, bool with_frames = false);

/// Scores the images produced by `source` for every test pose. A frame whose
/// pose extraction throws, or whose reference has no head size, is skipped.
EvalReport evaluate_images(const Dataset& test, const ImageSource& source, const PoseExtractor& poses,
                           const FeatureExtractor& features, const EvalConfig& cfg);

/// One psi-truncated sample per test pose from G.
EvalReport evaluate_model(const Generator<float>& G, const Dataset& test, const PoseExtractor& poses,
                          const FeatureExtractor& features, const EvalConfig& cfg);

}  // namespace posegan
