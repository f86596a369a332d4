// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// Non-leaky differentiable augmentation. Color changes, then flip / scale /
// translate (bilinear, zero padded), then a half-size cutout. The geometric
// part is mirrored onto the pose.

#pragma once

#include <algorithm>
#include <optional>

#include <nlohmann/json.hpp>

#include "posegan/ops.hpp"
#include "posegan/pose.hpp"
#include "posegan/rng.hpp"

namespace posegan {

struct AugmentConfig {
  bool brightness = true;
  bool saturation = true;
  bool contrast = true;
  bool flip = true;
  bool scale = true;
  bool translation = true;
  bool cutout = true;

  static AugmentConfig none() { return {false, false, false, false, false, false, false}; }
  bool any() const { return brightness || saturation || contrast || flip || scale || translation || cutout; }
};

nlohmann::json to_json(const AugmentConfig& c);
AugmentConfig augment_config_from_json(const nlohmann::json& j);

struct AugmentParams {
  double brightness = 0.0;  // additive offset in [-1, 1] image units
  double saturation = 1.0;
  double contrast = 1.0;
  SpatialTransform geometry;
};

/// Draws one set of parameters. Brightness is U(-0.25, 0.25) of the full
/// [-1, 1] range, saturation U(0, 2), contrast U(0.5, 1.5), flip p = 0.5,
/// scale U(0.8, 1.25), translation U(-0.125, 0.125) per axis, cutout centered
/// so the half-size window lies inside the frame.
AugmentParams draw_augment(const AugmentConfig& cfg, Rng& rng);

/// Pixel rectangle [x0, x0 + w) x [y0, y0 + h) erased by a cutout.
struct PixelRect {
  int x0 = 0, y0 = 0, width = 0, height = 0;
  bool contains(int x, int y) const { return x >= x0 && x < x0 + width && y >= y0 && y < y0 + height; }
};

PixelRect cutout_rect(const Cutout& c, int height, int width);

/// The augmentation for one image size, as an affine operator on images.
class Augmentation {
 public:
  Augmentation() = default;
  Augmentation(const AugmentParams& params, int height, int width);

  const AugmentParams& params() const { return params_; }
  std::optional<PixelRect> cutout() const { return cutout_; }

  template <class S>
  FeatureMap<S> apply(const FeatureMap<S>& x) const {
    FeatureMap<S> y = x;
    if (params_.brightness != 0.0) y.data.array() += S(params_.brightness);
    if (params_.saturation != 1.0) saturate(y);
    if (params_.contrast != 1.0) contrast(y);
    if (resampler_) y = resampler_->apply(y);
    if (cutout_) erase(y);
    return y;
  }

  /// Adjoint of the linear part; maps dL/d(output) to dL/d(input).
  template <class S>
  FeatureMap<S> apply_transpose(const FeatureMap<S>& g) const {
    FeatureMap<S> x = g;
    if (cutout_) erase(x);
    if (resampler_) x = resampler_->apply_transpose(x);
    // Both color mixes are symmetric operators.
    if (params_.contrast != 1.0) contrast(x);
    if (params_.saturation != 1.0) saturate(x);
    return x;
  }

  /// Pose in the augmented frame, at the image resolution.
  Pose pose(const Pose& p) const { return transform_pose(p, params_.geometry, width_); }

 private:
  template <class S>
  void saturate(FeatureMap<S>& y) const {
    const S s(params_.saturation);
    const Vec<S> mean = y.data.rowwise().mean();
    y.data = ((y.data.colwise() - mean) * s).colwise() + mean;
  }
  template <class S>
  void contrast(FeatureMap<S>& y) const {
    const S c(params_.contrast);
    const S mean = y.data.mean();
    y.data = ((y.data.array() - mean) * c + mean).matrix();
  }
  template <class S>
  void erase(FeatureMap<S>& y) const {
    for (int r = cutout_->y0; r < cutout_->y0 + cutout_->height; ++r) {
      y.data.middleRows(static_cast<Eigen::Index>(r) * width_ + cutout_->x0, cutout_->width).setZero();
    }
  }

  AugmentParams params_;
  int height_ = 0, width_ = 0;
  std::optional<Resampler> resampler_;
  std::optional<PixelRect> cutout_;
};

}  // namespace posegan
