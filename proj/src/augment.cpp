// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include "posegan/augment.hpp"

#include <cmath>
#include <stdexcept>

namespace posegan {

nlohmann::json to_json(const AugmentConfig& c) {
  return {{"brightness", c.brightness}, {"saturation", c.saturation}, {"contrast", c.contrast},
          {"flip", c.flip},             {"scale", c.scale},           {"translation", c.translation},
          {"cutout", c.cutout}};
}

AugmentConfig augment_config_from_json(const nlohmann::json& j) {
  AugmentConfig c;
  c.brightness = j.value("brightness", c.brightness);
  c.saturation = j.value("saturation", c.saturation);
  c.contrast = j.value("contrast", c.contrast);
  c.flip = j.value("flip", c.flip);
  c.scale = j.value("scale", c.scale);
  c.translation = j.value("translation", c.translation);
  c.cutout = j.value("cutout", c.cutout);
  return c;
}

AugmentParams draw_augment(const AugmentConfig& cfg, Rng& rng) {
  // All draws are taken regardless of toggles.
  AugmentParams p;
  const double brightness = rng.uniform(-0.25, 0.25) * 2.0;
  const double saturation = rng.uniform(0.0, 2.0);
  const double contrast = rng.uniform(0.5, 1.5);
  const bool flip = rng.bernoulli(0.5);
  const double scale = rng.uniform(0.8, 1.25);
  const double tx = rng.uniform(-0.125, 0.125), ty = rng.uniform(-0.125, 0.125);
  const double cx = rng.uniform(0.25, 0.75), cy = rng.uniform(0.25, 0.75);
  if (cfg.brightness) p.brightness = brightness;
  if (cfg.saturation) p.saturation = saturation;
  if (cfg.contrast) p.contrast = contrast;
  p.geometry.horizontal_flip = cfg.flip && flip;
  if (cfg.scale) p.geometry.scale = scale;
  if (cfg.translation) p.geometry.translation = {tx, ty};
  if (cfg.cutout) p.geometry.cutout = Cutout{{cx, cy}, Eigen::Vector2d::Constant(0.25)};
  return p;
}

PixelRect cutout_rect(const Cutout& c, int height, int width) {
  PixelRect r;
  r.width = static_cast<int>(std::lround(2.0 * c.half_extent.x() * width));
  r.height = static_cast<int>(std::lround(2.0 * c.half_extent.y() * height));
  r.x0 = std::clamp(static_cast<int>(std::lround(c.center.x() * width - r.width / 2.0)), 0, width - r.width);
  r.y0 = std::clamp(static_cast<int>(std::lround(c.center.y() * height - r.height / 2.0)), 0, height - r.height);
  return r;
}

Augmentation::Augmentation(const AugmentParams& params, int height, int width)
    : params_(params), height_(height), width_(width) {
  if (height != width || height <= 0) throw std::invalid_argument("augment: images must be square");
  if (params.geometry.scale <= 0.0) throw std::invalid_argument("augment: scale must be positive");
  const SpatialTransform& t = params.geometry;
  if (!t.is_identity_geometry()) {
    resampler_ = Resampler::bilinear(height, width, height, width, [&t, width](double x, double y) {
      const Eigen::Vector2d src = inverse_transform_point({x - 0.5, y - 0.5}, t, width);
      return std::pair<double, double>(src.x() + 0.5, src.y() + 0.5);
    });
  }
  if (t.cutout) cutout_ = cutout_rect(*t.cutout, height, width);
}

}  // namespace posegan
