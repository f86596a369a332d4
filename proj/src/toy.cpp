// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include "posegan/toy.hpp"

#include <algorithm>
#include <cmath>

namespace posegan {

namespace {

using Skeleton = std::array<Eigen::Vector2d, kNumKeypoints>;

// Every marker color has at least two saturated channels, so it stays far
// from the muted backgrounds and from the limb gray.
const std::array<Eigen::Vector3d, kNumKeypoints> kPalette = {{
    {1, 1, -1},  {-1, -1, 1}, {1, 0, 1},  {0, 1, -1},  {-1, 0, -1}, {0, -1, 1},
    {1, -1, 0},  {-1, 1, 0},  {1, 0, -1}, {-1, 0, 1},  {0, 1, 1},   {1, 1, 0},
    {-1, -1, 0}, {0, -1, -1}, {1, -1, 1}, {-1, 1, -1}, {-1, 1, 1},  {1, -1, -1},
}};

const Eigen::Vector3d kLimbColor(0.55, 0.55, 0.55);
constexpr double kDotRadius = 1.1;

Skeleton standing() {
  return {{{0, 0.12},      {0, 0.27},     {-0.13, 0.28}, {-0.17, 0.44}, {-0.18, 0.58}, {0.13, 0.28},
           {0.17, 0.44},   {0.18, 0.58},  {-0.08, 0.58}, {-0.09, 0.78}, {-0.10, 0.98}, {0.08, 0.58},
           {0.09, 0.78},   {0.10, 0.98},  {-0.06, 0.05}, {0.06, 0.05},  {-0.13, 0.09}, {0.13, 0.09}}};
}

Skeleton skeleton_for(ToyActivity a) {
  Skeleton s = standing();
  switch (a) {
    case ToyActivity::kStanding: break;
    case ToyActivity::kArmsRaised:
      s[kRElbow] = {-0.22, 0.14};
      s[kRWrist] = {-0.24, -0.02};
      s[kLElbow] = {0.22, 0.14};
      s[kLWrist] = {0.24, -0.02};
      break;
    case ToyActivity::kWalking:
      s[kRElbow] = {-0.2, 0.42};
      s[kRWrist] = {-0.26, 0.54};
      s[kLElbow] = {0.16, 0.43};
      s[kLWrist] = {0.21, 0.57};
      s[kRKnee] = {-0.15, 0.77};
      s[kRAnkle] = {-0.22, 0.96};
      s[kLKnee] = {0.13, 0.78};
      s[kLAnkle] = {0.2, 0.97};
      break;
    case ToyActivity::kSitting:
      s[kRHip] = {-0.04, 0.58};
      s[kLHip] = {0.04, 0.58};
      s[kRKnee] = {0.2, 0.6};
      s[kLKnee] = {0.27, 0.61};
      s[kRAnkle] = {0.2, 0.86};
      s[kLAnkle] = {0.27, 0.87};
      s[kRElbow] = {-0.12, 0.44};
      s[kRWrist] = {0.02, 0.48};
      s[kLElbow] = {0.2, 0.42};
      s[kLWrist] = {0.14, 0.5};
      break;
    case ToyActivity::kLying:
      // Standing figure rotated so the head points left.
      for (auto& p : s) p = Eigen::Vector2d(p.y(), -p.x());
      break;
    case ToyActivity::kSquatting:
      for (auto& p : s) p.y() += 0.12;
      s[kRHip] = {-0.09, 0.66};
      s[kLHip] = {0.09, 0.66};
      s[kRKnee] = {-0.22, 0.6};
      s[kLKnee] = {0.22, 0.6};
      s[kRAnkle] = {-0.13, 0.84};
      s[kLAnkle] = {0.13, 0.84};
      s[kRElbow] = {-0.13, 0.5};
      s[kRWrist] = {-0.07, 0.45};
      s[kLElbow] = {0.13, 0.5};
      s[kLWrist] = {0.07, 0.45};
      break;
  }
  return s;
}

struct Background {
  Eigen::Vector3d upper, lower;
};

Background palette_for(ToyActivity a) {
  switch (a) {
    case ToyActivity::kStanding: return {{-0.15, 0.0, 0.3}, {-0.2, 0.2, -0.25}};
    case ToyActivity::kArmsRaised: return {{0.0, 0.2, 0.3}, {0.3, 0.2, -0.1}};
    case ToyActivity::kWalking: return {{-0.05, -0.05, 0.0}, {-0.3, -0.3, -0.3}};
    case ToyActivity::kSitting: return {{0.25, 0.1, -0.05}, {0.1, -0.1, -0.2}};
    case ToyActivity::kLying: return {{0.05, 0.05, 0.25}, {0.3, 0.3, 0.2}};
    case ToyActivity::kSquatting: return {{-0.3, -0.15, 0.1}, {0.25, 0.05, -0.2}};
  }
  return {};
}

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

void blend(FeatureMap<float>& img, int pixel, const Eigen::Vector3d& color, double w) {
  for (int c = 0; c < 3; ++c) {
    img.data(pixel, c) = static_cast<float>((1 - w) * img.data(pixel, c) + w * color[c]);
  }
}

}  // namespace

Eigen::Vector3d toy_keypoint_color(int k) { return kPalette.at(static_cast<std::size_t>(k)); }

ToyPose sample_toy_pose(Rng& rng, int resolution) {
  ToyPose out;
  out.activity = static_cast<ToyActivity>(rng.uniform_int(0, kNumToyActivities - 1));
  Skeleton s = skeleton_for(out.activity);
  for (auto& p : s) p += Eigen::Vector2d(rng.normal(), rng.normal()) * 0.015;
  if (rng.bernoulli(0.5)) {
    Skeleton m = s;
    for (int k = 0; k < kNumKeypoints; ++k) {
      m[static_cast<std::size_t>(flip_partner(k))] = Eigen::Vector2d(-s[static_cast<std::size_t>(k)].x(),
                                                                     s[static_cast<std::size_t>(k)].y());
    }
    s = m;
  }
  Eigen::Vector2d lo = s[0], hi = s[0];
  for (const auto& p : s) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double usable = resolution - 3.0;
  const double extent = (hi - lo).maxCoeff();
  const double scale = rng.uniform(0.6, 0.85) * usable / extent;
  const Eigen::Vector2d size = (hi - lo) * scale;
  const Eigen::Vector2d origin(1.0 + rng.uniform(0.0, usable - size.x()), 1.0 + rng.uniform(0.0, usable - size.y()));
  out.pose = Pose::invisible(resolution);
  for (int k = 0; k < kNumKeypoints; ++k) {
    const Eigen::Vector2d p = origin + (s[static_cast<std::size_t>(k)] - lo) * scale;
    out.pose.set(k, p.x(), p.y(), true);
  }
  return out;
}

FeatureMap<float> render_toy(const ToyPose& tp, Rng& rng) {
  const Pose& pose = tp.pose;
  const int r = pose.reference_resolution;
  FeatureMap<float> img(3, r, r);
  const Background bg = palette_for(tp.activity);

  double feet = 0.0, top = r, left = r, right = 0.0;
  for (int k = 0; k < kNumKeypoints; ++k) {
    feet = std::max(feet, pose.point(k).y());
    top = std::min(top, pose.point(k).y());
    left = std::min(left, pose.point(k).x());
    right = std::max(right, pose.point(k).x());
  }
  const Eigen::Vector2d hip = (pose.point(kRHip) + pose.point(kLHip)) / 2;
  for (int y = 0; y < r; ++y) {
    for (int x = 0; x < r; ++x) {
      Eigen::Vector3d c = y > feet + 0.5 ? bg.lower : bg.upper;
      switch (tp.activity) {
        case ToyActivity::kSitting: {
          // Chair under and behind the hips.
          const double x0 = std::min(hip.x(), pose.point(kRKnee).x()) - 2, x1 = std::max(hip.x(), pose.point(kRKnee).x()) + 1;
          if (y >= hip.y() - 1 && y <= feet && x >= x0 && x <= x1) c = {-0.05, -0.25, -0.3};
          break;
        }
        case ToyActivity::kLying:
          // Bed from the body's midline down.
          c = (y >= (top + feet) / 2 && x >= left - 2 && x <= right + 2) ? bg.lower : bg.upper;
          break;
        default: break;
      }
      for (int ch = 0; ch < 3; ++ch) img.data(y * r + x, ch) = static_cast<float>(c[ch] + 0.03 * rng.normal());
    }
  }

  for (int y = 0; y < r; ++y) {
    for (int x = 0; x < r; ++x) {
      const Eigen::Vector2d p(x, y);
      double cover = 0.0;
      for (const auto& [a, b] : kLimbs) {
        const double d = segment_distance(p, pose.point(a), pose.point(b));
        cover = std::max(cover, std::clamp((0.8 - d) / 0.5, 0.0, 1.0));
      }
      if (cover > 0) blend(img, y * r + x, kLimbColor, cover);
    }
  }

  for (int k = 0; k < kNumKeypoints; ++k) {
    const Eigen::Vector2d q = pose.point(k);
    const int x0 = std::max(0, static_cast<int>(std::floor(q.x() - kDotRadius))), x1 = std::min(r - 1, static_cast<int>(std::ceil(q.x() + kDotRadius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(q.y() - kDotRadius))), y1 = std::min(r - 1, static_cast<int>(std::ceil(q.y() + kDotRadius)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double w = std::clamp((kDotRadius - (Eigen::Vector2d(x, y) - q).norm()) / 0.35, 0.0, 1.0);
        if (w > 0) blend(img, y * r + x, kPalette[static_cast<std::size_t>(k)], w);
      }
    }
  }
  return img;
}

InMemoryDataset make_toy_dataset(int count, int resolution, std::uint64_t seed) {
  Rng rng = Rng::substream(seed, "toy");
  InMemoryDataset data;
  for (int i = 0; i < count; ++i) {
    const ToyPose p = sample_toy_pose(rng, resolution);
    data.add({render_toy(p, rng), p.pose});
  }
  return data;
}

GeneratorConfig toy_generator_config(PoseConditioning c, int resolution) {
  GeneratorConfig g;
  g.resolution = resolution;
  g.channel_base = 512;
  g.channel_max = 32;
  g.z_dim = 64;
  g.w_dim = 64;
  g.embed_dim = 64;
  g.mapping_layers = 2;
  g.mapping_lr_multiplier = 1.0;
  g.conditioning = c;
  return g;
}

TrainConfig toy_train_config(std::uint64_t seed) {
  TrainConfig t;
  t.learning_rate = 0.01;
  t.batch_size = 8;
  t.ema_beta = 0.99;
  t.ema_warmup_steps = 500;
  t.augment = AugmentConfig::none();
  t.seed = seed;
  return t;
}

Pose ToyPoseExtractor::operator()(const FeatureMap<float>& image) const {
  const int h = image.height, w = image.width;
  Pose out = Pose::invisible(w);
  Eigen::VectorXd match(image.pixels());
  for (int k = 0; k < kNumKeypoints; ++k) {
    const Eigen::RowVector3d c = kPalette[static_cast<std::size_t>(k)].transpose();
    for (Eigen::Index p = 0; p < image.pixels(); ++p) {
      match[p] = 1.0 - (image.data.row(p).cast<double>() - c).squaredNorm() / tolerance_;
    }
    Eigen::Index best = 0;
    if (match.maxCoeff(&best) < min_match_) continue;
    const int bx = static_cast<int>(best % w), by = static_cast<int>(best / w);
    double sw = 0, sx = 0, sy = 0;
    for (int y = std::max(0, by - 1); y <= std::min(h - 1, by + 1); ++y) {
      for (int x = std::max(0, bx - 1); x <= std::min(w - 1, bx + 1); ++x) {
        const double m = std::max(0.0, match[y * w + x]);
        sw += m;
        sx += m * x;
        sy += m * y;
      }
    }
    out.set(k, sx / sw, sy / sw, true);
  }
  return out;
}

}  // namespace posegan
