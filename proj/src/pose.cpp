// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include "posegan/pose.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace posegan {

namespace {

constexpr std::array<std::string_view, kNumKeypoints> kNames = {
    "nose",      "neck",   "r_shoulder", "r_elbow", "r_wrist", "l_shoulder", "l_elbow", "l_wrist", "r_hip",
    "r_knee",    "r_ankle", "l_hip",     "l_knee",  "l_ankle", "r_eye",      "l_eye",   "r_ear",   "l_ear",
};

constexpr std::array<int, kNumKeypoints> kFlipPartner = {
    kNose, kNeck, kLShoulder, kLElbow, kLWrist, kRShoulder, kRElbow, kRWrist, kLHip,
    kLKnee, kLAnkle, kRHip, kRKnee, kRAnkle, kLEye, kREye, kLEar, kREar,
};

}  // namespace

std::string_view keypoint_name(int k) { return kNames.at(static_cast<std::size_t>(k)); }
int flip_partner(int k) { return kFlipPartner.at(static_cast<std::size_t>(k)); }
bool is_face_keypoint(int k) { return k >= kREye && k <= kLEar; }

Pose Pose::invisible(int reference_resolution) {
  Pose p;
  p.reference_resolution = reference_resolution;
  return p;
}

int Pose::visible_count() const {
  int n = 0;
  for (bool v : visibility) n += v ? 1 : 0;
  return n;
}

void Pose::validate() const {
  if (reference_resolution <= 0) throw std::invalid_argument("pose: reference resolution must be positive");
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!visible(k)) continue;
    const double x = keypoints(0, k), y = keypoints(1, k);
    if (!(x >= 0.0 && x < reference_resolution && y >= 0.0 && y < reference_resolution)) {
      throw std::invalid_argument("pose: visible keypoint " + std::string(keypoint_name(k)) + " outside frame");
    }
  }
}

bool operator==(const Pose& a, const Pose& b) {
  if (a.reference_resolution != b.reference_resolution || a.visibility != b.visibility) return false;
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (a.visible(k) && a.keypoints.col(k) != b.keypoints.col(k)) return false;
  }
  return true;
}

HeatmapStack HeatmapStack::zeros(int resolution) {
  return {resolution, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(resolution) * resolution, kNumKeypoints)};
}

double heatmap_sigma2(int resolution) {
  const double r = resolution;
  return std::max(0.5, 0.005 * r * r);
}

HeatmapStack render_heatmaps(const Pose& pose, int resolution) {
  if (resolution <= 0) throw std::invalid_argument("render_heatmaps: resolution must be positive");
  if (pose.reference_resolution <= 0) throw std::invalid_argument("render_heatmaps: invalid pose");
  HeatmapStack h = HeatmapStack::zeros(resolution);
  const double inv_two_sigma2 = 1.0 / (2.0 * heatmap_sigma2(resolution));
  const double rescale = static_cast<double>(resolution) / pose.reference_resolution;
  Eigen::VectorXd gx(resolution), gy(resolution);
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!pose.visible(k)) continue;
    const double u = (pose.keypoints(0, k) + 0.5) * rescale;
    const double v = (pose.keypoints(1, k) + 0.5) * rescale;
    for (int i = 0; i < resolution; ++i) {
      gx[i] = (i + 0.5 - u) * (i + 0.5 - u);
      gy[i] = (i + 0.5 - v) * (i + 0.5 - v);
    }
    for (int y = 0; y < resolution; ++y) {
      for (int x = 0; x < resolution; ++x) {
        h.data(y * resolution + x, k) = std::exp(-(gx[x] + gy[y]) * inv_two_sigma2);
      }
    }
  }
  return h;
}

std::vector<HeatmapStack> render_pyramid(const Pose& pose, std::span<const int> resolutions) {
  if (resolutions.empty()) throw std::invalid_argument("render_pyramid: empty resolution list");
  for (std::size_t i = 1; i < resolutions.size(); ++i) {
    if (resolutions[i] <= resolutions[i - 1]) {
      throw std::invalid_argument("render_pyramid: resolutions must be strictly increasing");
    }
  }
  std::vector<HeatmapStack> out;
  out.reserve(resolutions.size());
  for (int r : resolutions) out.push_back(render_heatmaps(pose, r));
  return out;
}

Eigen::VectorXd flatten_pose(const Pose& pose) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(kPoseFeatureDim);
  const double inv = 1.0 / pose.reference_resolution;
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!pose.visible(k)) continue;
    f[2 * k] = pose.keypoints(0, k) * inv;
    f[2 * k + 1] = pose.keypoints(1, k) * inv;
    f[2 * kNumKeypoints + k] = 1.0;
  }
  return f;
}

Eigen::Vector2d transform_point(const Eigen::Vector2d& p, const SpatialTransform& t, int image_size) {
  const double size = image_size;
  const double center = (size - 1.0) / 2.0;
  Eigen::Vector2d q = p;
  if (t.horizontal_flip) q.x() = size - 1.0 - q.x();
  if (t.scale != 1.0) q = (q.array() - center) * t.scale + center;
  if (!t.translation.isZero(0.0)) q += t.translation * size;
  return q;
}

Eigen::Vector2d inverse_transform_point(const Eigen::Vector2d& p, const SpatialTransform& t, int image_size) {
  const double size = image_size;
  const double center = (size - 1.0) / 2.0;
  Eigen::Vector2d q = p;
  if (!t.translation.isZero(0.0)) q -= t.translation * size;
  if (t.scale != 1.0) q = (q.array() - center) / t.scale + center;
  if (t.horizontal_flip) q.x() = size - 1.0 - q.x();
  return q;
}

Pose transform_pose(const Pose& pose, const SpatialTransform& t, int image_size) {
  if (image_size <= 0) throw std::invalid_argument("transform_pose: image size must be positive");
  Pose in = pose;
  if (pose.reference_resolution != image_size) {
    const double r = static_cast<double>(image_size) / pose.reference_resolution;
    in.keypoints = ((pose.keypoints.array() + 0.5) * r - 0.5).matrix();
    in.reference_resolution = image_size;
  }
  if (t.is_identity_geometry()) return in;

  Pose out = Pose::invisible(image_size);
  for (int k = 0; k < kNumKeypoints; ++k) {
    const int dst = t.horizontal_flip ? flip_partner(k) : k;
    const Eigen::Vector2d q = transform_point(in.point(k), t, image_size);
    const bool inside = q.x() >= 0.0 && q.x() < image_size && q.y() >= 0.0 && q.y() < image_size;
    out.keypoints.col(dst) = q;
    out.visibility[static_cast<std::size_t>(dst)] = in.visible(k) && inside;
  }
  return out;
}

nlohmann::json pose_to_json(const Pose& pose) {
  nlohmann::json kps = nlohmann::json::array();
  nlohmann::json vis = nlohmann::json::array();
  for (int k = 0; k < kNumKeypoints; ++k) {
    kps.push_back({pose.keypoints(0, k), pose.keypoints(1, k)});
    vis.push_back(pose.visible(k));
  }
  return {{"keypoints", kps}, {"visibility", vis}, {"ref", pose.reference_resolution}};
}

Pose pose_from_json(const nlohmann::json& j) {
  const auto& kps = j.at("keypoints");
  const auto& vis = j.at("visibility");
  if (kps.size() != kNumKeypoints || vis.size() != kNumKeypoints) {
    throw std::invalid_argument("pose json: expected 18 keypoints and 18 visibility flags");
  }
  Pose p = Pose::invisible(j.at("ref").get<int>());
  for (int k = 0; k < kNumKeypoints; ++k) {
    const auto& xy = kps.at(static_cast<std::size_t>(k));
    if (xy.size() != 2) throw std::invalid_argument("pose json: keypoint must be [x, y]");
    p.set(k, xy[0].get<double>(), xy[1].get<double>(), vis.at(static_cast<std::size_t>(k)).get<bool>());
  }
  p.validate();
  return p;
}

}  // namespace posegan
