// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// 18-keypoint body poses, their Gaussian keypoint heatmaps, flattening for
// the pose embedding, and the geometric transforms shared with images.
//
// Coordinates are in pixel-index units of the pose's reference resolution:
// the center of pixel i sits at coordinate i. Heatmaps are evaluated at
// continuous pixel centers, with keypoint x placed at (x + 0.5) * R / ref.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "posegan/tensor.hpp"

namespace posegan {

inline constexpr int kNumKeypoints = 18;
inline constexpr int kPoseFeatureDim = 3 * kNumKeypoints;

/// OpenPose BODY-18 keypoint order.
enum Keypoint : int {
  kNose = 0,
  kNeck,
  kRShoulder,
  kRElbow,
  kRWrist,
  kLShoulder,
  kLElbow,
  kLWrist,
  kRHip,
  kRKnee,
  kRAnkle,
  kLHip,
  kLKnee,
  kLAnkle,
  kREye,
  kLEye,
  kREar,
  kLEar,
};

std::string_view keypoint_name(int k);
/// Index of the mirrored keypoint (r-shoulder <-> l-shoulder, ...); self for nose and neck.
int flip_partner(int k);
/// True for eyes and ears.
bool is_face_keypoint(int k);

/// Limb pairs used to draw stick figures.
inline constexpr std::array<std::pair<int, int>, 17> kLimbs = {{
    {kNeck, kRShoulder}, {kRShoulder, kRElbow}, {kRElbow, kRWrist}, {kNeck, kLShoulder},
    {kLShoulder, kLElbow}, {kLElbow, kLWrist}, {kNeck, kRHip},       {kRHip, kRKnee},
    {kRKnee, kRAnkle},   {kNeck, kLHip},       {kLHip, kLKnee},     {kLKnee, kLAnkle},
    {kNeck, kNose},      {kNose, kREye},       {kREye, kREar},      {kNose, kLEye},
    {kLEye, kLEar},
}};

struct Pose {
  Eigen::Matrix<double, 2, kNumKeypoints> keypoints = Eigen::Matrix<double, 2, kNumKeypoints>::Zero();
  std::array<bool, kNumKeypoints> visibility{};
  int reference_resolution = 256;

  static Pose invisible(int reference_resolution);

  Eigen::Vector2d point(int k) const { return keypoints.col(k); }
  bool visible(int k) const { return visibility[static_cast<std::size_t>(k)]; }
  void set(int k, double x, double y, bool vis = true) {
    keypoints(0, k) = x;
    keypoints(1, k) = y;
    visibility[static_cast<std::size_t>(k)] = vis;
  }
  int visible_count() const;

  /// Throws std::invalid_argument when the resolution is non-positive or a
  /// visible keypoint lies outside [0, reference_resolution).
  void validate() const;

  friend bool operator==(const Pose& a, const Pose& b);
};

/// K x R x R keypoint heatmaps, stored pixels-by-channels like FeatureMap.
struct HeatmapStack {
  int resolution = 0;
  Eigen::MatrixXd data;

  double at(int k, int y, int x) const { return data(y * resolution + x, k); }

  template <class S>
  FeatureMap<S> as_feature_map() const {
    return FeatureMap<S>(resolution, resolution, data.cast<S>());
  }

  static HeatmapStack zeros(int resolution);
};

/// Kernel variance used at resolution R: max(0.5, 0.005 R^2).
double heatmap_sigma2(int resolution);

HeatmapStack render_heatmaps(const Pose& pose, int resolution);

/// One analytically rendered stack per resolution (each with its own sigma^2).
/// Resolutions must be non-empty and strictly increasing.
std::vector<HeatmapStack> render_pyramid(const Pose& pose, std::span<const int> resolutions);

/// [x_1, y_1, ..., x_K, y_K, v_1, ..., v_K] with coordinates divided by the
/// reference resolution and invisible keypoints' coordinates zeroed.
Eigen::VectorXd flatten_pose(const Pose& pose);

struct Cutout {
  Eigen::Vector2d center = Eigen::Vector2d::Constant(0.5);  // fraction of image size
  Eigen::Vector2d half_extent = Eigen::Vector2d::Constant(0.25);
};

struct SpatialTransform {
  bool horizontal_flip = false;
  double scale = 1.0;
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();  // fraction of image size
  std::optional<Cutout> cutout;

  bool is_identity_geometry() const {
    return !horizontal_flip && scale == 1.0 && translation.isZero(0.0);
  }
};

/// Maps a point given in pixel-index units of an image_size frame through
/// flip, then scale about the image center, then translation.
Eigen::Vector2d transform_point(const Eigen::Vector2d& p, const SpatialTransform& t, int image_size);
/// Inverse of transform_point.
Eigen::Vector2d inverse_transform_point(const Eigen::Vector2d& p, const SpatialTransform& t, int image_size);

/// Applies the geometric part of t to a pose drawn in an image_size frame.
/// The result is expressed at image_size resolution; flipped poses swap
/// left/right labels; keypoints leaving the frame become invisible. Cutout
/// does not affect poses.
Pose transform_pose(const Pose& pose, const SpatialTransform& t, int image_size);

/// {"keypoints": [[x,y] x 18], "visibility": [bool x 18], "ref": int}
nlohmann::json pose_to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);

}  // namespace posegan
