// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// Video curation over precomputed detection / pose manifests: quality
// filtering, single-person detection and pose filtering, clip segmentation,
// per-clip crops and the train/test split.
//
// Boxes and keypoints in manifests are normalized to [0, 1] of the frame, so
// area fractions are the same before and after the short-edge resize.

#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "posegan/pose.hpp"

namespace posegan {

struct CurationConfig {
  int min_side = 256;
  double min_bits_per_pixel = 0.9;
  double min_fps = 23.9;
  double max_fps = 30.0;
  long max_frames = 3000;
  int target_short_edge = 256;

  double detection_relaxed_score = 0.95;
  double detection_min_area = 0.01;
  double nms_iou = 0.3;
  double detection_strict_score = 0.98;
  double detection_strict_min_area = 0.04;
  double detection_max_area = 0.80;

  double pose_relaxed_total = 2.5;
  double pose_strict_total = 10.0;
  double keypoint_score = 0.3;
  int min_body_keypoints = 8;

  int min_clip_length = 30;
  int crop_size = 256;

  void validate() const;
};

nlohmann::json to_json(const CurationConfig& c);
CurationConfig curation_config_from_json(const nlohmann::json& j);

struct VideoMeta {
  std::string video_id;
  int width = 0;
  int height = 0;
  double fps = 0.0;
  double total_bits = 0.0;
  long frame_count = 0;
  bool pre_extracted = false;  // frame datasets: only the resolution check applies

  double bits_per_pixel() const;
  void validate() const;
};

enum class QualityVerdict { kAccepted, kLowResolution, kLowBitrate, kFrameRate };

struct QualityResult {
  QualityVerdict verdict = QualityVerdict::kAccepted;
  int stride = 1;
  long frames_kept = 0;  // after striding and truncation
  int resized_width = 0;
  int resized_height = 0;

  bool accepted() const { return verdict == QualityVerdict::kAccepted; }
};

/// Throws std::invalid_argument for non-positive fields.
QualityResult quality_filter(const VideoMeta& meta, const CurationConfig& cfg = {});
/// Frame size with the short edge scaled to `short_edge`.
std::pair<int, int> resized_size(int width, int height, int short_edge);

struct BBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double area() const { return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0); }
  Eigen::Vector2d center() const { return {(x0 + x1) / 2, (y0 + y1) / 2}; }
};

double iou(const BBox& a, const BBox& b);

struct Detection {
  BBox box;
  double score = 0.0;
};

struct PoseCandidate {
  Eigen::Matrix<double, 2, kNumKeypoints> keypoints = Eigen::Matrix<double, 2, kNumKeypoints>::Zero();
  std::array<double, kNumKeypoints> scores{};

  double total_score() const;
};

struct FrameRecord {
  long frame = 0;
  std::vector<Detection> detections;
  std::vector<PoseCandidate> poses;

  void validate() const;
};

enum class DetectionStatus { kNoPerson, kMultiPerson, kWeak, kSingleOk };

struct DetectionResult {
  DetectionStatus status = DetectionStatus::kNoPerson;
  std::optional<BBox> box;  // the surviving box for single-box frames
};

/// Greedy score-descending NMS; equal scores keep the earlier detection.
std::vector<Detection> non_max_suppression(std::span<const Detection> detections, double iou_threshold);

DetectionResult detection_filter(const FrameRecord& frame, const CurationConfig& cfg = {});
std::vector<DetectionResult> detection_filter(std::span<const FrameRecord> frames, const CurationConfig& cfg = {});

enum class PoseStatus { kNoPose, kMultiPerson, kWeak, kIncomplete, kPass };

struct PoseResult {
  PoseStatus status = PoseStatus::kNoPose;
  int candidate = -1;
  std::array<bool, kNumKeypoints> visible{};
};

/// Total score is the sum of per-keypoint scores.
PoseResult pose_filter(const FrameRecord& frame, const CurationConfig& cfg = {});

/// Maximal runs [start, end) of passing frames of length >= min_length.
std::vector<std::pair<long, long>> segment_clips(std::span<const bool> passing, int min_length);

struct CropWindow {
  int x0 = 0, y0 = 0, size = 0;

  friend bool operator==(const CropWindow&, const CropWindow&) = default;
};

/// size x size window centered on the mean box center, clamped into the
/// width x height frame. Throws when the frame is smaller than the window.
CropWindow compute_crop(std::span<const BBox> boxes, int width, int height, int size = 256);

struct Clip {
  std::string video_id;
  long start = 0;  // strided frame indices, end exclusive
  long end = 0;
  int stride = 1;
  CropWindow crop;
  int frame_width = 0;  // after the resize
  int frame_height = 0;
  std::vector<Pose> poses;  // in crop pixels

  long length() const { return end - start; }
};

nlohmann::json to_json(const Clip& c);
Clip clip_from_json(const nlohmann::json& j);

struct CurationStats {
  long videos = 0;
  long videos_accepted = 0;
  long rejected_resolution = 0;
  long rejected_bitrate = 0;
  long rejected_frame_rate = 0;
  long frames = 0;  // after striding and truncation
  long frames_no_person = 0;
  long frames_multi_person = 0;
  long frames_weak_detection = 0;
  long frames_no_pose = 0;
  long frames_multi_pose = 0;
  long frames_weak_pose = 0;
  long frames_incomplete_pose = 0;
  long frames_passed = 0;
  long short_runs = 0;
  long clips = 0;
  long clip_frames = 0;
};

nlohmann::json to_json(const CurationStats& s);

struct VideoManifest {
  VideoMeta meta;
  std::vector<FrameRecord> frames;
};

/// JSON-lines: {"type": "video", ...meta} headers and {"type": "frame",
/// "video_id", "frame", "detections": [{"bbox", "score"}], "poses":
/// [{"keypoints": [[x, y, score] x 18]}]} records. Frames may appear in any
/// order; they are sorted by index per video.
std::vector<VideoManifest> read_manifest(std::istream& in);
void write_manifest(std::ostream& out, std::span<const VideoManifest> videos);

struct CurationResult {
  std::vector<Clip> clips;
  CurationStats stats;
};

/// Runs the full pipeline; videos are processed in video_id order.
CurationResult curate(std::span<const VideoManifest> videos, const CurationConfig& cfg = {});

struct ClipSplit {
  std::vector<Clip> train;
  std::vector<Clip> test;
  std::vector<std::string> warnings;
};

/// Seeded shuffle, then the first test_count clips (or, by_video, whole
/// videos until at least test_count clips) go to the test set.
ClipSplit split_clips(std::vector<Clip> clips, std::size_t test_count, std::uint64_t seed, bool by_video = false);

std::string to_string(QualityVerdict v);
std::string to_string(DetectionStatus s);
std::string to_string(PoseStatus s);

}  // namespace posegan
