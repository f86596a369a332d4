// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "posegan/curation.hpp"
#include "posegan/rng.hpp"

using namespace posegan;

namespace {

VideoMeta meta(int w, int h, double fps, double bpp, long frames = 100) {
  return {"v", w, h, fps, bpp * static_cast<double>(frames) * w * h, frames, false};
}

Detection det(double cx, double cy, double w, double h, double score) {
  return {{cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2}, score};
}

PoseCandidate candidate(double score) {
  PoseCandidate c;
  c.keypoints.setConstant(0.5);
  c.scores.fill(score);
  return c;
}

std::vector<VideoManifest> golden() {
  std::ifstream in(std::string(POSEGAN_TEST_DATA) + "/golden_manifest.jsonl");
  REQUIRE(in.good());
  return read_manifest(in);
}

std::set<std::pair<std::string, long>> clip_frames(const std::vector<Clip>& clips) {
  std::set<std::pair<std::string, long>> s;
  for (const Clip& c : clips) {
    for (long t = c.start; t < c.end; ++t) s.emplace(c.video_id, t);
  }
  return s;
}

/// Random manifest with mostly clean frames and occasional defects.
std::vector<VideoManifest> random_manifest(Rng& rng, int videos) {
  std::vector<VideoManifest> out;
  for (int v = 0; v < videos; ++v) {
    VideoManifest m;
    m.meta = meta(rng.bernoulli(0.5) ? 640 : 480, 360, rng.bernoulli(0.8) ? 30.0 : 60.0, rng.uniform(0.8, 2.0), 400);
    m.meta.video_id = "vid" + std::to_string(v);
    for (long f = 0; f < 400; ++f) {
      FrameRecord r;
      r.frame = f;
      const double cx = rng.uniform(0.2, 0.8);
      const double score = rng.bernoulli(0.97) ? rng.uniform(0.98, 1.0) : rng.uniform(0.95, 0.98);
      r.detections.push_back(det(cx, 0.5, rng.uniform(0.15, 0.4), rng.uniform(0.3, 0.9), score));
      if (rng.bernoulli(0.01)) r.detections.push_back(det(rng.uniform(0.1, 0.9), 0.5, 0.2, 0.5, rng.uniform(0.9, 1.0)));
      PoseCandidate c = candidate(0.0);
      for (int k = 0; k < kNumKeypoints; ++k) {
        c.keypoints(0, k) = std::clamp(cx + rng.uniform(-0.1, 0.1), 0.0, 1.0);
        c.keypoints(1, k) = rng.uniform(0.2, 0.8);
        c.scores[static_cast<std::size_t>(k)] = rng.bernoulli(0.9) ? rng.uniform(0.5, 1.0) : rng.uniform(0.0, 0.4);
      }
      if (rng.bernoulli(0.98)) c.scores[kNeck] = 0.9;
      r.poses.push_back(c);
      if (rng.bernoulli(0.01)) r.poses.push_back(candidate(rng.uniform(0.1, 0.2)));
      m.frames.push_back(r);
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

TEST_CASE("quality filter") {
  CHECK(quality_filter(meta(320, 240, 30, 2)).verdict == QualityVerdict::kLowResolution);
  const QualityResult fast = quality_filter(meta(640, 480, 60, 2));
  CHECK(fast.accepted());
  CHECK(fast.stride == 2);
  CHECK(fast.frames_kept == 50);
  CHECK(quality_filter(meta(640, 480, 30, 0.5)).verdict == QualityVerdict::kLowBitrate);
  CHECK(quality_filter(meta(640, 480, 45, 2)).verdict == QualityVerdict::kFrameRate);
  CHECK(quality_filter(meta(640, 480, 20, 2)).verdict == QualityVerdict::kFrameRate);
  CHECK(quality_filter(meta(640, 480, 23.976, 2)).stride == 1);
  CHECK(quality_filter(meta(640, 480, 120, 2)).stride == 4);
  CHECK(quality_filter(meta(640, 480, 30, 2, 10000)).frames_kept == 3000);
  CHECK(quality_filter(meta(640, 480, 60, 2, 10000)).frames_kept == 3000);
  const QualityResult r = quality_filter(meta(640, 480, 30, 2));
  CHECK(r.resized_width == 341);
  CHECK(r.resized_height == 256);

  VideoMeta frames = meta(640, 480, 10, 0.1);
  frames.pre_extracted = true;
  CHECK(quality_filter(frames).accepted());

  CHECK_THROWS_AS(quality_filter(meta(0, 480, 30, 2)), std::invalid_argument);
  CHECK_THROWS_AS(quality_filter(meta(640, 480, 0, 2)), std::invalid_argument);
  CHECK_THROWS_AS(quality_filter(meta(640, 480, 30, 2, 0)), std::invalid_argument);
}

TEST_CASE("detection filter") {
  FrameRecord f;
  f.detections = {det(0.2, 0.5, 0.2, 0.5, 0.97), det(0.8, 0.5, 0.2, 0.5, 0.96)};
  CHECK(iou(f.detections[0].box, f.detections[1].box) < 0.3);
  CHECK(detection_filter(f).status == DetectionStatus::kMultiPerson);

  f.detections = {det(0.5, 0.5, 0.3, 0.5, 0.97)};
  CHECK(detection_filter(f).status == DetectionStatus::kWeak);

  f.detections = {det(0.5, 0.5, 0.2, 0.5, 0.99)};
  CHECK(detection_filter(f).status == DetectionStatus::kSingleOk);
  CHECK(detection_filter(f).box->area() == doctest::Approx(0.1));

  // Overlapping boxes collapse to the higher score.
  f.detections = {det(0.5, 0.5, 0.2, 0.5, 0.96), det(0.52, 0.5, 0.2, 0.5, 0.99)};
  const DetectionResult nms = detection_filter(f);
  CHECK(nms.status == DetectionStatus::kSingleOk);
  CHECK(nms.box->center().x() == doctest::Approx(0.52));

  f.detections = {det(0.5, 0.5, 0.05, 0.1, 0.99)};
  CHECK(detection_filter(f).status == DetectionStatus::kNoPerson);
  f.detections = {det(0.5, 0.5, 0.15, 0.2, 0.99)};
  CHECK(detection_filter(f).status == DetectionStatus::kWeak);
  f.detections = {det(0.5, 0.5, 0.95, 0.9, 0.99)};
  CHECK(detection_filter(f).status == DetectionStatus::kWeak);
  f.detections = {};
  CHECK(detection_filter(f).status == DetectionStatus::kNoPerson);

  // Ties keep the earlier detection.
  const std::vector<Detection> tie{det(0.5, 0.5, 0.2, 0.5, 0.97), det(0.51, 0.5, 0.2, 0.5, 0.97)};
  const auto kept = non_max_suppression(tie, 0.3);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].box.x0 == tie[0].box.x0);
}

TEST_CASE("pose filter") {
  FrameRecord f;
  f.poses = {candidate(3.0 / 18), candidate(11.0 / 18)};
  CHECK(pose_filter(f).status == PoseStatus::kMultiPerson);
  f.poses = {candidate(0.5)};
  CHECK(pose_filter(f).status == PoseStatus::kWeak);
  f.poses = {};
  CHECK(pose_filter(f).status == PoseStatus::kNoPose);

  // Total 12, neck 0.5, 9 of 14 body keypoints visible.
  PoseCandidate c = candidate(0.0);
  const int visible[] = {kNose, kNeck, kRShoulder, kLShoulder, kRHip, kLHip, kRKnee, kLKnee, kRElbow};
  for (int k : visible) c.scores[static_cast<std::size_t>(k)] = 1.0;
  c.scores[kNeck] = 0.5;
  for (int k : {kREye, kLEye, kREar, kLEar}) c.scores[static_cast<std::size_t>(k)] = 0.875;
  CHECK(c.total_score() == doctest::Approx(12.0));
  f.poses = {c};
  const PoseResult r = pose_filter(f);
  CHECK(r.status == PoseStatus::kPass);
  CHECK(r.visible[kNeck]);
  CHECK(!r.visible[kRWrist]);

  c.scores[kNeck] = 0.2;
  c.scores[kRWrist] = 0.3;
  f.poses = {c};
  CHECK(pose_filter(f).status == PoseStatus::kIncomplete);

  // Seven body keypoints are not enough even with a high total.
  PoseCandidate seven = candidate(0.29);
  for (int k : {kNose, kNeck, kRShoulder, kLShoulder, kRHip, kLHip, kRKnee}) seven.scores[static_cast<std::size_t>(k)] = 1.0;
  f.poses = {seven};
  CHECK(seven.total_score() >= 10.0);
  CHECK(pose_filter(f).status == PoseStatus::kIncomplete);
}

TEST_CASE("segment clips") {
  std::vector<char> s(41, 1);
  auto run = [](const std::vector<char>& v) {
    const auto b = std::make_unique<bool[]>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) b[i] = v[i] != 0;
    return segment_clips(std::span<const bool>(b.get(), v.size()), 30);
  };
  CHECK(run(s) == std::vector<std::pair<long, long>>{{0, 41}});
  CHECK(run(std::vector<char>(29, 1)).empty());
  std::vector<char> two(71, 1);
  two[35] = 0;
  CHECK(run(two) == std::vector<std::pair<long, long>>{{0, 35}, {36, 71}});
  CHECK(run({}).empty());
}

TEST_CASE("compute crop") {
  const std::vector<BBox> left{{0.1, 0.2, 0.3, 0.8}};
  CHECK(compute_crop(left, 256, 256) == CropWindow{0, 0, 256});
  // Mean center x = 100 px in a 455 x 256 frame.
  const double u = 100.0 / 455.0;
  const std::vector<BBox> near_left{{u - 0.05, 0.2, u + 0.05, 0.8}};
  CHECK(compute_crop(near_left, 455, 256) == CropWindow{0, 0, 256});
  const std::vector<BBox> middle{{0.4, 0.2, 0.6, 0.8}};
  CHECK(compute_crop(middle, 512, 256) == CropWindow{128, 0, 256});
  const std::vector<BBox> right{{0.8, 0.2, 1.0, 0.8}, {0.9, 0.2, 1.0, 0.8}};
  CHECK(compute_crop(right, 455, 256) == CropWindow{199, 0, 256});
  CHECK_THROWS_AS(compute_crop(middle, 255, 300), std::invalid_argument);
}

TEST_CASE("golden manifest trace") {
  const std::vector<VideoManifest> videos = golden();
  REQUIRE(videos.size() == 4);
  const CurationResult r = curate(videos);

  REQUIRE(r.clips.size() == 4);
  const long starts[] = {0, 71, 115, 154}, ends[] = {40, 111, 151, 200};
  const int x0s[] = {0, 145, 199, 54};
  for (std::size_t i = 0; i < 4; ++i) {
    CAPTURE(i);
    CHECK(r.clips[i].video_id == "golden");
    CHECK(r.clips[i].start == starts[i]);
    CHECK(r.clips[i].end == ends[i]);
    CHECK(r.clips[i].stride == 2);
    CHECK(r.clips[i].crop == CropWindow{x0s[i], 0, 256});
    CHECK(r.clips[i].frame_width == 455);
    CHECK(r.clips[i].frame_height == 256);
    CHECK(r.clips[i].poses.size() == static_cast<std::size_t>(ends[i] - starts[i]));
  }

  // Keypoints in crop pixels: u * 455 - 0.5 - x0, v * 256 - 0.5.
  const Pose& p0 = r.clips[0].poses[0];
  CHECK(p0.point(kRWrist).x() == doctest::Approx(49.55));
  const Pose& p1 = r.clips[1].poses[9];
  CHECK(p1.point(kNeck).x() == doctest::Approx(127.5));
  CHECK(p1.point(kNeck).y() == doctest::Approx(81.42));
  CHECK(r.clips[2].poses[0].point(kLWrist).x() == doctest::Approx(250.95));
  const Pose& p3 = r.clips[3].poses[26];
  CHECK(p3.visible_count() == 8);
  CHECK(!p3.visible(kRWrist));
  CHECK(p3.point(kNeck).x() == doctest::Approx(82.0));

  const CurationStats& s = r.stats;
  CHECK(s.videos == 4);
  CHECK(s.videos_accepted == 1);
  CHECK(s.rejected_resolution == 1);
  CHECK(s.rejected_bitrate == 1);
  CHECK(s.rejected_frame_rate == 1);
  CHECK(s.frames == 200);
  CHECK(s.frames_no_person == 2);
  CHECK(s.frames_multi_person == 1);
  CHECK(s.frames_weak_detection == 3);
  CHECK(s.frames_no_pose == 0);
  CHECK(s.frames_multi_pose == 1);
  CHECK(s.frames_weak_pose == 1);
  CHECK(s.frames_incomplete_pose == 1);
  CHECK(s.frames_passed == 191);
  CHECK(s.short_runs == 1);
  CHECK(s.clips == 4);
  CHECK(s.clip_frames == 162);
}

TEST_CASE("re-curating the emitted frames reproduces the clips") {
  Rng rng(3);
  for (const auto& videos : {golden(), random_manifest(rng, 6)}) {
    const CurationResult first = curate(videos);
    std::vector<VideoManifest> kept = videos;
    for (VideoManifest& v : kept) {
      std::vector<FrameRecord> frames;
      for (const FrameRecord& f : v.frames) {
        for (const Clip& c : first.clips) {
          if (c.video_id == v.meta.video_id && f.frame % c.stride == 0 && f.frame / c.stride >= c.start &&
              f.frame / c.stride < c.end) {
            frames.push_back(f);
          }
        }
      }
      v.frames = frames;
    }
    const CurationResult second = curate(kept);
    REQUIRE(second.clips.size() == first.clips.size());
    for (std::size_t i = 0; i < first.clips.size(); ++i) CHECK(to_json(second.clips[i]) == to_json(first.clips[i]));
  }
}

TEST_CASE("raising strict thresholds only removes clip frames") {
  Rng rng(4);
  const std::vector<VideoManifest> sets[] = {golden(), random_manifest(rng, 4)};
  for (const auto& videos : sets) {
    const auto base = clip_frames(curate(videos).clips);
    CHECK(!base.empty());
    for (int t = 0; t < 50; ++t) {
      CurationConfig c;
      c.min_bits_per_pixel += rng.uniform(0, 0.5) * rng.bernoulli(0.3);
      c.detection_strict_score += rng.uniform(0, 0.02) * rng.bernoulli(0.5);
      c.detection_strict_min_area += rng.uniform(0, 0.1) * rng.bernoulli(0.5);
      c.detection_max_area -= rng.uniform(0, 0.3) * rng.bernoulli(0.5);
      c.pose_strict_total += rng.uniform(0, 5) * rng.bernoulli(0.5);
      c.keypoint_score += rng.uniform(0, 0.3) * rng.bernoulli(0.5);
      c.min_body_keypoints += rng.uniform_int(0, 3) * rng.bernoulli(0.5);
      c.min_clip_length += rng.uniform_int(0, 20) * rng.bernoulli(0.5);
      const auto raised = clip_frames(curate(videos, c).clips);
      CHECK(std::includes(base.begin(), base.end(), raised.begin(), raised.end()));
    }
  }
}

TEST_CASE("split clips") {
  std::vector<Clip> clips;
  for (int i = 0; i < 100; ++i) {
    Clip c;
    c.video_id = "v" + std::to_string(i / 4);
    c.start = i;
    c.end = i + 30;
    clips.push_back(c);
  }
  const ClipSplit a = split_clips(clips, 10, 7);
  CHECK(a.train.size() == 90);
  CHECK(a.test.size() == 10);
  std::set<long> ids;
  for (const auto* part : {&a.train, &a.test}) {
    for (const Clip& c : *part) ids.insert(c.start);
  }
  CHECK(ids.size() == 100);
  const ClipSplit b = split_clips(clips, 10, 7);
  for (std::size_t i = 0; i < 10; ++i) CHECK(a.test[i].start == b.test[i].start);
  CHECK(a.warnings.empty());

  const ClipSplit all = split_clips(clips, 100, 1);
  CHECK(all.train.empty());
  CHECK(all.warnings.size() == 1);
  CHECK_THROWS_AS(split_clips(clips, 101, 1), std::invalid_argument);

  const ClipSplit by_video = split_clips(clips, 10, 3, true);
  CHECK(by_video.test.size() == 12);
  std::set<std::string> test_videos;
  for (const Clip& c : by_video.test) test_videos.insert(c.video_id);
  for (const Clip& c : by_video.train) CHECK(test_videos.count(c.video_id) == 0);
}

TEST_CASE("manifest and clip serialization") {
  const std::vector<VideoManifest> videos = golden();
  std::ostringstream out;
  write_manifest(out, videos);
  std::istringstream in(out.str());
  const std::vector<VideoManifest> again = read_manifest(in);
  REQUIRE(again.size() == videos.size());
  const CurationResult a = curate(videos), b = curate(again);
  REQUIRE(a.clips.size() == b.clips.size());
  for (std::size_t i = 0; i < a.clips.size(); ++i) {
    CHECK(to_json(clip_from_json(to_json(a.clips[i]))) == to_json(a.clips[i]));
    CHECK(to_json(b.clips[i]) == to_json(a.clips[i]));
  }

  std::istringstream bad_box(
      R"({"type":"video","video_id":"a","width":640,"height":480,"fps":30,"total_bits":1e9,"frame_count":10})"
      "\n"
      R"({"type":"frame","video_id":"a","frame":0,"detections":[{"bbox":[0,0,1.5,1],"score":0.9}],"poses":[]})");
  CHECK_THROWS_WITH_AS(read_manifest(bad_box), doctest::Contains("line 2"), std::invalid_argument);
  std::istringstream orphan(R"({"type":"frame","video_id":"x","frame":0})");
  CHECK_THROWS_AS(read_manifest(orphan), std::invalid_argument);
}
