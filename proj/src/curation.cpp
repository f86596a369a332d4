// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include "posegan/curation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>

namespace posegan {

namespace {

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::invalid_argument(field + ": " + what);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void CurationConfig::validate() const {
  check(min_side > 0, "curation.min_side", "must be positive");
  check(min_bits_per_pixel >= 0, "curation.min_bits_per_pixel", "must be non-negative");
  check(min_fps > 0 && max_fps >= min_fps, "curation.min_fps", "must satisfy 0 < min_fps <= max_fps");
  check(max_frames > 0, "curation.max_frames", "must be positive");
  check(target_short_edge > 0, "curation.target_short_edge", "must be positive");
  check(nms_iou >= 0 && nms_iou <= 1, "curation.nms_iou", "must be in [0, 1]");
  check(min_body_keypoints >= 0 && min_body_keypoints <= 14, "curation.min_body_keypoints", "must be in [0, 14]");
  check(min_clip_length >= 1, "curation.min_clip_length", "must be positive");
  check(crop_size > 0 && crop_size <= target_short_edge, "curation.crop_size", "must be in (0, target_short_edge]");
}

nlohmann::json to_json(const CurationConfig& c) {
  return {{"min_side", c.min_side},
          {"min_bits_per_pixel", c.min_bits_per_pixel},
          {"min_fps", c.min_fps},
          {"max_fps", c.max_fps},
          {"max_frames", c.max_frames},
          {"target_short_edge", c.target_short_edge},
          {"detection_relaxed_score", c.detection_relaxed_score},
          {"detection_min_area", c.detection_min_area},
          {"nms_iou", c.nms_iou},
          {"detection_strict_score", c.detection_strict_score},
          {"detection_strict_min_area", c.detection_strict_min_area},
          {"detection_max_area", c.detection_max_area},
          {"pose_relaxed_total", c.pose_relaxed_total},
          {"pose_strict_total", c.pose_strict_total},
          {"keypoint_score", c.keypoint_score},
          {"min_body_keypoints", c.min_body_keypoints},
          {"min_clip_length", c.min_clip_length},
          {"crop_size", c.crop_size}};
}

CurationConfig curation_config_from_json(const nlohmann::json& j) {
  CurationConfig c;
  c.min_side = j.value("min_side", c.min_side);
  c.min_bits_per_pixel = j.value("min_bits_per_pixel", c.min_bits_per_pixel);
  c.min_fps = j.value("min_fps", c.min_fps);
  c.max_fps = j.value("max_fps", c.max_fps);
  c.max_frames = j.value("max_frames", c.max_frames);
  c.target_short_edge = j.value("target_short_edge", c.target_short_edge);
  c.detection_relaxed_score = j.value("detection_relaxed_score", c.detection_relaxed_score);
  c.detection_min_area = j.value("detection_min_area", c.detection_min_area);
  c.nms_iou = j.value("nms_iou", c.nms_iou);
  c.detection_strict_score = j.value("detection_strict_score", c.detection_strict_score);
  c.detection_strict_min_area = j.value("detection_strict_min_area", c.detection_strict_min_area);
  c.detection_max_area = j.value("detection_max_area", c.detection_max_area);
  c.pose_relaxed_total = j.value("pose_relaxed_total", c.pose_relaxed_total);
  c.pose_strict_total = j.value("pose_strict_total", c.pose_strict_total);
  c.keypoint_score = j.value("keypoint_score", c.keypoint_score);
  c.min_body_keypoints = j.value("min_body_keypoints", c.min_body_keypoints);
  c.min_clip_length = j.value("min_clip_length", c.min_clip_length);
  c.crop_size = j.value("crop_size", c.crop_size);
  c.validate();
  return c;
}

double VideoMeta::bits_per_pixel() const {
  return total_bits / (static_cast<double>(frame_count) * width * height);
}

void VideoMeta::validate() const {
  const std::string where = "video " + video_id;
  check(width > 0 && height > 0, where + ".width", "dimensions must be positive");
  check(fps > 0, where + ".fps", "must be positive");
  check(frame_count > 0, where + ".frame_count", "must be positive");
  check(pre_extracted || total_bits > 0, where + ".total_bits", "must be positive");
}

std::pair<int, int> resized_size(int width, int height, int short_edge) {
  if (width <= height) {
    return {short_edge, static_cast<int>(std::lround(static_cast<double>(height) * short_edge / width))};
  }
  return {static_cast<int>(std::lround(static_cast<double>(width) * short_edge / height)), short_edge};
}

QualityResult quality_filter(const VideoMeta& meta, const CurationConfig& cfg) {
  meta.validate();
  QualityResult r;
  std::tie(r.resized_width, r.resized_height) = resized_size(meta.width, meta.height, cfg.target_short_edge);
  if (std::min(meta.width, meta.height) < cfg.min_side) {
    r.verdict = QualityVerdict::kLowResolution;
    return r;
  }
  if (!meta.pre_extracted) {
    if (meta.bits_per_pixel() < cfg.min_bits_per_pixel) {
      r.verdict = QualityVerdict::kLowBitrate;
      return r;
    }
    r.stride = 0;
    const int max_stride = static_cast<int>(std::floor(meta.fps / cfg.min_fps));
    for (int s = 1; s <= max_stride; ++s) {
      const double f = meta.fps / s;
      if (f >= cfg.min_fps && f <= cfg.max_fps) {
        r.stride = s;
        break;
      }
    }
    if (r.stride == 0) {
      r.stride = 1;
      r.verdict = QualityVerdict::kFrameRate;
      return r;
    }
  }
  r.frames_kept = std::min((meta.frame_count + r.stride - 1) / r.stride, cfg.max_frames);
  return r;
}

double iou(const BBox& a, const BBox& b) {
  const BBox inter{std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1), std::min(a.y1, b.y1)};
  const double i = inter.area();
  const double u = a.area() + b.area() - i;
  return u > 0.0 ? i / u : 0.0;
}

double PoseCandidate::total_score() const { return std::accumulate(scores.begin(), scores.end(), 0.0); }

void FrameRecord::validate() const {
  const std::string where = "frame " + std::to_string(frame);
  for (const Detection& d : detections) {
    check(in_unit(d.box.x0) && in_unit(d.box.y0) && in_unit(d.box.x1) && in_unit(d.box.y1), where + ".bbox",
          "must lie in [0, 1]^2");
    check(d.box.x0 <= d.box.x1 && d.box.y0 <= d.box.y1, where + ".bbox", "must satisfy x0 <= x1 and y0 <= y1");
    check(in_unit(d.score), where + ".score", "must be in [0, 1]");
  }
  for (const PoseCandidate& p : poses) {
    for (double s : p.scores) check(in_unit(s), where + ".poses.score", "must be in [0, 1]");
  }
}

std::vector<Detection> non_max_suppression(std::span<const Detection> detections, double iou_threshold) {
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return detections[a].score > detections[b].score; });
  std::vector<Detection> kept;
  for (std::size_t i : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(),
                                        [&](const Detection& k) { return iou(k.box, detections[i].box) > iou_threshold; });
    if (!suppressed) kept.push_back(detections[i]);
  }
  return kept;
}

DetectionResult detection_filter(const FrameRecord& frame, const CurationConfig& cfg) {
  std::vector<Detection> relaxed;
  for (const Detection& d : frame.detections) {
    if (d.score >= cfg.detection_relaxed_score && d.box.area() >= cfg.detection_min_area) relaxed.push_back(d);
  }
  const std::vector<Detection> kept = non_max_suppression(relaxed, cfg.nms_iou);
  DetectionResult r;
  if (kept.empty()) return r;
  if (kept.size() > 1) {
    r.status = DetectionStatus::kMultiPerson;
    return r;
  }
  const Detection& d = kept.front();
  r.box = d.box;
  const double area = d.box.area();
  const bool strict = d.score >= cfg.detection_strict_score && area >= cfg.detection_strict_min_area &&
                      area <= cfg.detection_max_area;
  r.status = strict ? DetectionStatus::kSingleOk : DetectionStatus::kWeak;
  return r;
}

std::vector<DetectionResult> detection_filter(std::span<const FrameRecord> frames, const CurationConfig& cfg) {
  std::vector<DetectionResult> out;
  out.reserve(frames.size());
  for (const FrameRecord& f : frames) out.push_back(detection_filter(f, cfg));
  return out;
}

PoseResult pose_filter(const FrameRecord& frame, const CurationConfig& cfg) {
  PoseResult r;
  int count = 0;
  for (std::size_t i = 0; i < frame.poses.size(); ++i) {
    if (frame.poses[i].total_score() >= cfg.pose_relaxed_total) {
      ++count;
      r.candidate = static_cast<int>(i);
    }
  }
  if (count == 0) return r;
  if (count > 1) {
    r.status = PoseStatus::kMultiPerson;
    r.candidate = -1;
    return r;
  }
  const PoseCandidate& c = frame.poses[static_cast<std::size_t>(r.candidate)];
  for (int k = 0; k < kNumKeypoints; ++k) r.visible[static_cast<std::size_t>(k)] = c.scores[static_cast<std::size_t>(k)] >= cfg.keypoint_score;
  if (c.total_score() < cfg.pose_strict_total) {
    r.status = PoseStatus::kWeak;
    return r;
  }
  int body = 0;
  for (int k = 0; k < kNumKeypoints; ++k) body += !is_face_keypoint(k) && r.visible[static_cast<std::size_t>(k)];
  r.status = r.visible[kNeck] && body >= cfg.min_body_keypoints ? PoseStatus::kPass : PoseStatus::kIncomplete;
  return r;
}

std::vector<std::pair<long, long>> segment_clips(std::span<const bool> passing, int min_length) {
  std::vector<std::pair<long, long>> runs;
  const long n = static_cast<long>(passing.size());
  long start = 0;
  while (start < n) {
    if (!passing[static_cast<std::size_t>(start)]) {
      ++start;
      continue;
    }
    long end = start;
    while (end < n && passing[static_cast<std::size_t>(end)]) ++end;
    if (end - start >= min_length) runs.emplace_back(start, end);
    start = end;
  }
  return runs;
}

CropWindow compute_crop(std::span<const BBox> boxes, int width, int height, int size) {
  if (width < size || height < size) throw std::invalid_argument("compute_crop: frame smaller than the crop window");
  if (boxes.empty()) throw std::invalid_argument("compute_crop: empty segment");
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const BBox& b : boxes) mean += b.center();
  mean /= static_cast<double>(boxes.size());
  CropWindow w;
  w.size = size;
  w.x0 = std::clamp(static_cast<int>(std::lround(mean.x() * width - size / 2.0)), 0, width - size);
  w.y0 = std::clamp(static_cast<int>(std::lround(mean.y() * height - size / 2.0)), 0, height - size);
  return w;
}

nlohmann::json to_json(const Clip& c) {
  nlohmann::json poses = nlohmann::json::array();
  for (const Pose& p : c.poses) poses.push_back(pose_to_json(p));
  return {{"video_id", c.video_id},
          {"start", c.start},
          {"end", c.end},
          {"stride", c.stride},
          {"crop", {{"x0", c.crop.x0}, {"y0", c.crop.y0}, {"size", c.crop.size}}},
          {"frame_size", {c.frame_width, c.frame_height}},
          {"poses", poses}};
}

Clip clip_from_json(const nlohmann::json& j) {
  Clip c;
  c.video_id = j.at("video_id").get<std::string>();
  c.start = j.at("start").get<long>();
  c.end = j.at("end").get<long>();
  c.stride = j.value("stride", 1);
  c.crop = {j.at("crop").at("x0").get<int>(), j.at("crop").at("y0").get<int>(), j.at("crop").at("size").get<int>()};
  c.frame_width = j.at("frame_size").at(0).get<int>();
  c.frame_height = j.at("frame_size").at(1).get<int>();
  for (const auto& p : j.at("poses")) c.poses.push_back(pose_from_json(p));
  return c;
}

nlohmann::json to_json(const CurationStats& s) {
  return {{"videos", s.videos},
          {"videos_accepted", s.videos_accepted},
          {"rejected_resolution", s.rejected_resolution},
          {"rejected_bitrate", s.rejected_bitrate},
          {"rejected_frame_rate", s.rejected_frame_rate},
          {"frames", s.frames},
          {"frames_no_person", s.frames_no_person},
          {"frames_multi_person", s.frames_multi_person},
          {"frames_weak_detection", s.frames_weak_detection},
          {"frames_no_pose", s.frames_no_pose},
          {"frames_multi_pose", s.frames_multi_pose},
          {"frames_weak_pose", s.frames_weak_pose},
          {"frames_incomplete_pose", s.frames_incomplete_pose},
          {"frames_passed", s.frames_passed},
          {"short_runs", s.short_runs},
          {"clips", s.clips},
          {"clip_frames", s.clip_frames}};
}

namespace {

VideoMeta meta_from_json(const nlohmann::json& j) {
  VideoMeta m;
  m.video_id = j.at("video_id").get<std::string>();
  m.width = j.at("width").get<int>();
  m.height = j.at("height").get<int>();
  m.fps = j.at("fps").get<double>();
  m.total_bits = j.value("total_bits", 0.0);
  if (j.contains("bits_per_pixel")) {
    m.total_bits = j.at("bits_per_pixel").get<double>() * static_cast<double>(j.at("frame_count").get<long>()) *
                   m.width * m.height;
  }
  m.frame_count = j.at("frame_count").get<long>();
  m.pre_extracted = j.value("pre_extracted", false);
  return m;
}

FrameRecord frame_from_json(const nlohmann::json& j) {
  FrameRecord f;
  f.frame = j.at("frame").get<long>();
  for (const auto& d : j.value("detections", nlohmann::json::array())) {
    const auto& b = d.at("bbox");
    f.detections.push_back({{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()},
                            d.at("score").get<double>()});
  }
  for (const auto& p : j.value("poses", nlohmann::json::array())) {
    const auto& kps = p.at("keypoints");
    if (kps.size() != static_cast<std::size_t>(kNumKeypoints)) {
      throw std::invalid_argument("frame " + std::to_string(f.frame) + ".poses: expected 18 keypoints");
    }
    PoseCandidate c;
    for (int k = 0; k < kNumKeypoints; ++k) {
      const auto& kp = kps.at(static_cast<std::size_t>(k));
      c.keypoints(0, k) = kp.at(0).get<double>();
      c.keypoints(1, k) = kp.at(1).get<double>();
      c.scores[static_cast<std::size_t>(k)] = kp.at(2).get<double>();
    }
    f.poses.push_back(c);
  }
  f.validate();
  return f;
}

Pose crop_pose(const PoseCandidate& c, const std::array<bool, kNumKeypoints>& visible, const Clip& clip) {
  Pose p = Pose::invisible(clip.crop.size);
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!visible[static_cast<std::size_t>(k)]) continue;
    const double x = c.keypoints(0, k) * clip.frame_width - 0.5 - clip.crop.x0;
    const double y = c.keypoints(1, k) * clip.frame_height - 0.5 - clip.crop.y0;
    const bool inside = x >= 0 && y >= 0 && x < clip.crop.size && y < clip.crop.size;
    if (inside) p.set(k, x, y, true);
  }
  return p;
}

}  // namespace

std::vector<VideoManifest> read_manifest(std::istream& in) {
  std::map<std::string, VideoManifest> videos;
  std::map<std::string, std::vector<FrameRecord>> orphans;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      const std::string type = j.value("type", "frame");
      if (type == "video") {
        VideoMeta m = meta_from_json(j);
        m.validate();
        videos[m.video_id].meta = m;
      } else if (type == "frame") {
        orphans[j.at("video_id").get<std::string>()].push_back(frame_from_json(j));
      } else {
        throw std::invalid_argument("unknown record type '" + type + "'");
      }
    } catch (const std::exception& e) {
      throw std::invalid_argument("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (auto& [id, frames] : orphans) {
    auto it = videos.find(id);
    if (it == videos.end()) throw std::invalid_argument("manifest: frames for unknown video '" + id + "'");
    it->second.frames = std::move(frames);
  }
  std::vector<VideoManifest> out;
  for (auto& [id, v] : videos) {
    std::stable_sort(v.frames.begin(), v.frames.end(),
                     [](const FrameRecord& a, const FrameRecord& b) { return a.frame < b.frame; });
    out.push_back(std::move(v));
  }
  return out;
}

void write_manifest(std::ostream& out, std::span<const VideoManifest> videos) {
  for (const VideoManifest& v : videos) {
    const VideoMeta& m = v.meta;
    out << nlohmann::json{{"type", "video"},           {"video_id", m.video_id},       {"width", m.width},
                          {"height", m.height},        {"fps", m.fps},                 {"total_bits", m.total_bits},
                          {"frame_count", m.frame_count}, {"pre_extracted", m.pre_extracted}}
               .dump()
        << "\n";
    for (const FrameRecord& f : v.frames) {
      nlohmann::json dets = nlohmann::json::array(), poses = nlohmann::json::array();
      for (const Detection& d : f.detections) {
        dets.push_back({{"bbox", {d.box.x0, d.box.y0, d.box.x1, d.box.y1}}, {"score", d.score}});
      }
      for (const PoseCandidate& c : f.poses) {
        nlohmann::json kps = nlohmann::json::array();
        for (int k = 0; k < kNumKeypoints; ++k) {
          kps.push_back({c.keypoints(0, k), c.keypoints(1, k), c.scores[static_cast<std::size_t>(k)]});
        }
        poses.push_back({{"keypoints", kps}});
      }
      out << nlohmann::json{{"type", "frame"}, {"video_id", m.video_id}, {"frame", f.frame}, {"detections", dets},
                            {"poses", poses}}
                 .dump()
          << "\n";
    }
  }
}

CurationResult curate(std::span<const VideoManifest> videos, const CurationConfig& cfg) {
  cfg.validate();
  std::vector<const VideoManifest*> order;
  for (const VideoManifest& v : videos) order.push_back(&v);
  std::stable_sort(order.begin(), order.end(),
                   [](const VideoManifest* a, const VideoManifest* b) { return a->meta.video_id < b->meta.video_id; });

  CurationResult result;
  CurationStats& st = result.stats;
  for (const VideoManifest* v : order) {
    ++st.videos;
    const QualityResult q = quality_filter(v->meta, cfg);
    switch (q.verdict) {
      case QualityVerdict::kLowResolution: ++st.rejected_resolution; continue;
      case QualityVerdict::kLowBitrate: ++st.rejected_bitrate; continue;
      case QualityVerdict::kFrameRate: ++st.rejected_frame_rate; continue;
      case QualityVerdict::kAccepted: break;
    }
    ++st.videos_accepted;

    // Strided frame t is source frame t * stride.
    std::vector<const FrameRecord*> frames(static_cast<std::size_t>(q.frames_kept), nullptr);
    for (const FrameRecord& f : v->frames) {
      if (f.frame < 0 || f.frame % q.stride != 0) continue;
      const long t = f.frame / q.stride;
      if (t < q.frames_kept) frames[static_cast<std::size_t>(t)] = &f;
    }

    const auto passing = std::make_unique<bool[]>(frames.size());
    std::vector<DetectionResult> dets(frames.size());
    std::vector<PoseResult> poses(frames.size());
    for (std::size_t t = 0; t < frames.size(); ++t) {
      ++st.frames;
      if (frames[t] == nullptr) {
        ++st.frames_no_person;
        continue;
      }
      dets[t] = detection_filter(*frames[t], cfg);
      switch (dets[t].status) {
        case DetectionStatus::kNoPerson: ++st.frames_no_person; continue;
        case DetectionStatus::kMultiPerson: ++st.frames_multi_person; continue;
        case DetectionStatus::kWeak: ++st.frames_weak_detection; continue;
        case DetectionStatus::kSingleOk: break;
      }
      poses[t] = pose_filter(*frames[t], cfg);
      switch (poses[t].status) {
        case PoseStatus::kNoPose: ++st.frames_no_pose; continue;
        case PoseStatus::kMultiPerson: ++st.frames_multi_pose; continue;
        case PoseStatus::kWeak: ++st.frames_weak_pose; continue;
        case PoseStatus::kIncomplete: ++st.frames_incomplete_pose; continue;
        case PoseStatus::kPass: break;
      }
      ++st.frames_passed;
      passing[t] = true;
    }

    // Runs of any length, so short ones can be counted.
    const auto runs = segment_clips(std::span<const bool>(passing.get(), frames.size()), 1);
    for (const auto& [start, end] : runs) {
      if (end - start < cfg.min_clip_length) {
        ++st.short_runs;
        continue;
      }
      Clip clip;
      clip.video_id = v->meta.video_id;
      clip.start = start;
      clip.end = end;
      clip.stride = q.stride;
      clip.frame_width = q.resized_width;
      clip.frame_height = q.resized_height;
      std::vector<BBox> boxes;
      for (long t = start; t < end; ++t) boxes.push_back(*dets[static_cast<std::size_t>(t)].box);
      clip.crop = compute_crop(boxes, q.resized_width, q.resized_height, cfg.crop_size);
      for (long t = start; t < end; ++t) {
        const auto i = static_cast<std::size_t>(t);
        clip.poses.push_back(crop_pose(frames[i]->poses[static_cast<std::size_t>(poses[i].candidate)], poses[i].visible, clip));
      }
      ++st.clips;
      st.clip_frames += clip.length();
      result.clips.push_back(std::move(clip));
    }
  }
  return result;
}

ClipSplit split_clips(std::vector<Clip> clips, std::size_t test_count, std::uint64_t seed, bool by_video) {
  if (test_count > clips.size()) throw std::invalid_argument("split_clips: test_count exceeds the number of clips");
  ClipSplit split;
  std::mt19937_64 rng(seed);
  if (!by_video) {
    std::vector<std::size_t> order(clips.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i < test_count ? split.test : split.train).push_back(std::move(clips[order[i]]));
    }
  } else {
    std::map<std::string, std::vector<Clip>> groups;
    for (Clip& c : clips) groups[c.video_id].push_back(std::move(c));
    std::vector<std::string> ids;
    for (const auto& [id, g] : groups) ids.push_back(id);
    std::shuffle(ids.begin(), ids.end(), rng);
    for (const std::string& id : ids) {
      auto& dst = split.test.size() < test_count ? split.test : split.train;
      for (Clip& c : groups[id]) dst.push_back(std::move(c));
    }
  }
  if (split.train.empty()) split.warnings.push_back("train set is empty");
  return split;
}

std::string to_string(QualityVerdict v) {
  switch (v) {
    case QualityVerdict::kAccepted: return "accepted";
    case QualityVerdict::kLowResolution: return "low_resolution";
    case QualityVerdict::kLowBitrate: return "low_bitrate";
    case QualityVerdict::kFrameRate: return "frame_rate";
  }
  return "?";
}

std::string to_string(DetectionStatus s) {
  switch (s) {
    case DetectionStatus::kNoPerson: return "no_person";
    case DetectionStatus::kMultiPerson: return "multi_person";
    case DetectionStatus::kWeak: return "weak";
    case DetectionStatus::kSingleOk: return "single_ok";
  }
  return "?";
}

std::string to_string(PoseStatus s) {
  switch (s) {
    case PoseStatus::kNoPose: return "no_pose";
    case PoseStatus::kMultiPerson: return "multi_person";
    case PoseStatus::kWeak: return "weak";
    case PoseStatus::kIncomplete: return "incomplete";
    case PoseStatus::kPass: return "pass";
  }
  return "?";
}

}  // namespace posegan
