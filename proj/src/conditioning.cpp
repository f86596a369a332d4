// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include "posegan/conditioning.hpp"

#include <cmath>
#include <cstdio>
#include <mutex>
#include <stdexcept>

#include "posegan/rng.hpp"

namespace posegan {

std::string to_string(PoseConditioning c) {
  switch (c) {
    case PoseConditioning::kLatentOnly:
      return "latent";
    case PoseConditioning::kHeatmapOnly:
      return "heatmap";
    case PoseConditioning::kDual:
      return "dual";
  }
  return "dual";
}

PoseConditioning conditioning_from_string(const std::string& s) {
  if (s == "latent") return PoseConditioning::kLatentOnly;
  if (s == "heatmap") return PoseConditioning::kHeatmapOnly;
  if (s == "dual") return PoseConditioning::kDual;
  throw std::invalid_argument("unknown conditioning mode: " + s);
}

Eigen::VectorXd conditional_mean(const LatentSampler& map_z, int z_dim, int n, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("conditional_mean: sample count must be positive");
  Rng rng(seed);
  Eigen::VectorXd sum;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd z = rng.normal_vector<double>(z_dim);
    Eigen::VectorXd w = map_z(z);
    if (i == 0) {
      sum = std::move(w);
    } else {
      sum += w;
    }
  }
  return sum / static_cast<double>(n);
}

Eigen::VectorXd unconditional_mean(const std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Pose&)>& map,
                                   std::span<const Pose> poses, int z_dim, int n, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("unconditional_mean: sample count must be positive");
  if (poses.empty()) throw std::invalid_argument("unconditional_mean: no poses");
  Rng rng(seed);
  Eigen::VectorXd sum;
  for (int i = 0; i < n; ++i) {
    const Pose& pose = poses[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(poses.size()) - 1))];
    const Eigen::VectorXd z = rng.normal_vector<double>(z_dim);
    Eigen::VectorXd w = map(z, pose);
    if (i == 0) {
      sum = std::move(w);
    } else {
      sum += w;
    }
  }
  return sum / static_cast<double>(n);
}

std::uint64_t pose_hash(const Pose& pose) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::int64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= static_cast<std::uint64_t>(v >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(pose.reference_resolution);
  for (int k = 0; k < kNumKeypoints; ++k) {
    mix(pose.visible(k) ? 1 : 0);
    if (!pose.visible(k)) continue;
    mix(std::llround(pose.keypoints(0, k) * 8.0));
    mix(std::llround(pose.keypoints(1, k) * 8.0));
  }
  return h;
}

std::optional<Eigen::VectorXd> MeanCache::find(std::uint64_t key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void MeanCache::insert(std::uint64_t key, Eigen::VectorXd mean) {
  std::unique_lock lock(mutex_);
  entries_[key] = std::move(mean);
}

Eigen::VectorXd MeanCache::get_or_compute(const Pose& pose, const std::function<Eigen::VectorXd()>& compute) {
  const std::uint64_t key = pose_hash(pose);
  if (auto hit = find(key)) return *hit;
  Eigen::VectorXd mean = compute();
  insert(key, mean);
  return mean;
}

std::size_t MeanCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

nlohmann::json MeanCache::to_json() const {
  std::shared_lock lock(mutex_);
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [key, mean] : entries_) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(key));
    entries[buf] = std::vector<double>(mean.data(), mean.data() + mean.size());
  }
  return {{"version", 1}, {"entries", entries}};
}

MeanCache MeanCache::from_json(const nlohmann::json& j) {
  if (j.value("version", 0) != 1) throw std::invalid_argument("mean cache: unsupported version");
  MeanCache cache;
  for (const auto& [key, values] : j.at("entries").items()) {
    const auto v = values.get<std::vector<double>>();
    cache.entries_[std::stoull(key, nullptr, 16)] = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return cache;
}

}  // namespace posegan
