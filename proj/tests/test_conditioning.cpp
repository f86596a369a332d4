// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <thread>

#include "doctest.h"
#include "posegan/conditioning.hpp"
#include "test_util.hpp"

using namespace posegan;
using posegan::testing::random_pose;

namespace {

struct Mapping {
  ParamSet<double> params;
  MappingNetwork net;

  explicit Mapping(MappingConfig cfg = {}, std::uint64_t seed = 1) {
    net = MappingNetwork(cfg, params, "mapping");
    Rng rng(seed);
    net.init(params, rng);
  }
};

}  // namespace

TEST_CASE("pose embedding is a linear 512-dim projection") {
  Mapping m;
  Rng rng(3);
  const Pose p = random_pose(rng, 256, 0.6);
  const Vec<double> e = m.net.embed_pose(m.params, p);
  CHECK(e.size() == 512);

  // Linearity in the flattened vector, checked on the raw projection.
  const int weight = m.params.index("mapping.embed.weight");
  const Mat<double> P = Mat<double>(m.params.view(weight)) / std::sqrt(54.0);
  const Eigen::VectorXd f = flatten_pose(p);
  CHECK((P * f - e).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((P * (2.5 * f) - 2.5 * e).cwiseAbs().maxCoeff() < 1e-12);

  m.params[weight].setZero();
  CHECK(m.net.embed_pose(m.params, p).isZero(0.0));
}

TEST_CASE("mapping is deterministic and noise-dependent") {
  Mapping m;
  Rng rng(4);
  const Pose p = random_pose(rng, 256);
  const Vec<double> z = rng.normal_vector<double>(512);
  const Vec<double> a = m.net.forward(m.params, z, p);
  const Vec<double> b = m.net.forward(m.params, z, p);
  CHECK(a.size() == 512);
  CHECK((a.array() == b.array()).all());
  for (int i = 0; i < 100; ++i) {
    const Vec<double> w1 = m.net.forward(m.params, rng.normal_vector<double>(512), p);
    const Vec<double> w2 = m.net.forward(m.params, rng.normal_vector<double>(512), p);
    CHECK((w1 - w2).norm() > 0.0);
  }
  CHECK_THROWS_AS(m.net.forward(m.params, Vec<double>(Vec<double>::Zero(511)), p), std::invalid_argument);
}

TEST_CASE("conditional mean") {
  MappingConfig cfg;
  cfg.z_dim = 16;
  cfg.embed_dim = 16;
  cfg.hidden_dim = 16;
  cfg.out_dim = 16;
  cfg.num_layers = 3;
  Mapping m(cfg);
  Rng rng(8);
  const Pose p = random_pose(rng, 64);
  const Pose q = random_pose(rng, 64);
  auto sampler = [&](const Pose& pose) {
    return LatentSampler([&m, &pose](const Eigen::VectorXd& z) { return m.net.forward(m.params, z, pose); });
  };

  // n = 1 reproduces the single draw.
  Rng replay(77);
  const Eigen::VectorXd z0 = replay.normal_vector<double>(16);
  CHECK((conditional_mean(sampler(p), 16, 1, 77) - m.net.forward(m.params, z0, p)).norm() == 0.0);
  CHECK_THROWS_AS(conditional_mean(sampler(p), 16, 0, 1), std::invalid_argument);

  const Eigen::VectorXd mp = conditional_mean(sampler(p), 16, 200, 5);
  const Eigen::VectorXd mq = conditional_mean(sampler(q), 16, 200, 5);
  CHECK((mp - mq).norm() > 0.0);
  CHECK((mp - conditional_mean(sampler(p), 16, 200, 5)).norm() == 0.0);
}

TEST_CASE("conditional mean of an identity map shrinks at the standard-error rate") {
  const int w_dim = 512, n = 10000;
  const LatentSampler identity = [](const Eigen::VectorXd& z) { return z; };
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double norm = conditional_mean(identity, w_dim, n, seed).norm();
    CHECK(norm < 4.0 * std::sqrt(static_cast<double>(w_dim) / n));
  }
}

TEST_CASE("truncation algebra") {
  Eigen::Vector2d w(3, 5), mean(1, 1);
  CHECK((truncate(w, mean, 0.5) - Eigen::Vector2d(2, 3)).norm() < 1e-12);
  CHECK((truncate(w, mean, 1.0) - w).norm() == 0.0);
  CHECK((truncate(w, mean, 0.0) - mean).norm() == 0.0);
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd a = rng.normal_vector<double>(32), m = rng.normal_vector<double>(32);
    const double p1 = rng.uniform(-1, 2), p2 = rng.uniform(-1, 2);
    CHECK((truncate(truncate(a, m, p1), m, p2) - truncate(a, m, p1 * p2)).norm() < 1e-12);
    CHECK((truncate(m, m, p1) - m).norm() == 0.0);
  }
  CHECK_THROWS_AS(truncate(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(4), 0.5), std::invalid_argument);
}

TEST_CASE("unconditional mean averages over poses") {
  Rng rng(2);
  std::vector<Pose> poses{random_pose(rng, 64), random_pose(rng, 64)};
  auto map = [](const Eigen::VectorXd& z, const Pose& p) {
    Eigen::VectorXd w = z;
    w[0] = p.keypoints(0, 0);
    return w;
  };
  const Eigen::VectorXd mean = unconditional_mean(map, poses, 4, 4000, 3);
  const double lo = std::min(poses[0].keypoints(0, 0), poses[1].keypoints(0, 0));
  const double hi = std::max(poses[0].keypoints(0, 0), poses[1].keypoints(0, 0));
  CHECK(mean[0] > lo);
  CHECK(mean[0] < hi);
  CHECK(std::abs(mean[1]) < 0.1);
  CHECK_THROWS_AS(unconditional_mean(map, std::span<const Pose>{}, 4, 10, 1), std::invalid_argument);
}

TEST_CASE("mean cache") {
  Rng rng(9);
  const Pose p = random_pose(rng, 256);
  Pose jitter = p;
  jitter.keypoints(0, 3) += 1e-3;
  CHECK(pose_hash(p) == pose_hash(jitter));
  Pose moved = p;
  moved.keypoints(0, 3) += 1.0;
  CHECK(pose_hash(p) != pose_hash(moved));

  MeanCache cache;
  int calls = 0;
  auto compute = [&] {
    ++calls;
    return Eigen::VectorXd::Constant(4, 2.0);
  };
  cache.get_or_compute(p, compute);
  cache.get_or_compute(jitter, compute);
  CHECK(calls == 1);
  cache.get_or_compute(moved, compute);
  CHECK(calls == 2);
  CHECK(cache.size() == 2);

  const MeanCache restored = MeanCache::from_json(cache.to_json());
  CHECK(restored.size() == 2);
  CHECK((*restored.find(pose_hash(p)) - Eigen::VectorXd::Constant(4, 2.0)).norm() == 0.0);

  std::vector<std::thread> readers;
  for (int t = 0; t < 4; ++t) {
    readers.emplace_back([&] {
      for (int i = 0; i < 1000; ++i) CHECK(cache.find(pose_hash(p)).has_value());
    });
  }
  for (auto& r : readers) r.join();
}

TEST_CASE("conditioning modes") {
  CHECK(conditioning_from_string("dual") == PoseConditioning::kDual);
  CHECK(to_string(PoseConditioning::kLatentOnly) == "latent");
  CHECK(uses_heatmaps(PoseConditioning::kHeatmapOnly));
  CHECK(!uses_pose_latent(PoseConditioning::kHeatmapOnly));
  CHECK(!uses_heatmaps(PoseConditioning::kLatentOnly));
  CHECK_THROWS_AS(conditioning_from_string("both"), std::invalid_argument);
}
