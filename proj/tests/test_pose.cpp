// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "posegan/pose.hpp"
#include "test_util.hpp"

using namespace posegan;
using posegan::testing::random_pose;

namespace {

// Direct evaluation of the kernel at one grid cell.
double kernel_oracle(const Pose& p, int k, int R, int y, int x) {
  if (!p.visible(k)) return 0.0;
  const double s = static_cast<double>(R) / p.reference_resolution;
  const double px = (p.keypoints(0, k) + 0.5) * s;
  const double py = (p.keypoints(1, k) + 0.5) * s;
  const double dx = (x + 0.5) - px, dy = (y + 0.5) - py;
  const double sigma2 = std::max(0.5, 0.005 * R * R);
  return std::exp(-(dx * dx + dy * dy) / (2 * sigma2));
}

}  // namespace

TEST_CASE("heatmap kernel variance") {
  CHECK(heatmap_sigma2(128) == doctest::Approx(81.92).epsilon(1e-15));
  CHECK(heatmap_sigma2(8) == 0.5);
  CHECK(heatmap_sigma2(4) == 0.5);
}

TEST_CASE("heatmaps match direct kernel evaluation") {
  Rng rng(1);
  for (int trial = 0; trial < 60; ++trial) {
    const int R = rng.uniform_int(1, 40);
    const int ref = rng.uniform_int(8, 300);
    const Pose p = random_pose(rng, ref, 0.7);
    const HeatmapStack h = render_heatmaps(p, R);
    REQUIRE(h.resolution == R);
    REQUIRE(h.data.rows() == R * R);
    REQUIRE(h.data.cols() == kNumKeypoints);
    double worst = 0.0;
    for (int k = 0; k < kNumKeypoints; ++k) {
      for (int y = 0; y < R; ++y) {
        for (int x = 0; x < R; ++x) worst = std::max(worst, std::abs(h.at(k, y, x) - kernel_oracle(p, k, R, y, x)));
      }
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("heatmap edge cases") {
  const Pose none = Pose::invisible(64);
  CHECK(render_heatmaps(none, 16).data.isZero(0.0));
  CHECK_THROWS_AS(render_heatmaps(none, 0), std::invalid_argument);
  CHECK_THROWS_AS(render_heatmaps(none, -3), std::invalid_argument);

  Pose p = Pose::invisible(16);
  p.set(kNose, 5, 7);
  const HeatmapStack h = render_heatmaps(p, 16);
  CHECK(h.at(kNose, 7, 5) == 1.0);
  CHECK(h.data.col(kNose).maxCoeff() == 1.0);
  CHECK(h.data.col(kNeck).isZero(0.0));
  const HeatmapStack again = render_heatmaps(p, 16);
  CHECK((h.data.array() == again.data.array()).all());
}

TEST_CASE("heatmap values decay monotonically away from the keypoint") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int R = 32;
    Pose p = Pose::invisible(R);
    p.set(kNeck, rng.uniform_int(0, R - 1), rng.uniform_int(0, R - 1));
    const HeatmapStack h = render_heatmaps(p, R);
    const int cx = static_cast<int>(p.keypoints(0, kNeck)), cy = static_cast<int>(p.keypoints(1, kNeck));
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        double prev = h.at(kNeck, cy, cx);
        for (int step = 1;; ++step) {
          const int x = cx + step * dx, y = cy + step * dy;
          if (x < 0 || y < 0 || x >= R || y >= R) break;
          CHECK(h.at(kNeck, y, x) <= prev);
          prev = h.at(kNeck, y, x);
        }
      }
    }
  }
}

TEST_CASE("pyramid renders each scale independently") {
  Rng rng(2);
  const Pose p = random_pose(rng, 128);
  const std::array<int, 3> res{4, 8, 16};
  const auto pyr = render_pyramid(p, res);
  REQUIRE(pyr.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(pyr[i].resolution == res[i]);
    CHECK((pyr[i].data.array() == render_heatmaps(p, res[i]).data.array()).all());
  }
  for (const auto& h : render_pyramid(Pose::invisible(128), res)) CHECK(h.data.isZero(0.0));
  CHECK_THROWS_AS(render_pyramid(p, std::span<const int>{}), std::invalid_argument);
  const std::array<int, 2> bad{8, 8};
  CHECK_THROWS_AS(render_pyramid(p, bad), std::invalid_argument);
}

TEST_CASE("flatten_pose layout") {
  CHECK(flatten_pose(Pose::invisible(128)).isZero(0.0));
  CHECK(flatten_pose(Pose::invisible(128)).size() == 54);
  Pose p = Pose::invisible(128);
  p.set(kRWrist, 64, 64);
  p.set(kLWrist, 50, 50, false);
  const Eigen::VectorXd f = flatten_pose(p);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(54);
  expected[2 * kRWrist] = 0.5;
  expected[2 * kRWrist + 1] = 0.5;
  expected[36 + kRWrist] = 1.0;
  CHECK((f.array() == expected.array()).all());
}

TEST_CASE("pose validation") {
  Pose p = Pose::invisible(32);
  p.set(kNose, 31.9, 0.0);
  CHECK_NOTHROW(p.validate());
  p.set(kNeck, 32.0, 5.0);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.set(kNeck, 32.0, 5.0, false);
  CHECK_NOTHROW(p.validate());
  p.reference_resolution = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("horizontal flip maps x to S-1-x and swaps sides") {
  Pose p = Pose::invisible(128);
  p.set(kRShoulder, 10, 40);
  p.set(kLShoulder, 30, 41);
  p.set(kNose, 20, 20);
  SpatialTransform t;
  t.horizontal_flip = true;
  const Pose q = transform_pose(p, t, 128);
  CHECK(q.keypoints(0, kLShoulder) == 117.0);
  CHECK(q.keypoints(1, kLShoulder) == 40.0);
  CHECK(q.keypoints(0, kRShoulder) == 97.0);
  CHECK(q.keypoints(0, kNose) == 107.0);
  CHECK(q.visible(kLShoulder));
  CHECK(!q.visible(kRElbow));
}

TEST_CASE("flip marker test") {
  // A single bright pixel at each keypoint; mirroring the image columns must
  // land every marker on the transformed keypoint.
  Rng rng(12);
  const int S = 128;
  SpatialTransform t;
  t.horizontal_flip = true;
  for (int trial = 0; trial < 50; ++trial) {
    Pose p = Pose::invisible(S);
    for (int k = 0; k < kNumKeypoints; ++k) p.set(k, rng.uniform_int(0, S - 1), rng.uniform_int(0, S - 1));
    const Pose q = transform_pose(p, t, S);
    for (int k = 0; k < kNumKeypoints; ++k) {
      Eigen::MatrixXd marker = Eigen::MatrixXd::Zero(S, S);
      marker(static_cast<int>(p.keypoints(1, k)), static_cast<int>(p.keypoints(0, k))) = 1.0;
      const Eigen::MatrixXd flipped = marker.rowwise().reverse();
      Eigen::Index r = 0, c = 0;
      flipped.maxCoeff(&r, &c);
      const int j = flip_partner(k);
      CHECK(q.visible(j));
      CHECK(q.keypoints(0, j) == static_cast<double>(c));
      CHECK(q.keypoints(1, j) == static_cast<double>(r));
    }
  }
}

TEST_CASE("flip is an involution and commutes with rendering") {
  Rng rng(3);
  SpatialTransform t;
  t.horizontal_flip = true;
  for (int trial = 0; trial < 50; ++trial) {
    const int R = 1 << rng.uniform_int(2, 6);
    const Pose p = random_pose(rng, R, 0.8);
    const Pose back = transform_pose(transform_pose(p, t, R), t, R);
    CHECK(back.visibility == p.visibility);
    for (int k = 0; k < kNumKeypoints; ++k) {
      if (p.visible(k)) CHECK((back.point(k) - p.point(k)).norm() < 1e-12);
    }
    const HeatmapStack a = render_heatmaps(transform_pose(p, t, R), R);
    const HeatmapStack b = render_heatmaps(p, R);
    double worst = 0.0;
    for (int k = 0; k < kNumKeypoints; ++k) {
      for (int y = 0; y < R; ++y) {
        for (int x = 0; x < R; ++x) worst = std::max(worst, std::abs(a.at(flip_partner(k), y, x) - b.at(k, y, R - 1 - x)));
      }
    }
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("transform edge cases") {
  Rng rng(5);
  const Pose p = random_pose(rng, 64);
  CHECK(transform_pose(p, SpatialTransform{}, 64) == p);
  SpatialTransform cut;
  cut.cutout = Cutout{};
  CHECK(transform_pose(p, cut, 64) == p);

  Pose corner = Pose::invisible(64);
  corner.set(kNose, 1, 1);
  corner.set(kNeck, 32, 32);
  SpatialTransform zoom;
  zoom.scale = 2.0;
  const Pose q = transform_pose(corner, zoom, 64);
  CHECK(!q.visible(kNose));
  CHECK(q.visible(kNeck));

  SpatialTransform shift;
  shift.translation = {0.25, -0.125};
  const Eigen::Vector2d moved = transform_point({10, 20}, shift, 64);
  CHECK(moved.x() == doctest::Approx(26));
  CHECK(moved.y() == doctest::Approx(12));
  const Eigen::Vector2d back = inverse_transform_point(moved, shift, 64);
  CHECK(back.x() == doctest::Approx(10));
  CHECK(back.y() == doctest::Approx(20));

  for (int trial = 0; trial < 100; ++trial) {
    SpatialTransform t;
    t.horizontal_flip = rng.bernoulli(0.5);
    t.scale = rng.uniform(0.8, 1.25);
    t.translation = {rng.uniform(-0.125, 0.125), rng.uniform(-0.125, 0.125)};
    const Eigen::Vector2d x(rng.uniform(0, 64), rng.uniform(0, 64));
    CHECK((inverse_transform_point(transform_point(x, t, 64), t, 64) - x).norm() < 1e-9);
  }
}

TEST_CASE("transform_pose rescales to the frame size") {
  Pose p = Pose::invisible(256);
  p.set(kNeck, 127.5, 63.5);
  const Pose q = transform_pose(p, SpatialTransform{}, 32);
  CHECK(q.reference_resolution == 32);
  CHECK(q.keypoints(0, kNeck) == doctest::Approx(15.5));
  CHECK(q.keypoints(1, kNeck) == doctest::Approx(7.5));
}

TEST_CASE("pose json round trip") {
  Rng rng(7);
  const Pose p = random_pose(rng, 256, 0.5);
  const Pose q = pose_from_json(pose_to_json(p));
  CHECK(q == p);
  CHECK(q.reference_resolution == 256);
  nlohmann::json bad = pose_to_json(p);
  bad["keypoints"].erase(0);
  CHECK_THROWS(pose_from_json(bad));
}

TEST_CASE("keypoint metadata") {
  CHECK(keypoint_name(kNose) == "nose");
  CHECK(flip_partner(kRShoulder) == kLShoulder);
  CHECK(flip_partner(kLEar) == kREar);
  CHECK(flip_partner(kNeck) == kNeck);
  for (int k = 0; k < kNumKeypoints; ++k) CHECK(flip_partner(flip_partner(k)) == k);
  int face = 0;
  for (int k = 0; k < kNumKeypoints; ++k) face += is_face_keypoint(k) ? 1 : 0;
  CHECK(face == 4);
}
