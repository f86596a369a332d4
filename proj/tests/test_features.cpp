// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "posegan/features.hpp"
#include "test_util.hpp"

using namespace posegan;

namespace {

FeatureMap<double> random_image(Rng& rng, int size) {
  FeatureMap<double> img(3, size, size);
  for (Eigen::Index i = 0; i < img.data.size(); ++i) img.data.data()[i] = rng.uniform(-1.0, 1.0);
  return img;
}

}  // namespace

TEST_CASE("embedder features are deterministic") {
  Rng rng(2);
  const FeatureMap<double> img = random_image(rng, 32);
  const ConvEmbedder<double> a(5, 32), b(5, 32), c(6, 32);
  CHECK(a.feature_dim() == 2 * (16 + 32 + 64));
  const Eigen::VectorXd fa = a.features(img);
  CHECK(fa.size() == a.feature_dim());
  CHECK(fa == b.features(img));
  CHECK(fa != c.features(img));
  CHECK(fa.allFinite());
}

TEST_CASE("perceptual distance is zero to itself and positive otherwise") {
  Rng rng(4);
  const ConvEmbedder<double> e(1, 16, {4, 8});
  const FeatureMap<double> x = random_image(rng, 16), y = random_image(rng, 16);
  CHECK(e.perceptual(x, e.target(x)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(e.perceptual(x, e.target(y)) > 0.01);
}

TEST_CASE("perceptual gradient matches finite differences") {
  Rng rng(8);
  const ConvEmbedder<double> e(1, 16, {4, 8});
  for (const int size : {16, 24}) {
    FeatureMap<double> x = random_image(rng, size);
    const auto target = e.target(random_image(rng, size));
    FeatureMap<double> g;
    e.perceptual(x, target, &g);
    REQUIRE(g.height == size);
    REQUIRE(g.channels() == 3);
    for (int t = 0; t < 12; ++t) {
      const Eigen::Index i = rng.uniform_int(0, static_cast<int>(x.data.size()) - 1);
      double& v = x.data.data()[i];
      const double fd = posegan::testing::central_difference([&] { return e.perceptual(x, target); }, v, 1e-5);
      CHECK(posegan::testing::rel_err(fd, g.data.data()[i]) < 1e-4);
    }
  }
}
