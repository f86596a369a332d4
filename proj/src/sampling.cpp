// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include "posegan/sampling.hpp"

#include <string>

namespace posegan {

Eigen::VectorXd sample_noise(std::uint64_t seed, std::size_t pose_index, std::size_t index, int z_dim) {
  Rng rng = Rng::substream(seed, "sample/" + std::to_string(pose_index) + "/" + std::to_string(index));
  return rng.normal_vector<double>(z_dim);
}

Eigen::VectorXd map_latent(const Generator<float>& G, const Eigen::VectorXd& z, const Pose& pose) {
  return G.map(z.cast<float>(), pose).cast<double>();
}

Eigen::VectorXd generator_conditional_mean(const Generator<float>& G, const Pose& pose, int n, std::uint64_t seed) {
  return conditional_mean([&](const Eigen::VectorXd& z) { return map_latent(G, z, pose); }, G.config().z_dim, n,
                          seed);
}

Eigen::VectorXd generator_unconditional_mean(const Generator<float>& G, std::span<const Pose> poses, int n,
                                             std::uint64_t seed) {
  return unconditional_mean([&](const Eigen::VectorXd& z, const Pose& p) { return map_latent(G, z, p); }, poses,
                            G.config().z_dim, n, seed);
}

FeatureMap<float> render_latent(const Generator<float>& G, const Eigen::VectorXd& w, const Pose& pose,
                                bool with_human) {
  const auto pyr = with_human ? G.pyramid(pose) : G.zero_pyramid();
  return G.generate(w.cast<float>(), pyr);
}

std::vector<PoseSample> sample_pose(const Generator<float>& G, const Pose& pose, std::size_t pose_index,
                                    const SampleConfig& cfg, MeanCache* cache) {
  if (cfg.n < 0) throw std::invalid_argument("sample.n: must be non-negative");
  std::vector<PoseSample> out;
  if (cfg.n == 0) return out;
  const auto compute = [&] { return generator_conditional_mean(G, pose, cfg.mean_samples, cfg.seed); };
  const Eigen::VectorXd mean = cache != nullptr ? cache->get_or_compute(pose, compute) : compute();
  const auto pyr = G.pyramid(pose);
  const auto zero = G.zero_pyramid();
  for (int i = 0; i < cfg.n; ++i) {
    const Eigen::VectorXd z = sample_noise(cfg.seed, pose_index, static_cast<std::size_t>(i), G.config().z_dim);
    PoseSample s;
    s.w = truncate(map_latent(G, z, pose), mean, cfg.psi);
    const Vec<float> wf = s.w.cast<float>();
    s.image = G.generate(wf, pyr);
    if (cfg.without_human) s.scene = G.generate(wf, zero);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace posegan
