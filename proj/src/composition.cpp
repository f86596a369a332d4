// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include "posegan/composition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "posegan/sampling.hpp"

namespace posegan {

namespace {

std::vector<Vec<float>> to_float(const PerScaleLatent& l) {
  std::vector<Vec<float>> out;
  for (const auto& w : l.ws) out.push_back(w.cast<float>());
  return out;
}

}  // namespace

PerScaleLatent PerScaleLatent::broadcast(const Eigen::VectorXd& w, int num_scales) {
  return {std::vector<Eigen::VectorXd>(static_cast<std::size_t>(num_scales), w)};
}

void PerScaleLatent::validate(const GeneratorConfig& cfg) const {
  if (static_cast<int>(ws.size()) != cfg.num_scales()) {
    throw std::invalid_argument("latent: expected " + std::to_string(cfg.num_scales()) + " scales, got " +
                                std::to_string(ws.size()));
  }
  for (const auto& w : ws) {
    if (w.size() != cfg.w_dim) throw std::invalid_argument("latent: entry dimension differs from w_dim");
    if (!w.allFinite()) throw std::invalid_argument("latent: non-finite entry");
  }
}

nlohmann::json to_json(const PerScaleLatent& l) {
  nlohmann::json ws = nlohmann::json::array();
  for (const auto& w : l.ws) ws.push_back(std::vector<double>(w.data(), w.data() + w.size()));
  return {{"ws", ws}};
}

PerScaleLatent per_scale_latent_from_json(const nlohmann::json& j) {
  PerScaleLatent l;
  for (const auto& w : j.at("ws")) {
    const auto v = w.get<std::vector<double>>();
    l.ws.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return l;
}

FeatureMap<float> render(const Generator<float>& G, const PerScaleLatent& w, const Pose& pose) {
  w.validate(G.config());
  const auto ws = to_float(w);
  return G.synthesize(ws, G.pyramid(pose));
}

FeatureMap<float> render_scene_only(const Generator<float>& G, const PerScaleLatent& w) {
  w.validate(G.config());
  const auto ws = to_float(w);
  return G.synthesize(ws, G.zero_pyramid());
}

FeatureMap<float> render_subject_only(const Generator<float>& G, const PerScaleLatent& w, const Pose& pose) {
  w.validate(G.config());
  const auto ws = to_float(w);
  return G.synthesize(ws, G.pyramid(pose), SynthesisOptions{true});
}

CropRect person_crop(const Pose& pose, int image_size, double margin) {
  if (image_size <= 0) throw std::invalid_argument("person_crop: image size must be positive");
  if (margin < 0) throw std::invalid_argument("person_crop: margin must be non-negative");
  const double s = static_cast<double>(image_size) / pose.reference_resolution;
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!pose.visible(k)) continue;
    const double x = (pose.keypoints(0, k) + 0.5) * s, y = (pose.keypoints(1, k) + 0.5) * s;
    x0 = std::min(x0, x);
    y0 = std::min(y0, y);
    x1 = std::max(x1, x);
    y1 = std::max(y1, y);
  }
  if (!(x0 <= x1)) throw std::invalid_argument("person_crop: pose has no visible keypoints");
  const double m = margin * image_size, r = image_size;
  return {std::clamp(x0 - m, 0.0, r), std::clamp(y0 - m, 0.0, r), std::clamp(x1 + m, 0.0, r),
          std::clamp(y1 + m, 0.0, r)};
}

Resampler crop_resampler(const CropRect& rect, int image_size, int size) {
  const double sx = rect.width() / size, sy = rect.height() / size;
  return Resampler::bilinear(image_size, image_size, size, size, [&](double x, double y) {
    return std::pair<double, double>(rect.x0 + x * sx, rect.y0 + y * sy);
  });
}

void ComposeConfig::validate() const {
  if (steps < 0) throw std::invalid_argument("compose.steps: must be non-negative");
  if (!(learning_rate > 0)) throw std::invalid_argument("compose.learning_rate: must be positive");
  if (beta1 < 0 || beta1 >= 1) throw std::invalid_argument("compose.beta1: must be in [0, 1)");
  if (beta2 < 0 || beta2 >= 1) throw std::invalid_argument("compose.beta2: must be in [0, 1)");
  if (!(epsilon > 0)) throw std::invalid_argument("compose.epsilon: must be positive");
  if (margin < 0) throw std::invalid_argument("compose.margin: must be non-negative");
  if (crop_size < 8) throw std::invalid_argument("compose.crop_size: must be at least 8");
}

nlohmann::json to_json(const ComposeConfig& c) {
  return {{"steps", c.steps}, {"learning_rate", c.learning_rate}, {"beta1", c.beta1}, {"beta2", c.beta2},
          {"epsilon", c.epsilon}, {"margin", c.margin}, {"crop_size", c.crop_size}};
}

ComposeConfig compose_config_from_json(const nlohmann::json& j) {
  ComposeConfig c;
  c.steps = j.value("steps", c.steps);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.margin = j.value("margin", c.margin);
  c.crop_size = j.value("crop_size", c.crop_size);
  c.validate();
  return c;
}

CompositionObjective::CompositionObjective(const Generator<float>& G, const ConvEmbedder<float>& embed,
                                           const PerScaleLatent& person, const PerScaleLatent& scene,
                                           const Pose& pose, const ComposeConfig& cfg)
    : G_(&G),
      embed_(&embed),
      pose_(pose),
      pyramid_(G.pyramid(pose)),
      zero_(G.zero_pyramid()),
      crop_(crop_resampler(person_crop(pose, G.config().resolution, cfg.margin), G.config().resolution,
                           cfg.crop_size)) {
  cfg.validate();
  person_target_ = embed.target(crop_.apply(render_subject_only(G, person, pose)));
  scene_target_ = embed.target(render_scene_only(G, scene));
}

double CompositionObjective::term(const PerScaleLatent& w, bool subject, std::vector<Eigen::VectorXd>* grad) const {
  const auto ws = to_float(w);
  SynthesisTape<float> tape;
  const FeatureMap<float> img =
      G_->synthesize(ws, subject ? pyramid_ : zero_, SynthesisOptions{subject}, grad != nullptr ? &tape : nullptr);
  FeatureMap<float> g;
  double loss = 0.0;
  if (subject) {
    loss = embed_->perceptual(crop_.apply(img), person_target_, grad != nullptr ? &g : nullptr);
    if (grad != nullptr) g = crop_.apply_transpose(g);
  } else {
    loss = embed_->perceptual(img, scene_target_, grad != nullptr ? &g : nullptr);
  }
  if (grad != nullptr) {
    const auto gws = G_->synthesize_backward(tape, g, nullptr);
    for (std::size_t s = 0; s < gws.size(); ++s) (*grad)[s] += gws[s].cast<double>();
  }
  return loss;
}

double CompositionObjective::evaluate(const PerScaleLatent& w, std::vector<Eigen::VectorXd>* grad) const {
  w.validate(G_->config());
  if (grad != nullptr) {
    grad->assign(w.ws.size(), Eigen::VectorXd::Zero(G_->config().w_dim));
  }
  return term(w, true, grad) + term(w, false, grad);
}

ComposeResult compose(const Generator<float>& G, const ConvEmbedder<float>& embed, const PerScaleLatent& person,
                      const PerScaleLatent& scene, const Pose& pose, const ComposeConfig& cfg,
                      const std::function<void(int, double)>& progress) {
  person.validate(G.config());
  scene.validate(G.config());
  const CompositionObjective objective(G, embed, person, scene, pose, cfg);
  ComposeResult r;
  r.latent = scene;
  std::vector<Eigen::VectorXd> m(scene.ws.size(), Eigen::VectorXd::Zero(G.config().w_dim)), v = m, grad;
  for (int t = 0; t <= cfg.steps; ++t) {
    const bool last = t == cfg.steps;
    const double loss = objective.evaluate(r.latent, last ? nullptr : &grad);
    if (!std::isfinite(loss)) throw std::runtime_error("compose: non-finite loss at step " + std::to_string(t));
    r.losses.push_back(loss);
    if (progress) progress(t, loss);
    if (last) break;
    const double c1 = 1.0 - std::pow(cfg.beta1, t + 1), c2 = 1.0 - std::pow(cfg.beta2, t + 1);
    for (std::size_t s = 0; s < grad.size(); ++s) {
      m[s] = cfg.beta1 * m[s] + (1 - cfg.beta1) * grad[s];
      v[s] = cfg.beta2 * v[s] + (1 - cfg.beta2) * grad[s].cwiseProduct(grad[s]);
      r.latent.ws[s].array() -=
          cfg.learning_rate * (m[s].array() / c1) / ((v[s].array() / c2).sqrt() + cfg.epsilon);
    }
  }
  r.image = render(G, r.latent, pose);
  return r;
}

std::vector<FeatureMap<float>> animate_latent(const Generator<float>& G, const Eigen::VectorXd& w,
                                              const std::vector<Pose>& poses) {
  if (poses.empty()) throw std::invalid_argument("animate: empty pose sequence");
  const Vec<float> wf = w.cast<float>();
  std::vector<FeatureMap<float>> frames;
  frames.reserve(poses.size());
  for (const Pose& p : poses) frames.push_back(G.generate(wf, G.pyramid(p)));
  return frames;
}

std::vector<FeatureMap<float>> animate(const Generator<float>& G, const Eigen::VectorXd& z,
                                       const std::vector<Pose>& poses) {
  if (poses.empty()) throw std::invalid_argument("animate: empty pose sequence");
  return animate_latent(G, map_latent(G, z, poses.front()), poses);
}

}  // namespace posegan
