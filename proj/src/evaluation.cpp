// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include "posegan/evaluation.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "posegan/sampling.hpp"

namespace posegan {

std::optional<double> head_size(const Pose& pose) {
  if (!pose.visible(kNose) || !pose.visible(kNeck)) return std::nullopt;
  return (pose.point(kNose) - pose.point(kNeck)).norm();
}

namespace {

/// Correct and evaluated keypoint counts for one frame; nullopt when the
/// frame is excluded.
std::optional<std::pair<int, int>> frame_counts(const Pose& pred, const Pose& ref, double alpha) {
  const auto head = head_size(ref);
  if (!head || *head <= 0.0) return std::nullopt;
  const double radius = alpha * *head;
  int correct = 0, evaluated = 0;
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!ref.visible(k)) continue;
    ++evaluated;
    if (pred.visible(k) && (pred.point(k) - ref.point(k)).norm() <= radius) ++correct;
  }
  return std::pair{correct, evaluated};
}

}  // namespace

double pckh(std::span<const Pose> predicted, std::span<const Pose> reference, double alpha) {
  if (predicted.size() != reference.size()) throw std::invalid_argument("pckh: length mismatch");
  long correct = 0, evaluated = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (const auto c = frame_counts(predicted[i], reference[i], alpha)) {
      correct += c->first;
      evaluated += c->second;
    }
  }
  return evaluated == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(evaluated);
}

void FeatureSet::validate() const {
  if (features.rows() < 2) throw std::invalid_argument("features: need at least two samples");
  if (!features.allFinite()) throw std::invalid_argument("features: non-finite entry");
}

GaussianFit fit_gaussian(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) throw std::invalid_argument("fit_gaussian: need at least two samples");
  GaussianFit g;
  g.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - g.mean.transpose();
  g.cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  return g;
}

double frechet_distance(const GaussianFit& a, const GaussianFit& b) {
  const Eigen::Index d = a.mean.size();
  if (b.mean.size() != d || a.cov.rows() != d || a.cov.cols() != d || b.cov.rows() != d || b.cov.cols() != d) {
    throw std::invalid_argument("frechet_distance: dimension mismatch");
  }
  constexpr double kClamp = 1e-10;
  // Tr((S_a S_b)^(1/2)) = Tr((S_a^(1/2) S_b S_a^(1/2))^(1/2)).
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(0.5 * (a.cov + a.cov.transpose()));
  const Eigen::VectorXd ra = ea.eigenvalues().unaryExpr([](double v) { return v < kClamp ? 0.0 : std::sqrt(v); });
  const Eigen::MatrixXd sqrt_a = ea.eigenvectors() * ra.asDiagonal() * ea.eigenvectors().transpose();
  const Eigen::MatrixXd m = sqrt_a * b.cov * sqrt_a;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const double tr_sqrt = em.eigenvalues().unaryExpr([](double v) { return v < kClamp ? 0.0 : std::sqrt(v); }).sum();
  return (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * tr_sqrt;
}

double fid(const FeatureSet& real, const FeatureSet& fake) {
  real.validate();
  fake.validate();
  if (real.features.cols() != fake.features.cols()) throw std::invalid_argument("fid: feature dimension mismatch");
  return frechet_distance(fit_gaussian(real.features), fit_gaussian(fake.features));
}

void EvalConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("eval.alpha: must be positive");
  if (!std::isfinite(psi)) throw std::invalid_argument("eval.psi: must be finite");
  if (mean_samples < 1) throw std::invalid_argument("eval.mean_samples: must be positive");
}

nlohmann::json to_json(const EvalConfig& c) {
  return {{"alpha", c.alpha}, {"psi", c.psi}, {"mean_samples", c.mean_samples}, {"seed", c.seed}};
}

EvalConfig eval_config_from_json(const nlohmann::json& j) {
  EvalConfig c;
  c.alpha = j.value("alpha", c.alpha);
  c.psi = j.value("psi", c.psi);
  c.mean_samples = j.value("mean_samples", c.mean_samples);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

nlohmann::json to_json(const EvalReport& r, bool with_frames) {
  nlohmann::json j = {{"pckh", r.pckh},     {"fid", r.fid},     {"n_eval", r.n_eval},
                      {"n_skipped", r.n_skipped}, {"alpha", r.alpha}, {"psi", r.psi}};
  if (with_frames) {
    j["frames"] = nlohmann::json::array();
    for (const auto& f : r.frames) {
      nlohmann::json fj = {{"index", f.index}};
      fj["pckh"] = f.pckh ? nlohmann::json(*f.pckh) : nlohmann::json(nullptr);
      if (!f.skipped.empty()) fj["skipped"] = f.skipped;
      j["frames"].push_back(std::move(fj));
    }
  }
  return j;
}

EvalReport evaluate_images(const Dataset& test, const ImageSource& source, const PoseExtractor& poses,
                           const FeatureExtractor& features, const EvalConfig& cfg) {
  cfg.validate();
  EvalReport r;
  r.alpha = cfg.alpha;
  r.psi = cfg.psi;
  std::vector<Eigen::VectorXd> real_f, fake_f;
  std::vector<Pose> pred, ref;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Example e = test.get(i);
    const FeatureMap<float> img = source(e.pose, i);
    real_f.push_back(features(e.image));
    fake_f.push_back(features(img));
    FrameResult fr;
    fr.index = i;
    try {
      const Pose p = poses(img);
      if (const auto c = frame_counts(p, e.pose, cfg.alpha)) {
        fr.pckh = c->second == 0 ? 0.0 : 100.0 * c->first / c->second;
        pred.push_back(p);
        ref.push_back(e.pose);
      } else {
        fr.skipped = "reference has no head size";
      }
    } catch (const std::exception& ex) {
      fr.skipped = std::string("pose extraction failed: ") + ex.what();
    }
    (fr.pckh ? r.n_eval : r.n_skipped) += 1;
    r.frames.push_back(std::move(fr));
  }
  r.pckh = pckh(pred, ref, cfg.alpha);
  const auto stack = [](const std::vector<Eigen::VectorXd>& v, const char* name) {
    FeatureSet s;
    s.extractor = name;
    if (v.empty()) return s;
    s.features.resize(static_cast<Eigen::Index>(v.size()), v.front().size());
    for (std::size_t i = 0; i < v.size(); ++i) s.features.row(static_cast<Eigen::Index>(i)) = v[i].transpose();
    return s;
  };
  r.fid = fid(stack(real_f, "real"), stack(fake_f, "fake"));
  return r;
}

EvalReport evaluate_model(const Generator<float>& G, const Dataset& test, const PoseExtractor& poses,
                          const FeatureExtractor& features, const EvalConfig& cfg) {
  MeanCache cache;
  SampleConfig sc;
  sc.n = 1;
  sc.psi = cfg.psi;
  sc.without_human = false;
  sc.mean_samples = cfg.mean_samples;
  sc.seed = cfg.seed;
  const ImageSource source = [&](const Pose& p, std::size_t i) {
    return std::move(sample_pose(G, p, i, sc, &cache).front().image);
  };
  return evaluate_images(test, source, poses, features, cfg);
}

}  // namespace posegan
