// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// Fixed random convolutional embedder. Supplies deterministic features for
// FID and a layered perceptual distance with an input gradient.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "posegan/layers.hpp"
#include "posegan/rng.hpp"

namespace posegan {

template <class S>
class ConvEmbedder {
 public:
  struct Tape {
    FeatureMap<S> input;                 // after resizing
    std::vector<FeatureMap<S>> inputs;   // per layer
    std::vector<FeatureMap<S>> pre;      // per layer, before the activation
    std::vector<FeatureMap<S>> outputs;  // per layer, after the activation
  };

  /// Per-layer unit-normalized activations of a reference image.
  struct Target {
    std::vector<Mat<S>> normalized;
  };

  explicit ConvEmbedder(std::uint64_t seed = 0, int input_size = 64, std::vector<int> widths = {16, 32, 64})
      : input_size_(input_size) {
    Rng rng = Rng::substream(seed, "embedder");
    int in = 3;
    for (std::size_t l = 0; l < widths.size(); ++l) {
      layers_.push_back(ConvLayer::add(params_, "embed" + std::to_string(l), in, widths[l], 3, false));
      layers_.back().init(params_, rng);
      in = widths[l];
    }
  }

  int input_size() const { return input_size_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  /// Channel means and standard deviations of every layer.
  int feature_dim() const {
    int d = 0;
    for (const auto& l : layers_) d += 2 * l.out;
    return d;
  }

  std::vector<FeatureMap<S>> forward(const FeatureMap<S>& image, Tape* tape = nullptr) const {
    FeatureMap<S> x = resize(image);
    if (tape != nullptr) {
      tape->input = x;
      tape->inputs.clear();
      tape->pre.clear();
      tape->outputs.clear();
    }
    std::vector<FeatureMap<S>> outs;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      FeatureMap<S> pre = layers_[l].forward(params_, x);
      FeatureMap<S> y(pre.height, pre.width, lrelu(pre.data));
      if (tape != nullptr) {
        tape->inputs.push_back(x);
        tape->pre.push_back(pre);
        tape->outputs.push_back(y);
      }
      if (l + 1 < layers_.size()) x = downsample2x(y);
      outs.push_back(std::move(y));
    }
    return outs;
  }

  /// [mean_c, std_c] for every channel of every layer.
  Eigen::VectorXd features(const FeatureMap<S>& image) const {
    const auto outs = forward(image);
    Eigen::VectorXd f(feature_dim());
    Eigen::Index i = 0;
    for (const auto& o : outs) {
      const Eigen::MatrixXd a = o.data.unaryExpr([](const S& v) { return value_of(v); });
      const Eigen::RowVectorXd mean = a.colwise().mean();
      const Eigen::RowVectorXd sd = ((a.rowwise() - mean).array().square().colwise().mean()).sqrt();
      f.segment(i, a.cols()) = mean.transpose();
      f.segment(i + a.cols(), a.cols()) = sd.transpose();
      i += 2 * a.cols();
    }
    return f;
  }

  Target target(const FeatureMap<S>& image) const {
    Target t;
    for (const auto& o : forward(image)) t.normalized.push_back(normalize(o.data));
    return t;
  }

  /// Sum over layers of the mean squared distance between per-pixel
  /// unit-normalized activations. Writes dL/d(image) when grad is non-null.
  double perceptual(const FeatureMap<S>& image, const Target& target, FeatureMap<S>* grad = nullptr) const {
    Tape tape;
    forward(image, &tape);
    double loss = 0.0;
    std::vector<Mat<S>> g_out(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const Mat<S>& f = tape.outputs[l].data;
      const Mat<S> u = normalize(f);
      const Mat<S> diff = u - target.normalized[l];
      const S inv_p(1.0 / static_cast<double>(f.rows()));
      loss += value_of(diff.squaredNorm()) / static_cast<double>(f.rows());
      if (grad == nullptr) continue;
      // d(f / n) with n = sqrt(|f|^2 + eps^2).
      const Mat<S> gu = diff * (S(2) * inv_p);
      Mat<S> gf(f.rows(), f.cols());
      for (Eigen::Index p = 0; p < f.rows(); ++p) {
        const S n = norm_of(f.row(p));
        gf.row(p) = gu.row(p) / n - f.row(p) * (f.row(p).dot(gu.row(p)) / (n * n * n));
      }
      g_out[l] = std::move(gf);
    }
    if (grad == nullptr) return loss;
    FeatureMap<S> g;
    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
      const auto i = static_cast<std::size_t>(l);
      Mat<S> gy = g_out[i];
      if (l + 1 < num_layers()) gy += downsample2x_backward(g).data;
      const FeatureMap<S> gpre(tape.pre[i].height, tape.pre[i].width,
                               lrelu_backward(gy, tape.pre[i].data));
      g = layers_[i].backward(params_, tape.inputs[i], gpre, static_cast<ParamSet<S>*>(nullptr), true);
    }
    *grad = resize_backward(g, image.height, image.width);
    return loss;
  }

 private:
  static constexpr double kEps = 1e-6;

  static S norm_of(const Eigen::Ref<const Eigen::Matrix<S, 1, Eigen::Dynamic>>& row) {
    using std::sqrt;
    return sqrt(row.squaredNorm() + S(kEps * kEps));
  }

  static Mat<S> normalize(const Mat<S>& f) {
    Mat<S> u(f.rows(), f.cols());
    for (Eigen::Index p = 0; p < f.rows(); ++p) u.row(p) = f.row(p) / norm_of(f.row(p));
    return u;
  }

  Resampler resampler(int h, int w) const {
    const double sx = static_cast<double>(w) / input_size_, sy = static_cast<double>(h) / input_size_;
    return Resampler::bilinear(h, w, input_size_, input_size_,
                               [sx, sy](double x, double y) { return std::pair<double, double>(x * sx, y * sy); });
  }

  FeatureMap<S> resize(const FeatureMap<S>& x) const {
    if (x.height == input_size_ && x.width == input_size_) return x;
    return resampler(x.height, x.width).apply(x);
  }

  FeatureMap<S> resize_backward(const FeatureMap<S>& g, int h, int w) const {
    if (h == input_size_ && w == input_size_) return g;
    return resampler(h, w).apply_transpose(g);
  }

  int input_size_;
  ParamSet<S> params_;
  std::vector<ConvLayer> layers_;
};

}  // namespace posegan
