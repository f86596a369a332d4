// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// Parameterized layers with equalized learning rate: weights are stored
// unit-variance and scaled by 1/sqrt(fan_in) at runtime.

#pragma once

#include <cmath>
#include <string>

#include "posegan/ops.hpp"
#include "posegan/params.hpp"
#include "posegan/rng.hpp"

namespace posegan {

/// Fully connected layer y = (gain * W) x + bias_gain * b.
struct DenseLayer {
  int weight = -1;
  int bias = -1;  // -1: no bias
  int in = 0;
  int out = 0;
  double weight_gain = 1.0;
  double bias_gain = 1.0;
  double lr_multiplier = 1.0;

  template <class S>
  static DenseLayer add(ParamSet<S>& p, const std::string& name, int in, int out, bool bias = true,
                        double lr_multiplier = 1.0) {
    DenseLayer l;
    l.in = in;
    l.out = out;
    l.weight = p.add(name + ".weight", {out, in});
    l.bias = bias ? p.add(name + ".bias", {out}) : -1;
    l.weight_gain = lr_multiplier / std::sqrt(static_cast<double>(in));
    l.bias_gain = lr_multiplier;
    l.lr_multiplier = lr_multiplier;
    return l;
  }

  template <class S>
  void init(ParamSet<S>& p, Rng& rng, double bias_init = 0.0) const {
    for (Eigen::Index i = 0; i < p[weight].size(); ++i) p[weight][i] = S(rng.normal() / lr_multiplier);
    if (bias >= 0) p[bias].setConstant(S(bias_init / lr_multiplier));
  }

  template <class S>
  Vec<S> forward(const ParamSet<S>& p, const Vec<S>& x) const {
    Vec<S> y = matvec(p.view(weight), x) * S(weight_gain);
    if (bias >= 0) y += p[bias] * S(bias_gain);
    return y;
  }

  /// Accumulates parameter gradients (when grads is non-null) and returns dL/dx.
  template <class S>
  Vec<S> backward(const ParamSet<S>& p, const Vec<S>& x, const Vec<S>& grad_y, ParamSet<S>* grads) const {
    if (grads != nullptr) {
      grads->accumulate_matrix(weight, prod<false, true>(Mat<S>(grad_y), Mat<S>(x)) * S(weight_gain));
      if (bias >= 0) (*grads)[bias] += grad_y * S(bias_gain);
    }
    return matvec<true>(p.view(weight), grad_y) * S(weight_gain);
  }
};

/// k x k convolution with zero padding, weight shape [out, in, k, k].
struct ConvLayer {
  int weight = -1;
  int bias = -1;
  int in = 0;
  int out = 0;
  int kernel = 3;

  template <class S>
  static ConvLayer add(ParamSet<S>& p, const std::string& name, int in, int out, int kernel, bool bias = true) {
    ConvLayer l;
    l.in = in;
    l.out = out;
    l.kernel = kernel;
    l.weight = p.add(name + ".weight", {out, in, kernel, kernel});
    l.bias = bias ? p.add(name + ".bias", {out}) : -1;
    return l;
  }

  double gain() const { return 1.0 / std::sqrt(static_cast<double>(in * kernel * kernel)); }

  template <class S>
  void init(ParamSet<S>& p, Rng& rng) const {
    for (Eigen::Index i = 0; i < p[weight].size(); ++i) p[weight][i] = S(rng.normal());
  }

  /// Pre-activation output.
  template <class S>
  FeatureMap<S> forward(const ParamSet<S>& p, const FeatureMap<S>& x) const {
    FeatureMap<S> y(x.height, x.width, prod<false, true>(im2col(x, kernel), p.view(weight)) * S(gain()));
    if (bias >= 0) y.data.rowwise() += p[bias].transpose();
    return y;
  }

  template <class S>
  FeatureMap<S> backward(const ParamSet<S>& p, const FeatureMap<S>& x, const FeatureMap<S>& grad_y,
                         ParamSet<S>* grads, bool need_input_grad = true) const {
    if (grads != nullptr) {
      grads->accumulate_matrix(weight, prod<true, false>(grad_y.data, im2col(x, kernel)) * S(gain()));
      if (bias >= 0) (*grads)[bias] += grad_y.data.colwise().sum().transpose();
    }
    if (!need_input_grad) return {};
    const Mat<S> gcols = prod(grad_y.data, p.view(weight)) * S(gain());
    return col2im(gcols, in, x.height, x.width, kernel);
  }
};

/// Intermediates of one modulated convolution, kept for the backward pass.
template <class S>
struct ModConvTape {
  FeatureMap<S> input;
  Vec<S> w;
  Vec<S> style;
  Mat<S> modulated;  // out x (in * k * k), before demodulation
  Vec<S> demod;
  Mat<S> pre;
};

/// Style-modulated convolution: an affine map of w scales the input
/// channels of the weight; with demodulation each output filter is then
/// renormalized to unit norm.
struct ModConvLayer {
  DenseLayer affine;
  ConvLayer conv;
  bool demodulate = true;
  bool activate = true;

  template <class S>
  static ModConvLayer add(ParamSet<S>& p, const std::string& name, int w_dim, int in, int out, int kernel,
                          bool demodulate, bool activate) {
    ModConvLayer l;
    l.affine = DenseLayer::add(p, name + ".affine", w_dim, in);
    l.conv = ConvLayer::add(p, name, in, out, kernel);
    l.demodulate = demodulate;
    l.activate = activate;
    return l;
  }

  template <class S>
  void init(ParamSet<S>& p, Rng& rng) const {
    affine.init(p, rng, 1.0);
    conv.init(p, rng);
  }

  template <class S>
  FeatureMap<S> forward(const ParamSet<S>& p, const FeatureMap<S>& x, const Vec<S>& w, ModConvTape<S>* tape) const {
    using std::sqrt;
    const int kk = conv.kernel * conv.kernel;
    const Vec<S> style = affine.forward(p, w);
    Mat<S> mod = p.view(conv.weight) * S(conv.gain());
    for (int c = 0; c < conv.in; ++c) mod.middleCols(c * kk, kk) *= style[c];
    Vec<S> demod;
    Mat<S> weight = mod;
    if (demodulate) {
      demod.resize(conv.out);
      for (int o = 0; o < conv.out; ++o) {
        demod[o] = S(1) / sqrt(mod.row(o).squaredNorm() + S(1e-8));
        weight.row(o) *= demod[o];
      }
    }
    FeatureMap<S> y(x.height, x.width, prod<false, true>(im2col(x, conv.kernel), weight));
    y.data.rowwise() += p[conv.bias].transpose();
    if (tape != nullptr) {
      tape->input = x;
      tape->w = w;
      tape->style = style;
      tape->modulated = std::move(mod);
      tape->demod = demod;
      tape->pre = y.data;
    }
    if (activate) y.data = lrelu(y.data);
    return y;
  }

  /// Accumulates parameter gradients; returns dL/dx and adds dL/dw into grad_w.
  template <class S>
  FeatureMap<S> backward(const ParamSet<S>& p, const ModConvTape<S>& t, const FeatureMap<S>& grad_out,
                         ParamSet<S>* grads, Vec<S>& grad_w) const {
    const int kk = conv.kernel * conv.kernel;
    Mat<S> gpre = activate ? lrelu_backward(grad_out.data, t.pre) : grad_out.data;
    if (grads != nullptr) (*grads)[conv.bias] += gpre.colwise().sum().transpose();

    Mat<S> weight = t.modulated;
    if (demodulate) {
      for (int o = 0; o < conv.out; ++o) weight.row(o) *= t.demod[o];
    }
    const Mat<S> gweight = prod<true, false>(gpre, im2col(t.input, conv.kernel));
    const Mat<S> gcols = prod(gpre, weight);
    FeatureMap<S> gx = col2im(gcols, conv.in, t.input.height, t.input.width, conv.kernel);

    Mat<S> gmod = gweight;
    if (demodulate) {
      for (int o = 0; o < conv.out; ++o) {
        const S d = t.demod[o];
        const S inner = gweight.row(o).dot(t.modulated.row(o));
        gmod.row(o) = gweight.row(o) * d - t.modulated.row(o) * (d * d * d * inner);
      }
    }
    // modulated = W * gain * style[c] per input-channel column block.
    const auto raw = p.view(conv.weight);
    const S gain(conv.gain());
    Vec<S> gstyle(conv.in);
    Mat<S> graw = gmod;
    for (int c = 0; c < conv.in; ++c) {
      gstyle[c] = gmod.middleCols(c * kk, kk).cwiseProduct(raw.middleCols(c * kk, kk)).sum() * gain;
      graw.middleCols(c * kk, kk) *= t.style[c] * gain;
    }
    if (grads != nullptr) grads->accumulate_matrix(conv.weight, graw);
    grad_w += affine.backward(p, t.w, gstyle, grads);
    return gx;
  }
};

}  // namespace posegan
