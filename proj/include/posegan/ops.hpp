// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// Differentiable building blocks shared by the networks, the augmentation
// pipeline and the feature extractors. Each forward op has a matching
// backward that maps an output gradient to an input gradient.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "posegan/tensor.hpp"

namespace posegan {

inline constexpr double kLeakySlope = 0.2;
inline const double kLeakyGain = std::sqrt(2.0);

/// Patch matrix for a k x k convolution with zero padding k / 2.
/// Column c * k * k + ky * k + kx holds channel c shifted by (ky - k/2, kx - k/2).
template <class S>
Mat<S> im2col(const FeatureMap<S>& x, int k) {
  if (k == 1) return x.data;
  const int h = x.height, w = x.width, pad = k / 2;
  Mat<S> cols = Mat<S>::Zero(x.pixels(), x.channels() * k * k);
  for (int c = 0; c < x.channels(); ++c) {
    const S* src = x.data.col(c).data();
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        S* dst = cols.col(c * k * k + ky * k + kx).data();
        const int dy = ky - pad, dx = kx - pad;
        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
        const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
        for (int y = y0; y < y1; ++y) {
          for (int xx = x0; xx < x1; ++xx) dst[y * w + xx] = src[(y + dy) * w + xx + dx];
        }
      }
    }
  }
  return cols;
}

/// Adjoint of im2col: scatters patch gradients back onto the input grid.
template <class S>
FeatureMap<S> col2im(const Mat<S>& cols, int channels, int h, int w, int k) {
  if (k == 1) return FeatureMap<S>(h, w, cols);
  const int pad = k / 2;
  FeatureMap<S> x(channels, h, w);
  for (int c = 0; c < channels; ++c) {
    S* dst = x.data.col(c).data();
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const S* src = cols.col(c * k * k + ky * k + kx).data();
        const int dy = ky - pad, dx = kx - pad;
        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
        const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
        for (int y = y0; y < y1; ++y) {
          for (int xx = x0; xx < x1; ++xx) dst[(y + dy) * w + xx + dx] += src[y * w + xx];
        }
      }
    }
  }
  return x;
}

namespace detail {

// 2x upsampling with the [1,3,3,1]/4 filter along one axis, edges clamped.
template <class S>
void upsample_line(const S* in, int n, int stride_in, S* out, int stride_out) {
  const S a(0.75), b(0.25);
  for (int i = 0; i < n; ++i) {
    const S& left = in[std::max(i - 1, 0) * stride_in];
    const S& mid = in[i * stride_in];
    const S& right = in[std::min(i + 1, n - 1) * stride_in];
    out[(2 * i) * stride_out] = a * mid + b * left;
    out[(2 * i + 1) * stride_out] = a * mid + b * right;
  }
}

// Adjoint of upsample_line, scaled by 1/2 so constants are preserved.
template <class S>
void downsample_line(const S* in, int n_out, int stride_in, S* out, int stride_out) {
  const S a(0.375), b(0.125);
  for (int i = 0; i < n_out; ++i) out[i * stride_out] = S(0);
  for (int i = 0; i < n_out; ++i) {
    const S& even = in[(2 * i) * stride_in];
    const S& odd = in[(2 * i + 1) * stride_in];
    out[i * stride_out] += a * (even + odd);
    out[std::max(i - 1, 0) * stride_out] += b * even;
    out[std::min(i + 1, n_out - 1) * stride_out] += b * odd;
  }
}

}  // namespace detail

template <class S>
FeatureMap<S> upsample2x(const FeatureMap<S>& x) {
  const int h = x.height, w = x.width;
  FeatureMap<S> out(x.channels(), 2 * h, 2 * w);
  std::vector<S> rows(static_cast<std::size_t>(h) * 2 * w);
  for (int c = 0; c < x.channels(); ++c) {
    const S* src = x.data.col(c).data();
    for (int y = 0; y < h; ++y) detail::upsample_line(src + y * w, w, 1, rows.data() + y * 2 * w, 1);
    S* dst = out.data.col(c).data();
    for (int xx = 0; xx < 2 * w; ++xx) detail::upsample_line(rows.data() + xx, h, 2 * w, dst + xx, 2 * w);
  }
  return out;
}

/// 2x downsampling, the adjoint of upsample2x divided by 4.
template <class S>
FeatureMap<S> downsample2x(const FeatureMap<S>& x) {
  const int h = x.height / 2, w = x.width / 2;
  FeatureMap<S> out(x.channels(), h, w);
  std::vector<S> rows(static_cast<std::size_t>(x.height) * w);
  for (int c = 0; c < x.channels(); ++c) {
    const S* src = x.data.col(c).data();
    for (int y = 0; y < x.height; ++y) detail::downsample_line(src + y * x.width, w, 1, rows.data() + y * w, 1);
    S* dst = out.data.col(c).data();
    for (int xx = 0; xx < w; ++xx) detail::downsample_line(rows.data() + xx, h, w, dst + xx, w);
  }
  return out;
}

template <class S>
FeatureMap<S> upsample2x_backward(const FeatureMap<S>& grad_out) {
  FeatureMap<S> g = downsample2x(grad_out);
  g.data *= S(4);
  return g;
}

template <class S>
FeatureMap<S> downsample2x_backward(const FeatureMap<S>& grad_out) {
  FeatureMap<S> g = upsample2x(grad_out);
  g.data *= S(0.25);
  return g;
}

/// Leaky ReLU with slope 0.2 and gain sqrt(2).
template <class Derived>
auto lrelu(const Eigen::MatrixBase<Derived>& pre) {
  using S = typename Derived::Scalar;
  const S gain(kLeakyGain), neg(kLeakyGain * kLeakySlope);
  return pre.unaryExpr([gain, neg](const S& v) { return v > S(0) ? S(v * gain) : S(v * neg); }).eval();
}

template <class DerivedG, class DerivedP>
auto lrelu_backward(const Eigen::MatrixBase<DerivedG>& grad, const Eigen::MatrixBase<DerivedP>& pre) {
  using S = typename DerivedG::Scalar;
  const S gain(kLeakyGain), neg(kLeakyGain * kLeakySlope);
  return grad.binaryExpr(pre, [gain, neg](const S& g, const S& v) { return v > S(0) ? S(g * gain) : S(g * neg); })
      .eval();
}

/// x / sqrt(mean(x^2) + eps).
template <class S>
Vec<S> normalize_2nd_moment(const Vec<S>& x) {
  using std::sqrt;
  if (x.size() == 0) return x;
  const S r = S(1) / sqrt(x.squaredNorm() / S(static_cast<double>(x.size())) + S(1e-8));
  return x * r;
}

template <class S>
Vec<S> normalize_2nd_moment_backward(const Vec<S>& grad, const Vec<S>& x) {
  using std::sqrt;
  if (x.size() == 0) return grad;
  const S n(static_cast<double>(x.size()));
  const S r = S(1) / sqrt(x.squaredNorm() / n + S(1e-8));
  return grad * r - x * (r * r * r * x.dot(grad) / n);
}

/// log(1 + exp(x)), stable for large |x|.
template <class S>
S softplus(const S& x) {
  using std::exp;
  using std::log1p;
  if (x > S(0)) return x + log1p(exp(-x));
  return log1p(exp(x));
}

template <class S>
S sigmoid(const S& x) {
  using std::exp;
  return S(1) / (S(1) + exp(-x));
}

/// Sparse linear resampling operator: out[row] = sum weight * in[src].
/// Applies identically to every channel.
struct Resampler {
  struct Tap {
    int out;
    int in;
    double weight;
  };
  int in_height = 0, in_width = 0, out_height = 0, out_width = 0;
  std::vector<Tap> taps;

  /// Bilinear sampling where out pixel (y, x) reads input at continuous
  /// coordinates source(x + 0.5, y + 0.5) (pixel centers at +0.5). Samples
  /// outside the input read zero.
  template <class F>
  static Resampler bilinear(int in_h, int in_w, int out_h, int out_w, F&& source) {
    Resampler r{in_h, in_w, out_h, out_w, {}};
    r.taps.reserve(static_cast<std::size_t>(out_h) * out_w * 4);
    for (int y = 0; y < out_h; ++y) {
      for (int x = 0; x < out_w; ++x) {
        const auto [u, v] = source(x + 0.5, y + 0.5);
        const double fx = u - 0.5, fy = v - 0.5;
        const double x0 = std::floor(fx), y0 = std::floor(fy);
        const double ax = fx - x0, ay = fy - y0;
        const int ix = static_cast<int>(x0), iy = static_cast<int>(y0);
        const double wts[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
        const int xs[4] = {ix, ix + 1, ix, ix + 1};
        const int ys[4] = {iy, iy, iy + 1, iy + 1};
        for (int t = 0; t < 4; ++t) {
          if (wts[t] == 0.0 || xs[t] < 0 || ys[t] < 0 || xs[t] >= in_w || ys[t] >= in_h) continue;
          r.taps.push_back({y * out_w + x, ys[t] * in_w + xs[t], wts[t]});
        }
      }
    }
    return r;
  }

  template <class S>
  FeatureMap<S> apply(const FeatureMap<S>& x) const {
    FeatureMap<S> out(x.channels(), out_height, out_width);
    for (int c = 0; c < x.channels(); ++c) {
      const S* src = x.data.col(c).data();
      S* dst = out.data.col(c).data();
      for (const Tap& t : taps) dst[t.out] += S(t.weight) * src[t.in];
    }
    return out;
  }

  template <class S>
  FeatureMap<S> apply_transpose(const FeatureMap<S>& g) const {
    FeatureMap<S> out(g.channels(), in_height, in_width);
    for (int c = 0; c < g.channels(); ++c) {
      const S* src = g.data.col(c).data();
      S* dst = out.data.col(c).data();
      for (const Tap& t : taps) dst[t.in] += S(t.weight) * src[t.out];
    }
    return out;
  }
};

}  // namespace posegan
