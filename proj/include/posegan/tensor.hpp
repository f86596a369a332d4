// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <type_traits>

#include <Eigen/Dense>

#include "posegan/dual.hpp"

namespace posegan {

template <class S> using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S> using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// Image tensor stored pixels-by-channels: column c is channel c as a
/// contiguous row-major plane, row p is pixel (y, x) with p = y * width + x.
template <class S>
struct FeatureMap {
  int height = 0;
  int width = 0;
  Mat<S> data;

  FeatureMap() = default;
  FeatureMap(int channels, int h, int w) : height(h), width(w), data(Mat<S>::Zero(h * w, channels)) {}
  FeatureMap(int h, int w, Mat<S> values) : height(h), width(w), data(std::move(values)) {}

  int channels() const { return static_cast<int>(data.cols()); }
  int pixels() const { return height * width; }
  S& at(int c, int y, int x) { return data(y * width + x, c); }
  const S& at(int c, int y, int x) const { return data(y * width + x, c); }

  template <class T>
  FeatureMap<T> cast() const {
    return FeatureMap<T>(height, width, data.template cast<T>());
  }
};

template <class S>
bool same_shape(const FeatureMap<S>& a, const FeatureMap<S>& b) {
  return a.height == b.height && a.width == b.width && a.channels() == b.channels();
}

/// Appends b's channels after a's.
template <class S>
FeatureMap<S> concat_channels(const FeatureMap<S>& a, const FeatureMap<S>& b) {
  if (a.height != b.height || a.width != b.width) {
    throw std::invalid_argument("concat_channels: spatial size mismatch");
  }
  FeatureMap<S> out(a.channels() + b.channels(), a.height, a.width);
  out.data.leftCols(a.channels()) = a.data;
  out.data.rightCols(b.channels()) = b.data;
  return out;
}

template <class T>
Mat<T> real_part(const Mat<Dual<T>>& m) {
  return m.unaryExpr([](const Dual<T>& d) { return d.re; });
}
template <class T>
Mat<T> dual_part(const Mat<Dual<T>>& m) {
  return m.unaryExpr([](const Dual<T>& d) { return d.eps; });
}
template <class T>
Mat<Dual<T>> make_dual(const Mat<T>& re, const Mat<T>& eps) {
  return re.binaryExpr(eps, [](T r, T e) { return Dual<T>(r, e); });
}

template <class T>
Vec<T> real_part(const Vec<Dual<T>>& v) {
  return v.unaryExpr([](const Dual<T>& d) { return d.re; });
}
template <class T>
Vec<T> dual_part(const Vec<Dual<T>>& v) {
  return v.unaryExpr([](const Dual<T>& d) { return d.eps; });
}
template <class T>
Vec<Dual<T>> make_dual(const Vec<T>& re, const Vec<T>& eps) {
  return re.binaryExpr(eps, [](T r, T e) { return Dual<T>(r, e); });
}

namespace detail {
template <class T>
struct real_of {
  T operator()(const Dual<T>& d) const { return d.re; }
};
template <class T>
struct dual_of {
  T operator()(const Dual<T>& d) const { return d.eps; }
};
}  // namespace detail

/// Matrix product op(a) * op(b), where op transposes when the flag is set.
/// Dual operands are split into three primal products so the vectorized
/// primal kernels do the work.
template <bool TransA = false, bool TransB = false, class DA, class DB>
Mat<typename DA::Scalar> prod(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  using S = typename DA::Scalar;
  static_assert(std::is_same_v<S, typename DB::Scalar>, "prod: scalar mismatch");
  if constexpr (is_dual_v<S>) {
    using T = primal_t<S>;
    const Mat<T> ar = a.unaryExpr(detail::real_of<T>{}), ad = a.unaryExpr(detail::dual_of<T>{});
    const Mat<T> br = b.unaryExpr(detail::real_of<T>{}), bd = b.unaryExpr(detail::dual_of<T>{});
    const Mat<T> re = prod<TransA, TransB>(ar, br);
    const Mat<T> eps = prod<TransA, TransB>(ar, bd) + prod<TransA, TransB>(ad, br);
    return make_dual(re, eps);
  } else if constexpr (TransA && TransB) {
    return a.transpose() * b.transpose();
  } else if constexpr (TransA) {
    return a.transpose() * b;
  } else if constexpr (TransB) {
    return a * b.transpose();
  } else {
    return a * b;
  }
}

/// op(a) * x for a matrix a and vector x.
template <bool TransA = false, class DA, class DX>
Vec<typename DA::Scalar> matvec(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DX>& x) {
  using S = typename DA::Scalar;
  if constexpr (is_dual_v<S>) {
    using T = primal_t<S>;
    const Mat<T> ar = a.unaryExpr(detail::real_of<T>{}), ad = a.unaryExpr(detail::dual_of<T>{});
    const Vec<T> xr = x.unaryExpr(detail::real_of<T>{}), xd = x.unaryExpr(detail::dual_of<T>{});
    const Vec<T> re = matvec<TransA>(ar, xr);
    const Vec<T> eps = matvec<TransA>(ar, xd) + matvec<TransA>(ad, xr);
    return make_dual(re, eps);
  } else if constexpr (TransA) {
    return a.transpose() * x;
  } else {
    return a * x;
  }
}

}  // namespace posegan
