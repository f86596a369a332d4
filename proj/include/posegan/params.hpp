// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "posegan/tensor.hpp"

namespace posegan {

/// Ordered collection of named parameter tensors keyed by module path
/// (e.g. "synthesis.b8.conv0.weight"). Values are stored flat.
template <class S>
class ParamSet {
 public:
  int add(std::string name, std::vector<int> shape) {
    if (index_.count(name) != 0) throw std::logic_error("duplicate parameter: " + name);
    const int count = std::accumulate(shape.begin(), shape.end(), 1, std::multiplies<>());
    index_.emplace(name, static_cast<int>(values_.size()));
    names_.push_back(std::move(name));
    shapes_.push_back(std::move(shape));
    values_.push_back(Vec<S>::Zero(count));
    return static_cast<int>(values_.size()) - 1;
  }

  int size() const { return static_cast<int>(values_.size()); }
  bool contains(std::string_view name) const { return index_.count(std::string(name)) != 0; }
  int index(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw std::out_of_range("unknown parameter: " + std::string(name));
    return it->second;
  }

  const std::string& name(int i) const { return names_[i]; }
  const std::vector<int>& shape(int i) const { return shapes_[i]; }
  Vec<S>& operator[](int i) { return values_[i]; }
  const Vec<S>& operator[](int i) const { return values_[i]; }
  Vec<S>& operator[](std::string_view n) { return values_[index(n)]; }
  const Vec<S>& operator[](std::string_view n) const { return values_[index(n)]; }

  using RowMajorMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  /// Parameter i viewed as a row-major matrix whose first dimension is rows.
  Eigen::Map<const RowMajorMat> view(int i) const {
    const int rows = shapes_[i].front();
    const int cols = static_cast<int>(values_[i].size()) / rows;
    return Eigen::Map<const RowMajorMat>(values_[i].data(), rows, cols);
  }
  /// Adds a row-major matrix into parameter i.
  template <class Derived>
  void accumulate_matrix(int i, const Eigen::MatrixBase<Derived>& m) {
    Eigen::Map<RowMajorMat>(values_[i].data(), m.rows(), m.cols()) += m;
  }

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
    return n;
  }

  ParamSet zeros_like() const {
    ParamSet out = *this;
    for (auto& v : out.values_) v.setZero();
    return out;
  }

  void set_zero() {
    for (auto& v : values_) v.setZero();
  }

  template <class T>
  ParamSet<T> cast() const {
    ParamSet<T> out;
    for (int i = 0; i < size(); ++i) {
      out.add(names_[i], shapes_[i]);
      out[i] = values_[i].template cast<T>();
    }
    return out;
  }

  bool same_layout(const ParamSet& o) const { return names_ == o.names_ && shapes_ == o.shapes_; }

  ParamSet& operator+=(const ParamSet& o) {
    for (int i = 0; i < size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  ParamSet& operator*=(const S& s) {
    for (auto& v : values_) v *= s;
    return *this;
  }

  double squared_norm() const {
    double n = 0.0;
    for (const auto& v : values_) {
      for (Eigen::Index k = 0; k < v.size(); ++k) n += value_of(v[k]) * value_of(v[k]);
    }
    return n;
  }

  bool all_finite() const {
    for (const auto& v : values_) {
      for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (!std::isfinite(value_of(v[k]))) return false;
      }
    }
    return true;
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<int>> shapes_;
  std::vector<Vec<S>> values_;
  std::map<std::string, int, std::less<>> index_;
};

/// Dual parts of a dual-valued parameter set, as a primal set.
template <class T>
ParamSet<T> dual_parts(const ParamSet<Dual<T>>& p) {
  ParamSet<T> out;
  for (int i = 0; i < p.size(); ++i) {
    out.add(p.name(i), p.shape(i));
    out[i] = dual_part(p[i]);
  }
  return out;
}

struct AdamConfig {
  double learning_rate = 2.5e-3;
  double beta1 = 0.0;
  double beta2 = 0.99;
  double epsilon = 1e-8;
};

/// Adam moments for one parameter set.
template <class S>
struct AdamState {
  ParamSet<S> m;
  ParamSet<S> v;
  long step = 0;

  static AdamState like(const ParamSet<S>& params) { return {params.zeros_like(), params.zeros_like(), 0}; }

  void update(ParamSet<S>& params, const ParamSet<S>& grads, const AdamConfig& cfg) {
    ++step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    const S b1(cfg.beta1), b2(cfg.beta2), lr(cfg.learning_rate / c1), eps(cfg.epsilon);
    const S inv_c2(1.0 / c2);
    for (int i = 0; i < params.size(); ++i) {
      m[i] = b1 * m[i] + (S(1) - b1) * grads[i];
      v[i] = b2 * v[i] + (S(1) - b2) * grads[i].cwiseAbs2();
      params[i].array() -= lr * m[i].array() / ((v[i].array() * inv_c2).sqrt() + eps);
    }
  }
};

}  // namespace posegan
