// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// Forward-mode dual numbers. Instantiating the network code with Dual<T>
// and running its reverse pass yields exact Hessian-vector products
// (forward-over-reverse), which the R1 and path-length regularizers need.

#pragma once

#include <cmath>
#include <limits>
#include <type_traits>

#include <Eigen/Core>

namespace posegan {

template <class T>
struct Dual {
  T re{};
  T eps{};

  constexpr Dual() = default;
  constexpr Dual(T r) : re(r) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(T r, T e) : re(r), eps(e) {}
  template <class U, std::enable_if_t<std::is_arithmetic_v<U> && !std::is_same_v<U, T>, int> = 0>
  constexpr Dual(U r) : re(static_cast<T>(r)) {}  // NOLINT(google-explicit-constructor)

  constexpr Dual& operator+=(const Dual& o) { re += o.re; eps += o.eps; return *this; }
  constexpr Dual& operator-=(const Dual& o) { re -= o.re; eps -= o.eps; return *this; }
  constexpr Dual& operator*=(const Dual& o) {
    eps = eps * o.re + re * o.eps;
    re *= o.re;
    return *this;
  }
  constexpr Dual& operator/=(const Dual& o) {
    eps = (eps * o.re - re * o.eps) / (o.re * o.re);
    re /= o.re;
    return *this;
  }
  constexpr Dual operator-() const { return {-re, -eps}; }
  constexpr Dual operator+() const { return *this; }
};

template <class T> constexpr Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <class T> constexpr Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <class T> constexpr Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <class T> constexpr Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }

template <class T> constexpr Dual<T> operator+(Dual<T> a, T b) { a.re += b; return a; }
template <class T> constexpr Dual<T> operator+(T b, Dual<T> a) { a.re += b; return a; }
template <class T> constexpr Dual<T> operator-(Dual<T> a, T b) { a.re -= b; return a; }
template <class T> constexpr Dual<T> operator-(T b, const Dual<T>& a) { return {b - a.re, -a.eps}; }
template <class T> constexpr Dual<T> operator*(const Dual<T>& a, T b) { return {a.re * b, a.eps * b}; }
template <class T> constexpr Dual<T> operator*(T b, const Dual<T>& a) { return {a.re * b, a.eps * b}; }
template <class T> constexpr Dual<T> operator/(const Dual<T>& a, T b) { return {a.re / b, a.eps / b}; }

template <class T> constexpr bool operator<(const Dual<T>& a, const Dual<T>& b) { return a.re < b.re; }
template <class T> constexpr bool operator>(const Dual<T>& a, const Dual<T>& b) { return a.re > b.re; }
template <class T> constexpr bool operator<=(const Dual<T>& a, const Dual<T>& b) { return a.re <= b.re; }
template <class T> constexpr bool operator>=(const Dual<T>& a, const Dual<T>& b) { return a.re >= b.re; }
template <class T> constexpr bool operator==(const Dual<T>& a, const Dual<T>& b) {
  return a.re == b.re && a.eps == b.eps;
}
template <class T> constexpr bool operator!=(const Dual<T>& a, const Dual<T>& b) { return !(a == b); }

template <class T> Dual<T> sqrt(const Dual<T>& a) {
  const T r = std::sqrt(a.re);
  return {r, r > T(0) ? a.eps / (T(2) * r) : T(0)};
}
template <class T> Dual<T> exp(const Dual<T>& a) {
  const T e = std::exp(a.re);
  return {e, e * a.eps};
}
template <class T> Dual<T> log(const Dual<T>& a) { return {std::log(a.re), a.eps / a.re}; }
template <class T> Dual<T> log1p(const Dual<T>& a) { return {std::log1p(a.re), a.eps / (T(1) + a.re)}; }
template <class T> Dual<T> abs(const Dual<T>& a) { return a.re < T(0) ? -a : a; }
template <class T> Dual<T> abs2(const Dual<T>& a) { return a * a; }
template <class T> Dual<T> conj(const Dual<T>& a) { return a; }
template <class T> Dual<T> real(const Dual<T>& a) { return a; }
template <class T> Dual<T> imag(const Dual<T>&) { return {}; }
template <class T> bool isfinite(const Dual<T>& a) { return std::isfinite(a.re) && std::isfinite(a.eps); }
template <class T> bool isnan(const Dual<T>& a) { return std::isnan(a.re) || std::isnan(a.eps); }
template <class T> bool isinf(const Dual<T>& a) { return std::isinf(a.re) || std::isinf(a.eps); }

template <class S> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};
template <class S> inline constexpr bool is_dual_v = is_dual<S>::value;

/// Real part as double, for logging and comparisons.
template <class S> double value_of(const S& s) {
  if constexpr (is_dual_v<S>) {
    return static_cast<double>(s.re);
  } else {
    return static_cast<double>(s);
  }
}

/// Primal scalar type: T for Dual<T>, S otherwise.
template <class S> struct primal { using type = S; };
template <class T> struct primal<Dual<T>> { using type = T; };
template <class S> using primal_t = typename primal<S>::type;

}  // namespace posegan

namespace Eigen {

template <class T>
struct NumTraits<posegan::Dual<T>> : NumTraits<T> {
  using Real = posegan::Dual<T>;
  using NonInteger = posegan::Dual<T>;
  using Nested = posegan::Dual<T>;
  using Literal = posegan::Dual<T>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 2,
    MulCost = 4
  };
  static Real epsilon() { return Real(NumTraits<T>::epsilon()); }
  static Real dummy_precision() { return Real(NumTraits<T>::dummy_precision()); }
  static Real highest() { return Real(NumTraits<T>::highest()); }
  static Real lowest() { return Real(NumTraits<T>::lowest()); }
  static int digits10() { return NumTraits<T>::digits10(); }
};

template <class T, typename BinaryOp>
struct ScalarBinaryOpTraits<posegan::Dual<T>, T, BinaryOp> {
  using ReturnType = posegan::Dual<T>;
};
template <class T, typename BinaryOp>
struct ScalarBinaryOpTraits<T, posegan::Dual<T>, BinaryOp> {
  using ReturnType = posegan::Dual<T>;
};

}  // namespace Eigen
