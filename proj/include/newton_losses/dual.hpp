// Copyright 2026 The Newton Losses Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Single-direction forward-mode dual number. Running an analytic gradient
// with Dual<double> seeded along e_k yields column k of the Hessian.

#pragma once

#include <Eigen/Core>

#include <cmath>

namespace nl {

template <typename T>
struct Dual {
  T v{};  // value
  T d{};  // directional derivative

  constexpr Dual() = default;
  constexpr Dual(T value) : v(value) {}  // NOLINT: implicit from constants
  constexpr Dual(T value, T tangent) : v(value), d(tangent) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) {
    d = (d * o.v - v * o.d) / (o.v * o.v);
    v /= o.v;
    return *this;
  }
  Dual operator-() const { return {-v, -d}; }
  Dual operator+() const { return *this; }
};

template <typename T> Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <typename T> Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <typename T> Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <typename T> Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <typename T> Dual<T> operator+(Dual<T> a, T b) { a.v += b; return a; }
template <typename T> Dual<T> operator+(T a, Dual<T> b) { b.v += a; return b; }
template <typename T> Dual<T> operator-(Dual<T> a, T b) { a.v -= b; return a; }
template <typename T> Dual<T> operator-(T a, const Dual<T>& b) { return {a - b.v, -b.d}; }
template <typename T> Dual<T> operator*(const Dual<T>& a, T b) { return {a.v * b, a.d * b}; }
template <typename T> Dual<T> operator*(T a, const Dual<T>& b) { return {a * b.v, a * b.d}; }
template <typename T> Dual<T> operator/(const Dual<T>& a, T b) { return {a.v / b, a.d / b}; }
template <typename T> Dual<T> operator/(T a, const Dual<T>& b) { return Dual<T>(a) / b; }

// Comparisons look at the value only; branches are piecewise-constant.
template <typename T> bool operator<(const Dual<T>& a, const Dual<T>& b) { return a.v < b.v; }
template <typename T> bool operator>(const Dual<T>& a, const Dual<T>& b) { return a.v > b.v; }
template <typename T> bool operator<=(const Dual<T>& a, const Dual<T>& b) { return a.v <= b.v; }
template <typename T> bool operator>=(const Dual<T>& a, const Dual<T>& b) { return a.v >= b.v; }
template <typename T> bool operator==(const Dual<T>& a, const Dual<T>& b) { return a.v == b.v; }
template <typename T> bool operator!=(const Dual<T>& a, const Dual<T>& b) { return a.v != b.v; }

template <typename T> Dual<T> exp(const Dual<T>& a) { const T e = std::exp(a.v); return {e, e * a.d}; }
template <typename T> Dual<T> log(const Dual<T>& a) { return {std::log(a.v), a.d / a.v}; }
template <typename T> Dual<T> sqrt(const Dual<T>& a) {
  const T s = std::sqrt(a.v);
  return {s, a.d / (T(2) * s)};
}
template <typename T> Dual<T> atan(const Dual<T>& a) { return {std::atan(a.v), a.d / (T(1) + a.v * a.v)}; }
template <typename T> Dual<T> tanh(const Dual<T>& a) {
  const T t = std::tanh(a.v);
  return {t, a.d * (T(1) - t * t)};
}
template <typename T> Dual<T> abs(const Dual<T>& a) {
  if (a.v > T(0)) return a;
  if (a.v < T(0)) return -a;
  return {T(0), T(0)};
}
template <typename T> bool isfinite(const Dual<T>& a) { return std::isfinite(a.v) && std::isfinite(a.d); }

template <typename T> T value_of(const Dual<T>& a) { return a.v; }
inline double value_of(double a) { return a; }

}  // namespace nl

namespace Eigen {

template <typename T>
struct NumTraits<nl::Dual<T>> : NumTraits<T> {
  using Real = nl::Dual<T>;
  using NonInteger = nl::Dual<T>;
  using Nested = nl::Dual<T>;
  using Literal = nl::Dual<T>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 2,
    MulCost = 4,
  };
};

template <typename T, typename BinaryOp>
struct ScalarBinaryOpTraits<nl::Dual<T>, T, BinaryOp> {
  using ReturnType = nl::Dual<T>;
};
template <typename T, typename BinaryOp>
struct ScalarBinaryOpTraits<T, nl::Dual<T>, BinaryOp> {
  using ReturnType = nl::Dual<T>;
};

}  // namespace Eigen
