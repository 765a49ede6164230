/// @file dual.hpp
/// @brief Forward-mode dual numbers carrying N derivative slots.
///
/// Used to push exact derivatives of algebraic post-processing (spread-rate
/// closures, residual assembly, diagnostics) through to the seed adjoints of
/// the network backward pass. Not used for the network itself, which has its
/// own tangent/adjoint propagation.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace firefront {

template <std::size_t N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};  // value-initialized: all zero

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT: implicit constant lift

  static Dual seeded(double value, std::size_t slot) {
    Dual r(value);
    r.d[slot] = 1.0;
    return r;
  }

  Dual operator-() const {
    Dual r(-v);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = -d[i];
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }

  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r(a.v * b.v);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
  }
  friend Dual operator*(const Dual& a, double s) {
    Dual r(a.v * s);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = a.d[i] * s;
    return r;
  }
  friend Dual operator*(double s, const Dual& a) { return a * s; }

  friend Dual operator/(const Dual& a, const Dual& b) {
    const double inv = 1.0 / b.v;
    Dual r(a.v * inv);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
    return r;
  }
  friend Dual operator/(const Dual& a, double s) { return a * (1.0 / s); }
  friend Dual operator/(double s, const Dual& b) { return Dual(s) / b; }
};

template <std::size_t N>
inline Dual<N> sqrt(const Dual<N>& a) {
  Dual<N> r(std::sqrt(a.v));
  const double k = 0.5 / r.v;
  for (std::size_t i = 0; i < N; ++i) r.d[i] = k * a.d[i];
  return r;
}

template <std::size_t N>
inline Dual<N> exp(const Dual<N>& a) {
  Dual<N> r(std::exp(a.v));
  for (std::size_t i = 0; i < N; ++i) r.d[i] = r.v * a.d[i];
  return r;
}

template <std::size_t N>
inline Dual<N> log(const Dual<N>& a) {
  Dual<N> r(std::log(a.v));
  const double k = 1.0 / a.v;
  for (std::size_t i = 0; i < N; ++i) r.d[i] = k * a.d[i];
  return r;
}

/// pow with a constant exponent; base must be > 0, or == 0 with e >= 1
/// (the clamped closures guarantee this).
template <std::size_t N>
inline Dual<N> pow(const Dual<N>& a, double e) {
  Dual<N> r(std::pow(a.v, e));
  const double k = e * std::pow(a.v, e - 1.0);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = k * a.d[i];
  return r;
}

// --- Branch helpers shared between plain-double and dual code paths. ---
// Branching on value_of keeps the classical solver and the autodiff path
// running literally the same expressions.

inline double value_of(double x) { return x; }
template <std::size_t N>
inline double value_of(const Dual<N>& x) { return x.v; }

/// max(0, x) with the derivative of the surviving branch (0 at x <= 0).
template <class T>
inline T positive_part(const T& x) {
  return value_of(x) > 0.0 ? x : T(0.0);
}

/// min(x, cap) with the derivative of the surviving branch.
template <class T>
inline T cap_at(const T& x, double cap) {
  return value_of(x) < cap ? x : T(cap);
}

inline double pow_t(double a, double e) { return std::pow(a, e); }
template <std::size_t N>
inline Dual<N> pow_t(const Dual<N>& a, double e) { return pow(a, e); }

inline double sqrt_t(double a) { return std::sqrt(a); }
template <std::size_t N>
inline Dual<N> sqrt_t(const Dual<N>& a) { return sqrt(a); }

inline double exp_t(double a) { return std::exp(a); }
template <std::size_t N>
inline Dual<N> exp_t(const Dual<N>& a) { return exp(a); }

inline double log1p_t(double a) { return std::log1p(a); }
template <std::size_t N>
inline Dual<N> log1p_t(const Dual<N>& a) {
  Dual<N> r(std::log1p(a.v));
  const double k = 1.0 / (1.0 + a.v);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = k * a.d[i];
  return r;
}

}  // namespace firefront
