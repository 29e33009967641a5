#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace dpplab {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
inline Vec<N> operator+(Vec<N> a, const Vec<N>& b) {
  for (std::size_t i = 0; i < N; ++i) a[i] += b[i];
  return a;
}

template <std::size_t N>
inline Vec<N> operator-(Vec<N> a, const Vec<N>& b) {
  for (std::size_t i = 0; i < N; ++i) a[i] -= b[i];
  return a;
}

template <std::size_t N>
inline Vec<N> operator-(Vec<N> a) {
  for (auto& v : a) v = -v;
  return a;
}

template <std::size_t N>
inline Vec<N> operator*(double s, Vec<N> a) {
  for (auto& v : a) v *= s;
  return a;
}

template <std::size_t N>
inline double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t N>
inline double norm2(const Vec<N>& a) { return dot(a, a); }

template <std::size_t N>
inline double norm(const Vec<N>& a) { return std::sqrt(norm2(a)); }

template <std::size_t N>
inline Vec<N> filled(double v) {
  Vec<N> a;
  a.fill(v);
  return a;
}

template <std::size_t N>
inline Vec<N> unit(std::size_t i) {
  Vec<N> a{};
  a[i] = 1.0;
  return a;
}

// volume of the unit ball in R^N
inline double unit_ball_volume(std::size_t n) {
  constexpr double pi = 3.14159265358979323846;
  return std::pow(pi, 0.5 * static_cast<double>(n)) / std::tgamma(0.5 * static_cast<double>(n) + 1.0);
}

inline constexpr double pi = 3.14159265358979323846;

}  // namespace dpplab
