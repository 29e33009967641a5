#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace dpplab {

// Pairwise summation with a fixed split rule; the result depends only on the input order.
inline double tree_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return tree_sum(v.subspan(0, half)) + tree_sum(v.subspan(half));
}

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  double se = 0.0;        // stdev / sqrt(n)
};

inline Moments moments(std::span<const double> v) {
  Moments m;
  m.n = v.size();
  if (m.n == 0) return m;
  m.mean = tree_sum(v) / static_cast<double>(m.n);
  if (m.n > 1) {
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m.mean) * (v[i] - m.mean);
    m.variance = tree_sum(sq) / static_cast<double>(m.n - 1);
    m.se = std::sqrt(m.variance / static_cast<double>(m.n));
  }
  return m;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit needs >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = tree_sum(x) / n, my = tree_sum(y) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace dpplab
