#pragma once

// Independent reference computations used by tests. None of these call into
// the library's arithmetic.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace oracle {

/// Spherical interpolation evaluated in long double.
inline std::vector<long double> slerp_ld(const std::vector<double>& a, const std::vector<double>& b, double alpha) {
  long double aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa += static_cast<long double>(a[i]) * a[i];
    bb += static_cast<long double>(b[i]) * b[i];
  }
  const long double na = std::sqrt(aa), nb = std::sqrt(bb);
  long double diff = 0, sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double u = a[i] / na, v = b[i] / nb;
    diff += (u - v) * (u - v);
    sum += (u + v) * (u + v);
  }
  const long double theta = 2 * std::atan2(std::sqrt(diff), std::sqrt(sum));
  const long double s = std::sin(theta);
  const long double wa = std::sin((1.0L - alpha) * theta) / s;
  const long double wb = std::sin(static_cast<long double>(alpha) * theta) / s;
  std::vector<long double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = wa * a[i] + wb * b[i];
  return out;
}

inline std::vector<double> gaussian(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = g(rng);
  return v;
}

inline double l2(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += static_cast<long double>(x) * x;
  return static_cast<double>(std::sqrt(s));
}

inline std::vector<double> unit(std::vector<double> v) {
  const double n = l2(v);
  for (auto& x : v) x /= n;
  return v;
}

/// (1 - t) * a + t * b, straight-line.
inline std::vector<double> mix(const std::vector<double>& a, const std::vector<double>& b, double t) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - t) * a[i] + t * b[i];
  return out;
}

}  // namespace oracle
