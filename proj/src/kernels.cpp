#include "frain/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace frain::kernels {

namespace serial {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void combine(double wa, std::span<const double> a, double wb, std::span<const double> b,
             std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = wa * a[i] + wb * b[i];
}

void axpy(double w, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += w * x[i];
}

bool all_finite(std::span<const double> a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace serial

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n < kParallelThreshold) return serial::dot(a, b);

  const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(blocks, 0.0);
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t blk = 0; blk < nb; ++blk) {
    const std::size_t lo = static_cast<std::size_t>(blk) * kReduceBlock;
    const std::size_t hi = std::min(n, lo + kReduceBlock);
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += a[i] * b[i];
    partial[static_cast<std::size_t>(blk)] = acc;
  }
  double acc = 0.0;
  for (double p : partial) acc += p;
  return acc;
}

void combine(double wa, std::span<const double> a, double wb, std::span<const double> b,
             std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  if (out.size() < kParallelThreshold) return serial::combine(wa, a, wb, b, out);
#pragma omp parallel for simd schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = wa * a[i] + wb * b[i];
}

void axpy(double w, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(y.size());
  if (y.size() < kParallelThreshold) return serial::axpy(w, x, y);
#pragma omp parallel for simd schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += w * x[i];
}

bool all_finite(std::span<const double> a) {
  const auto n = static_cast<std::ptrdiff_t>(a.size());
  if (a.size() < kParallelThreshold) return serial::all_finite(a);
  int bad = 0;
#pragma omp parallel for reduction(| : bad) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) bad |= std::isfinite(a[i]) ? 0 : 1;
  return bad == 0;
}

}  // namespace frain::kernels
