#pragma once

// Dense vector kernels over contiguous doubles.
//
// Two implementations share one signature set:
//   frain::kernels::serial  plain loops, kept as the reference for tests
//   frain::kernels          OpenMP-parallel, used by the library
//
// The parallel reductions sum fixed-size blocks and then fold the block
// partials in index order, so results do not depend on the thread count.

#include <cstddef>
#include <span>

namespace frain::kernels {

/// Vectors shorter than this run the serial loop; thread start-up dominates below it.
inline constexpr std::size_t kParallelThreshold = 1u << 15;

/// Block length for deterministic parallel reductions.
inline constexpr std::size_t kReduceBlock = 4096;

double dot(std::span<const double> a, std::span<const double> b);

/// out[i] = wa * a[i] + wb * b[i]
void combine(double wa, std::span<const double> a, double wb, std::span<const double> b,
             std::span<double> out);

/// y[i] += w * x[i]
void axpy(double w, std::span<const double> x, std::span<double> y);

bool all_finite(std::span<const double> a);

namespace serial {

double dot(std::span<const double> a, std::span<const double> b);
void combine(double wa, std::span<const double> a, double wb, std::span<const double> b,
             std::span<double> out);
void axpy(double w, std::span<const double> x, std::span<double> y);
bool all_finite(std::span<const double> a);

}  // namespace serial

}  // namespace frain::kernels
