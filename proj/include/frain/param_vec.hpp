#pragma once

// Flat parameter-vector arithmetic: the single model representation used by
// training, merging and checkpointing.

#include "frain/digest.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace frain {

/// Thrown when two operands have different dimensions.
class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(std::size_t lhs, std::size_t rhs, const std::string& where);
  std::size_t lhs_dim;
  std::size_t rhs_dim;
};

/// Model weights as one contiguous vector of finite doubles, dim >= 1.
class ParamVec {
 public:
  explicit ParamVec(std::vector<double> data);
  ParamVec(std::initializer_list<double> values);

  static ParamVec zeros(std::size_t dim);

  std::size_t dim() const noexcept { return data_.size(); }
  std::span<const double> values() const noexcept { return data_; }
  double operator[](std::size_t i) const { return data_[i]; }
  const std::vector<double>& raw() const noexcept { return data_; }

  /// Mutable access for in-place training; callers keep entries finite.
  std::span<double> mutable_values() noexcept { return data_; }

  friend bool operator==(const ParamVec&, const ParamVec&) = default;

 private:
  std::vector<double> data_;
};

/// Which branch slerp took.
enum class SlerpPath {
  spherical,
  parallel_fallback,   // sin(theta) below epsilon with theta near 0
  antipodal_fallback,  // sin(theta) below epsilon with theta near pi
  zero_norm_fallback,
};

const char* to_string(SlerpPath path);

struct SlerpResult {
  ParamVec value;
  SlerpPath path;
};

/// sin(theta) threshold below which slerp degenerates to lerp.
inline constexpr double kSlerpEpsilon = 1e-7;

double dot(const ParamVec& a, const ParamVec& b);
double norm(const ParamVec& a);

/// Angle in [0, pi]; the cosine is clamped to [-1, 1] before arccos.
/// Throws std::domain_error naming the operand when either has zero norm.
double angle(const ParamVec& a, const ParamVec& b);

/// (1 - alpha) * a + alpha * b
ParamVec lerp(const ParamVec& a, const ParamVec& b, double alpha);

/// Spherical interpolation along the great circle from a to b. Falls back to
/// lerp when either operand is zero or sin(theta) < kSlerpEpsilon.
ParamVec slerp(const ParamVec& a, const ParamVec& b, double alpha);
SlerpResult slerp_traced(const ParamVec& a, const ParamVec& b, double alpha);

/// Canonical checkpoint encoding: "FRN1", u64 LE dim, dim x f64 LE.
std::vector<std::uint8_t> encode_checkpoint(const ParamVec& a);
ParamVec decode_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const std::filesystem::path& path, const ParamVec& a);
ParamVec read_checkpoint(const std::filesystem::path& path);

/// SHA-256 of encode_checkpoint(a).
ModelDigest digest(const ParamVec& a);

}  // namespace frain
