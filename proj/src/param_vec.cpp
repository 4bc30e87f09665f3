#include "frain/param_vec.hpp"

#include "frain/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

namespace frain {

namespace {

constexpr char kMagic[4] = {'F', 'R', 'N', '1'};

void require_same_dim(const ParamVec& a, const ParamVec& b, const char* where) {
  if (a.dim() != b.dim()) throw DimensionMismatch(a.dim(), b.dim(), where);
}

void require_alpha(double alpha, const char* where) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::out_of_range(std::string(where) + ": alpha must lie in [0, 1], got " + std::to_string(alpha));
}

void put_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64_le(std::span<const std::uint8_t> in) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | in[static_cast<std::size_t>(i)];
  return v;
}

ParamVec combine(double wa, const ParamVec& a, double wb, const ParamVec& b) {
  std::vector<double> out(a.dim());
  kernels::combine(wa, a.values(), wb, b.values(), out);
  return ParamVec(std::move(out));
}

}  // namespace

DimensionMismatch::DimensionMismatch(std::size_t lhs, std::size_t rhs, const std::string& where)
    : std::invalid_argument(where + ": dimension mismatch (" + std::to_string(lhs) + " vs " +
                            std::to_string(rhs) + ")"),
      lhs_dim(lhs),
      rhs_dim(rhs) {}

ParamVec::ParamVec(std::vector<double> data) : data_(std::move(data)) {
  if (data_.empty()) throw std::invalid_argument("ParamVec: dim must be >= 1");
  if (!kernels::all_finite(data_)) throw std::invalid_argument("ParamVec: non-finite entry");
}

ParamVec::ParamVec(std::initializer_list<double> values) : ParamVec(std::vector<double>(values)) {}

ParamVec ParamVec::zeros(std::size_t dim) { return ParamVec(std::vector<double>(dim, 0.0)); }

const char* to_string(SlerpPath path) {
  switch (path) {
    case SlerpPath::spherical: return "spherical";
    case SlerpPath::parallel_fallback: return "parallel_fallback";
    case SlerpPath::antipodal_fallback: return "antipodal_fallback";
    case SlerpPath::zero_norm_fallback: return "zero_norm_fallback";
  }
  return "unknown";
}

double dot(const ParamVec& a, const ParamVec& b) {
  require_same_dim(a, b, "dot");
  return kernels::dot(a.values(), b.values());
}

double norm(const ParamVec& a) { return std::sqrt(kernels::dot(a.values(), a.values())); }

double angle(const ParamVec& a, const ParamVec& b) {
  require_same_dim(a, b, "angle");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0) throw std::domain_error("angle: first operand has zero norm");
  if (nb == 0.0) throw std::domain_error("angle: second operand has zero norm");
  // 2 atan2(|u - v|, |u + v|) on unit vectors stays accurate near 0 and pi.
  const auto x = a.values();
  const auto y = b.values();
  double diff = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = x[i] / na;
    const double v = y[i] / nb;
    diff += (u - v) * (u - v);
    sum += (u + v) * (u + v);
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

ParamVec lerp(const ParamVec& a, const ParamVec& b, double alpha) {
  require_same_dim(a, b, "lerp");
  require_alpha(alpha, "lerp");
  return combine(1.0 - alpha, a, alpha, b);
}

SlerpResult slerp_traced(const ParamVec& a, const ParamVec& b, double alpha) {
  require_same_dim(a, b, "slerp");
  require_alpha(alpha, "slerp");
  if (norm(a) == 0.0 || norm(b) == 0.0) return {lerp(a, b, alpha), SlerpPath::zero_norm_fallback};

  const double theta = angle(a, b);
  const double s = std::sin(theta);
  if (s < kSlerpEpsilon) {
    const auto path = theta < std::numbers::pi / 2 ? SlerpPath::parallel_fallback : SlerpPath::antipodal_fallback;
    return {lerp(a, b, alpha), path};
  }
  const double wa = std::sin((1.0 - alpha) * theta) / s;
  const double wb = std::sin(alpha * theta) / s;
  return {combine(wa, a, wb, b), SlerpPath::spherical};
}

ParamVec slerp(const ParamVec& a, const ParamVec& b, double alpha) { return slerp_traced(a, b, alpha).value; }

std::vector<std::uint8_t> encode_checkpoint(const ParamVec& a) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + 8 * a.dim());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u64_le(out, a.dim());
  for (double v : a.values()) put_u64_le(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

ParamVec decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw std::runtime_error("checkpoint: missing FRN1 header");
  const std::uint64_t dim = get_u64_le(bytes.subspan(4, 8));
  if (dim == 0) throw std::runtime_error("checkpoint: dim is zero");
  if ((bytes.size() - 12) / 8 != dim || (bytes.size() - 12) % 8 != 0)
    throw std::runtime_error("checkpoint: payload holds " + std::to_string(bytes.size() - 12) +
                             " bytes, header declares dim " + std::to_string(dim));
  std::vector<double> data(dim);
  for (std::size_t i = 0; i < dim; ++i) data[i] = std::bit_cast<double>(get_u64_le(bytes.subspan(12 + 8 * i, 8)));
  return ParamVec(std::move(data));
}

void write_checkpoint(const std::filesystem::path& path, const ParamVec& a) {
  const auto bytes = encode_checkpoint(a);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

ParamVec read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

ModelDigest digest(const ParamVec& a) { return sha256(encode_checkpoint(a)); }

}  // namespace frain
