#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

namespace frain {

/// 32-byte SHA-256 digest. Used both as a model content address and as a
/// sealed commit-and-reveal commitment.
struct Digest32 {
  std::array<std::uint8_t, 32> bytes{};

  std::string hex() const;
  static Digest32 from_hex(const std::string& hex);

  friend auto operator<=>(const Digest32&, const Digest32&) = default;
};

using ModelDigest = Digest32;

Digest32 sha256(std::span<const std::uint8_t> data);

struct Digest32Hash {
  std::size_t operator()(const Digest32& d) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | d.bytes[i];
    return h;
  }
};

}  // namespace frain
