#include "frain/digest.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace frain {

std::string Digest32::hex() const {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (auto b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

Digest32 Digest32::from_hex(const std::string& hex) {
  if (hex.size() != 64) throw std::invalid_argument("digest hex must be 64 characters, got " + std::to_string(hex.size()));
  auto nibble = [](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw std::invalid_argument(std::string("invalid hex character '") + c + "'");
  };
  Digest32 d;
  for (std::size_t i = 0; i < 32; ++i)
    d.bytes[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
  return d;
}

Digest32 sha256(std::span<const std::uint8_t> data) {
  Digest32 d;
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), d.bytes.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32)
    throw std::runtime_error("SHA-256 computation failed");
  return d;
}

}  // namespace frain
