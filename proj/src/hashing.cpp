#include "drpo/hashing.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace drpo {
namespace {

std::array<unsigned char, 32> sha256(std::string_view data)
{
  std::array<unsigned char, 32> out{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &length, EVP_sha256(), nullptr) != 1 ||
      length != out.size()) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  return out;
}

} // namespace

std::string sha256_hex(std::string_view data)
{
  static constexpr char kHex[] = "0123456789abcdef";
  const auto digest = sha256(data);
  std::string hex;
  hex.reserve(digest.size() * 2);
  for (unsigned char byte : digest) {
    hex.push_back(kHex[byte >> 4]);
    hex.push_back(kHex[byte & 0x0f]);
  }
  return hex;
}

std::uint64_t digest64(std::string_view data)
{
  const auto digest = sha256(data);
  std::uint64_t value = 0;
  for (int i = 0; i < 8; ++i) {
    value = (value << 8) | digest[i];
  }
  return value;
}

} // namespace drpo
