#include "brx/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace brx {

namespace {

std::array<unsigned char, 32> digest(std::string_view data) {
  std::array<unsigned char, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size()) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (unsigned char b : digest(data)) {
    out += kHex[b >> 4];
    out += kHex[b & 0xf];
  }
  return out;
}

std::uint64_t sha256_u64(std::string_view data) {
  const auto d = digest(data);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | d[static_cast<std::size_t>(i)];
  return v;
}

std::string content_id(std::string_view prefix, std::string_view canonical) {
  return std::string(prefix) + "-" + sha256_hex(canonical).substr(0, 16);
}

}  // namespace brx
