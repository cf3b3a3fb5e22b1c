#include "sermt/crypto/sha1.hpp"

#include <openssl/evp.h>

namespace sermt::crypto {

Digest sha1(ByteView data) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha1(), nullptr) != 1 ||
      len != kDigestSize) {
    throw std::runtime_error("EVP_Digest(sha1) failed");
  }
  return out;
}

Digest hmac(ByteView key, ByteView message) {
  Digest out{};
  std::size_t len = 0;
  // EVP_Q_mac rejects a null key pointer even for zero length.
  static const std::uint8_t kEmpty = 0;
  const std::uint8_t* key_ptr = key.empty() ? &kEmpty : key.data();
  if (EVP_Q_mac(nullptr, "HMAC", nullptr, "SHA1", nullptr, key_ptr, key.size(), message.data(),
                message.size(), out.data(), out.size(), &len) == nullptr ||
      len != kDigestSize) {
    throw std::runtime_error("EVP_Q_mac(HMAC-SHA1) failed");
  }
  return out;
}

Digest nested_hmac(ByteView outer_key, ByteView inner_key, ByteView message) {
  const Digest inner = hmac(inner_key, message);
  return hmac(outer_key, inner);
}

bool verify_hmac(ByteView key, ByteView message, ByteView tag) {
  return equal_constant_shape(hmac(key, message), tag);
}

bool verify_nested_hmac(ByteView outer_key, ByteView inner_key, ByteView message, ByteView tag) {
  return equal_constant_shape(nested_hmac(outer_key, inner_key, message), tag);
}

std::size_t sha1_blocks(std::size_t bytes) { return (bytes + 8) / kSha1BlockSize + 1; }

std::size_t hmac_blocks(std::size_t bytes) {
  // inner: key block + message; outer: key block + inner digest
  return sha1_blocks(kSha1BlockSize + bytes) + sha1_blocks(kSha1BlockSize + kDigestSize);
}

}  // namespace sermt::crypto
