#pragma once

#include <array>

#include "sermt/crypto/bytes.hpp"

namespace sermt::crypto {

inline constexpr std::size_t kDigestSize = 20;
inline constexpr std::size_t kSha1BlockSize = 64;
using Digest = std::array<std::uint8_t, kDigestSize>;

Digest sha1(ByteView data);
Digest hmac(ByteView key, ByteView message);

/// HMAC(outer_key; HMAC(inner_key; message)). The outer key is the network
/// global key, the inner key a pairwise ECDH secret.
Digest nested_hmac(ByteView outer_key, ByteView inner_key, ByteView message);

bool verify_hmac(ByteView key, ByteView message, ByteView tag);
bool verify_nested_hmac(ByteView outer_key, ByteView inner_key, ByteView message, ByteView tag);

/// SHA-1 compression-function invocations needed to hash `bytes` bytes
/// (used for computation-energy accounting).
std::size_t sha1_blocks(std::size_t bytes);
/// Compression-function invocations for one HMAC over `bytes` bytes.
std::size_t hmac_blocks(std::size_t bytes);

}  // namespace sermt::crypto
