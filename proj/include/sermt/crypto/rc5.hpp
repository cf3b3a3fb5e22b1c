#pragma once

#include <array>

#include "sermt/crypto/bytes.hpp"

namespace sermt::crypto {

// RC5-32/12/16: 32-bit words, 12 rounds, 16-byte key, 8-byte blocks.
inline constexpr std::size_t kRc5BlockSize = 8;
inline constexpr std::size_t kRc5KeySize = 16;
inline constexpr int kRc5Rounds = 12;

using Rc5Block = std::array<std::uint8_t, kRc5BlockSize>;

class Rc5 {
 public:
  explicit Rc5(ByteView key);

  Rc5Block encrypt_block(const Rc5Block& in) const;
  Rc5Block decrypt_block(const Rc5Block& in) const;

 private:
  std::array<std::uint32_t, 2 * (kRc5Rounds + 1)> schedule_{};
};

/// Fits an arbitrary-length secret into a 16-byte RC5 key: shorter secrets are
/// right-aligned over zero bytes, longer ones keep their last 16 bytes.
Bytes rc5_key_from_secret(ByteView secret);

/// CBC with a zero IV over the padded message. Padding is a 4-byte big-endian
/// length prefix followed by the plaintext and zero fill up to a whole block.
Bytes rc5_encrypt(ByteView key, ByteView plaintext);

/// Throws CryptoError(Format) for a length that is not a positive block
/// multiple and CryptoError(Integrity) when the recovered padding is invalid.
Bytes rc5_decrypt(ByteView key, ByteView ciphertext);

/// Ciphertext length for a plaintext of `plain_bytes`.
std::size_t rc5_ciphertext_size(std::size_t plain_bytes);

}  // namespace sermt::crypto
