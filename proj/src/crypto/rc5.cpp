#include "sermt/crypto/rc5.hpp"

#include <algorithm>
#include <bit>

namespace sermt::crypto {
namespace {

constexpr std::uint32_t kP32 = 0xB7E15163u;
constexpr std::uint32_t kQ32 = 0x9E3779B9u;

std::uint32_t load_le(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
         std::uint32_t{p[3]} << 24;
}

void store_le(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

}  // namespace

Rc5::Rc5(ByteView key) {
  if (key.size() != kRc5KeySize) {
    throw CryptoError(CryptoErrorKind::InvalidKey, "RC5 key must be 16 bytes");
  }
  constexpr std::size_t c = kRc5KeySize / 4;
  std::array<std::uint32_t, c> words{};
  for (std::size_t i = kRc5KeySize; i-- > 0;) words[i / 4] = (words[i / 4] << 8) + key[i];

  schedule_[0] = kP32;
  for (std::size_t i = 1; i < schedule_.size(); ++i) schedule_[i] = schedule_[i - 1] + kQ32;

  std::uint32_t a = 0, b = 0;
  std::size_t i = 0, j = 0;
  const std::size_t t = schedule_.size();
  for (std::size_t k = 0; k < 3 * std::max(t, c); ++k) {
    a = schedule_[i] = std::rotl(schedule_[i] + a + b, 3);
    b = words[j] = std::rotl(words[j] + a + b, static_cast<int>((a + b) & 31));
    i = (i + 1) % t;
    j = (j + 1) % c;
  }
}

Rc5Block Rc5::encrypt_block(const Rc5Block& in) const {
  std::uint32_t a = load_le(in.data()) + schedule_[0];
  std::uint32_t b = load_le(in.data() + 4) + schedule_[1];
  for (int r = 1; r <= kRc5Rounds; ++r) {
    a = std::rotl(a ^ b, static_cast<int>(b & 31)) + schedule_[2 * r];
    b = std::rotl(b ^ a, static_cast<int>(a & 31)) + schedule_[2 * r + 1];
  }
  Rc5Block out{};
  store_le(out.data(), a);
  store_le(out.data() + 4, b);
  return out;
}

Rc5Block Rc5::decrypt_block(const Rc5Block& in) const {
  std::uint32_t a = load_le(in.data());
  std::uint32_t b = load_le(in.data() + 4);
  for (int r = kRc5Rounds; r >= 1; --r) {
    b = std::rotr(b - schedule_[2 * r + 1], static_cast<int>(a & 31)) ^ a;
    a = std::rotr(a - schedule_[2 * r], static_cast<int>(b & 31)) ^ b;
  }
  Rc5Block out{};
  store_le(out.data(), a - schedule_[0]);
  store_le(out.data() + 4, b - schedule_[1]);
  return out;
}

Bytes rc5_key_from_secret(ByteView secret) {
  Bytes key(kRc5KeySize, 0);
  if (secret.size() >= kRc5KeySize) {
    std::copy(secret.end() - kRc5KeySize, secret.end(), key.begin());
  } else {
    std::copy(secret.begin(), secret.end(), key.end() - static_cast<std::ptrdiff_t>(secret.size()));
  }
  return key;
}

std::size_t rc5_ciphertext_size(std::size_t plain_bytes) {
  return (4 + plain_bytes + kRc5BlockSize - 1) / kRc5BlockSize * kRc5BlockSize;
}

Bytes rc5_encrypt(ByteView key, ByteView plaintext) {
  const Rc5 cipher(key);
  Bytes padded;
  padded.reserve(rc5_ciphertext_size(plaintext.size()));
  put_u32_be(padded, static_cast<std::uint32_t>(plaintext.size()));
  append(padded, plaintext);
  padded.resize(rc5_ciphertext_size(plaintext.size()), 0);

  Rc5Block chain{};
  Bytes out(padded.size());
  for (std::size_t off = 0; off < padded.size(); off += kRc5BlockSize) {
    Rc5Block block{};
    for (std::size_t k = 0; k < kRc5BlockSize; ++k) block[k] = padded[off + k] ^ chain[k];
    chain = cipher.encrypt_block(block);
    std::copy(chain.begin(), chain.end(), out.begin() + static_cast<std::ptrdiff_t>(off));
  }
  return out;
}

Bytes rc5_decrypt(ByteView key, ByteView ciphertext) {
  if (ciphertext.empty() || ciphertext.size() % kRc5BlockSize != 0) {
    throw CryptoError(CryptoErrorKind::Format, "RC5 ciphertext is not a whole number of blocks");
  }
  const Rc5 cipher(key);
  Rc5Block chain{};
  Bytes padded(ciphertext.size());
  for (std::size_t off = 0; off < ciphertext.size(); off += kRc5BlockSize) {
    Rc5Block block{};
    std::copy_n(ciphertext.begin() + static_cast<std::ptrdiff_t>(off), kRc5BlockSize, block.begin());
    const Rc5Block plain = cipher.decrypt_block(block);
    for (std::size_t k = 0; k < kRc5BlockSize; ++k) padded[off + k] = plain[k] ^ chain[k];
    chain = block;
  }
  const std::size_t len = get_u32_be(padded, 0);
  if (len > padded.size() - 4 || rc5_ciphertext_size(len) != padded.size()) {
    throw CryptoError(CryptoErrorKind::Integrity, "RC5 padding check failed");
  }
  for (std::size_t k = 4 + len; k < padded.size(); ++k) {
    if (padded[k] != 0) throw CryptoError(CryptoErrorKind::Integrity, "RC5 padding check failed");
  }
  return Bytes(padded.begin() + 4, padded.begin() + 4 + static_cast<std::ptrdiff_t>(len));
}

}  // namespace sermt::crypto
