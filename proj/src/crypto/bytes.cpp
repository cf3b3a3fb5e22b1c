#include "sermt/crypto/bytes.hpp"

namespace sermt::crypto {

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw CryptoError(CryptoErrorKind::Format, "bad hex digit");
  };
  Bytes out;
  int hi = -1;
  for (char c : hex) {
    if (c == ' ') continue;
    int v = nibble(c);
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(static_cast<std::uint8_t>(hi << 4 | v));
      hi = -1;
    }
  }
  if (hi >= 0) throw CryptoError(CryptoErrorKind::Format, "odd hex length");
  return out;
}

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(data.size() * 2);
  for (auto b : data) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xf]);
  }
  return s;
}

void append(Bytes& out, ByteView data) { out.insert(out.end(), data.begin(), data.end()); }

void put_u16_be(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32_be(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint16_t get_u16_be(ByteView in, std::size_t offset) {
  return static_cast<std::uint16_t>(in[offset] << 8 | in[offset + 1]);
}

std::uint32_t get_u32_be(ByteView in, std::size_t offset) {
  return std::uint32_t{in[offset]} << 24 | std::uint32_t{in[offset + 1]} << 16 |
         std::uint32_t{in[offset + 2]} << 8 | std::uint32_t{in[offset + 3]};
}

bool equal_constant_shape(ByteView a, ByteView b) {
  if (a.size() != b.size()) return false;
  std::uint8_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff |= a[i] ^ b[i];
  return diff == 0;
}

}  // namespace sermt::crypto
