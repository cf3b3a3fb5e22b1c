#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sermt::crypto {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

enum class CryptoErrorKind { InvalidKey, Format, Integrity };

class CryptoError : public std::runtime_error {
 public:
  CryptoError(CryptoErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  CryptoErrorKind kind() const noexcept { return kind_; }

 private:
  CryptoErrorKind kind_;
};

Bytes to_bytes(std::string_view s);
Bytes from_hex(std::string_view hex);
std::string to_hex(ByteView data);

void append(Bytes& out, ByteView data);
void put_u16_be(Bytes& out, std::uint16_t v);
void put_u32_be(Bytes& out, std::uint32_t v);
std::uint16_t get_u16_be(ByteView in, std::size_t offset);
std::uint32_t get_u32_be(ByteView in, std::size_t offset);

template <typename... Parts>
Bytes concat(const Parts&... parts) {
  Bytes out;
  (append(out, ByteView(parts)), ...);
  return out;
}

// Comparison whose running time depends only on the lengths.
bool equal_constant_shape(ByteView a, ByteView b);

}  // namespace sermt::crypto
