#include "sermt/protocol/network.hpp"

#include "sermt/protocol/formulas.hpp"

namespace sermt::protocol {

void validate(const ProtocolConfig& cfg) {
  auto fail = [](const char* what) { throw ProtocolError(ProtocolError::Kind::Config, what); };
  if (!(cfg.trust_interval > 0)) fail("trust_interval must be > 0");
  if (!(cfg.round_duration >= 0) || cfg.round_duration >= cfg.trust_interval)
    fail("round_duration must be in [0, trust_interval)");
  if (cfg.test_messages < 1 || cfg.test_messages > 255) fail("test_messages must be in [1, 255]");
  if (!(cfg.mu_interval > 0) || !(cfg.pmu_interval > 0) || !(cfg.es_probe_interval > 0) ||
      !(cfg.recharge_interval > 0))
    fail("intervals must be > 0");
  if (cfg.mu_reading_bytes == 0 || cfg.pmu_sample_bytes == 0) fail("payload sizes must be > 0");
  if (cfg.chain_length < 3) fail("chain_length must be >= 3");
  if (cfg.chain_window < 1) fail("chain_window must be >= 1");
}

Bytes encode_aggregate(const std::vector<Reading>& readings) {
  Bytes out;
  crypto::put_u16_be(out, static_cast<std::uint16_t>(readings.size()));
  for (const auto& r : readings) {
    crypto::put_u32_be(out, r.source);
    crypto::put_u32_be(out, r.seq);
    crypto::put_u16_be(out, static_cast<std::uint16_t>(r.data.size()));
    crypto::append(out, r.data);
  }
  return out;
}

std::vector<Reading> parse_aggregate(ByteView data) {
  auto fail = [] { throw crypto::CryptoError(crypto::CryptoErrorKind::Format, "malformed aggregate"); };
  if (data.size() < 2) fail();
  const std::size_t n = crypto::get_u16_be(data, 0);
  std::size_t at = 2;
  std::vector<Reading> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (at + 10 > data.size()) fail();
    Reading r;
    r.source = crypto::get_u32_be(data, at);
    r.seq = crypto::get_u32_be(data, at + 4);
    const std::size_t len = crypto::get_u16_be(data, at + 8);
    at += 10;
    if (at + len > data.size()) fail();
    r.data.assign(data.begin() + static_cast<std::ptrdiff_t>(at), data.begin() + static_cast<std::ptrdiff_t>(at + len));
    at += len;
    out.push_back(std::move(r));
  }
  if (at != data.size()) fail();
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  h = mix(h ^ a);
  h = mix(h ^ b);
  return mix(h ^ c);
}

Bytes reading_bytes(std::uint64_t seed, EntityId source, std::uint32_t seq, std::size_t len) {
  Bytes out;
  out.reserve(len);
  for (std::uint64_t block = 0; out.size() < len; ++block) {
    std::uint64_t v = derive_seed(seed, source, seq, block);
    for (int i = 0; i < 8 && out.size() < len; ++i, v >>= 8) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

}  // namespace sermt::protocol
