#include "sermt/protocol/trust_table.hpp"

namespace sermt::protocol {

void TrustTable::set(const TrustRecord& rec) {
  (void)rec.tv();  // rejects sent == 0
  records_[rec.id] = rec;
}

void TrustTable::merge(const TrustTable& other) {
  for (const auto& [id, rec] : other.records_) {
    auto it = records_.find(id);
    if (it == records_.end() || it->second.timestamp_ms <= rec.timestamp_ms) records_[id] = rec;
  }
}

std::optional<TrustRecord> TrustTable::find(EntityId id) const {
  auto it = records_.find(id);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

double TrustTable::tv(EntityId id) const {
  auto it = records_.find(id);
  return it == records_.end() ? 100.0 : it->second.tv();
}

bool TrustTable::blocked(EntityId id) const { return !is_trusted(tv(id)); }

std::vector<EntityId> TrustTable::threat_list() const {
  std::vector<EntityId> out;
  for (const auto& [id, rec] : records_)
    if (!is_trusted(rec.tv())) out.push_back(id);
  return out;
}

std::vector<EntityId> TrustTable::trusted_list() const {
  std::vector<EntityId> out;
  for (const auto& [id, rec] : records_)
    if (is_trusted(rec.tv())) out.push_back(id);
  return out;
}

crypto::Bytes TrustTable::serialize() const {
  crypto::Bytes out;
  out.reserve(4 + 10 * records_.size());
  crypto::put_u32_be(out, static_cast<std::uint32_t>(records_.size()));
  for (const auto& [id, rec] : records_) {
    crypto::put_u32_be(out, id);
    out.push_back(rec.delivered);
    out.push_back(rec.sent);
    crypto::put_u32_be(out, rec.timestamp_ms);
  }
  return out;
}

TrustTable TrustTable::parse(crypto::ByteView data) {
  if (data.size() < 4) throw crypto::CryptoError(crypto::CryptoErrorKind::Format, "truncated trust table");
  const std::size_t n = crypto::get_u32_be(data, 0);
  if (data.size() != 4 + 10 * n) throw crypto::CryptoError(crypto::CryptoErrorKind::Format, "trust table length mismatch");
  TrustTable table;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = 4 + 10 * i;
    TrustRecord rec{crypto::get_u32_be(data, at), data[at + 4], data[at + 5], crypto::get_u32_be(data, at + 6)};
    if (rec.sent == 0 || rec.delivered > rec.sent)
      throw crypto::CryptoError(crypto::CryptoErrorKind::Format, "invalid trust record");
    table.records_[rec.id] = rec;
  }
  return table;
}

}  // namespace sermt::protocol
