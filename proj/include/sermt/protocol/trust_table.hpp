#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "sermt/crypto/bytes.hpp"
#include "sermt/protocol/formulas.hpp"

namespace sermt::protocol {

/// One evaluation: TV is kept as the (delivered, sent) pair it came from so
/// that tables round-trip through the wire format exactly.
struct TrustRecord {
  EntityId id = 0;
  std::uint8_t delivered = 0;
  std::uint8_t sent = 0;
  std::uint32_t timestamp_ms = 0;  // start of the round that produced it

  double tv() const { return compute_trust(delivered, sent); }
  friend bool operator==(const TrustRecord&, const TrustRecord&) = default;
};

/// Threat list = records with TV <= 40; trusted list = the rest. Entities
/// never evaluated have no record and are treated as TV 100.
class TrustTable {
 public:
  void set(const TrustRecord& rec);
  void merge(const TrustTable& other);  // newer-or-equal timestamps win

  std::optional<TrustRecord> find(EntityId id) const;
  double tv(EntityId id) const;
  bool blocked(EntityId id) const;
  std::vector<EntityId> threat_list() const;
  std::vector<EntityId> trusted_list() const;
  const std::map<EntityId, TrustRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  /// count:4 | (id:4 | delivered:1 | sent:1 | timestamp_ms:4) per record, ascending ID.
  crypto::Bytes serialize() const;
  static TrustTable parse(crypto::ByteView data);

  friend bool operator==(const TrustTable&, const TrustTable&) = default;

 private:
  std::map<EntityId, TrustRecord> records_;
};

}  // namespace sermt::protocol
