#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "sermt/crypto/sha1.hpp"
#include "sermt/grid/types.hpp"

namespace sermt::protocol {

using crypto::ByteView;
using crypto::Bytes;
using grid::EntityId;

enum class MsgType : std::uint8_t {
  TEST = 1,
  RQM,
  BLOCKED_LIST,
  FORW_RQM,
  ACK,
  PUBKEY,
  EMD,
  JOIN_RQM,
  CLUSTER_ID,
  DATA,
  AGG_DATA,
  ANCHOR_BCAST,
};

std::string_view to_string(MsgType type);

/// Wire format, big-endian:
/// `type:1 | sender_id:4 | payload_len:2 | payload | chain_key_len:1 | chain_key | mac:20`
struct Message {
  MsgType type = MsgType::TEST;
  EntityId sender = 0;
  Bytes payload;
  Bytes chain_key;  // empty unless the frame is released under a server's K_x
  crypto::Digest mac{};

  friend bool operator==(const Message&, const Message&) = default;
};

inline constexpr std::size_t kHeaderBytes = 1 + 4 + 2 + 1 + crypto::kDigestSize;

std::size_t wire_size(const Message& msg);
Bytes encode(const Message& msg);
/// Throws CryptoError(Format) on truncated or oversized frames and unknown types.
Message decode(ByteView frame);

/// Bytes covered by the tag: `payload || sender_id || K_x`, the field order
/// of the paper's `MSG || ID || K_x` formats.
Bytes mac_input(const Message& msg);

/// HMAC(GBK; payload || sender || K_x)
void sign_global(Message& msg, ByteView gbk);
bool verify_global(const Message& msg, ByteView gbk);
/// HMAC(GBK; HMAC(x_k; payload || sender))
void sign_nested(Message& msg, ByteView gbk, ByteView x_k);
bool verify_nested(const Message& msg, ByteView gbk, ByteView x_k);

/// `RegionID || Timestamp_for_current_TV || List_of_SubstationIDs`
/// as region:2 | timestamp_ms:8 | count:2 | substation:2 each.
struct ClusterId {
  int region = 0;
  std::uint64_t trust_timestamp_ms = 0;
  std::vector<int> substation_ids;

  Bytes serialize() const;
  static ClusterId parse(ByteView data);
  friend bool operator==(const ClusterId&, const ClusterId&) = default;
};

}  // namespace sermt::protocol
