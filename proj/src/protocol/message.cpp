#include "sermt/protocol/message.hpp"

namespace sermt::protocol {

using crypto::CryptoError;
using crypto::CryptoErrorKind;

std::string_view to_string(MsgType type) {
  switch (type) {
    case MsgType::TEST: return "TEST";
    case MsgType::RQM: return "RQM";
    case MsgType::BLOCKED_LIST: return "BLOCKED_LIST";
    case MsgType::FORW_RQM: return "FORW_RQM";
    case MsgType::ACK: return "ACK";
    case MsgType::PUBKEY: return "PUBKEY";
    case MsgType::EMD: return "EMD";
    case MsgType::JOIN_RQM: return "JOIN_RQM";
    case MsgType::CLUSTER_ID: return "CLUSTER_ID";
    case MsgType::DATA: return "DATA";
    case MsgType::AGG_DATA: return "AGG_DATA";
    case MsgType::ANCHOR_BCAST: return "ANCHOR_BCAST";
  }
  return "?";
}

std::size_t wire_size(const Message& msg) { return kHeaderBytes + msg.payload.size() + msg.chain_key.size(); }

Bytes encode(const Message& msg) {
  if (msg.payload.size() > 0xffff) throw CryptoError(CryptoErrorKind::Format, "payload exceeds 65535 bytes");
  if (msg.chain_key.size() > 0xff) throw CryptoError(CryptoErrorKind::Format, "chain key exceeds 255 bytes");
  Bytes out;
  out.reserve(wire_size(msg));
  out.push_back(static_cast<std::uint8_t>(msg.type));
  crypto::put_u32_be(out, msg.sender);
  crypto::put_u16_be(out, static_cast<std::uint16_t>(msg.payload.size()));
  crypto::append(out, msg.payload);
  out.push_back(static_cast<std::uint8_t>(msg.chain_key.size()));
  crypto::append(out, msg.chain_key);
  crypto::append(out, msg.mac);
  return out;
}

Message decode(ByteView frame) {
  auto need = [&](std::size_t at, std::size_t n) {
    if (at + n > frame.size()) throw CryptoError(CryptoErrorKind::Format, "truncated frame");
  };
  need(0, 7);
  Message msg;
  const auto type = frame[0];
  if (type < static_cast<std::uint8_t>(MsgType::TEST) || type > static_cast<std::uint8_t>(MsgType::ANCHOR_BCAST)) {
    throw CryptoError(CryptoErrorKind::Format, "unknown message type");
  }
  msg.type = static_cast<MsgType>(type);
  msg.sender = crypto::get_u32_be(frame, 1);
  const std::size_t plen = crypto::get_u16_be(frame, 5);
  need(7, plen + 1);
  msg.payload.assign(frame.begin() + 7, frame.begin() + 7 + static_cast<std::ptrdiff_t>(plen));
  std::size_t at = 7 + plen;
  const std::size_t klen = frame[at++];
  need(at, klen + crypto::kDigestSize);
  msg.chain_key.assign(frame.begin() + static_cast<std::ptrdiff_t>(at),
                       frame.begin() + static_cast<std::ptrdiff_t>(at + klen));
  at += klen;
  std::copy_n(frame.begin() + static_cast<std::ptrdiff_t>(at), crypto::kDigestSize, msg.mac.begin());
  if (at + crypto::kDigestSize != frame.size()) throw CryptoError(CryptoErrorKind::Format, "trailing bytes in frame");
  return msg;
}

Bytes mac_input(const Message& msg) {
  Bytes out = msg.payload;
  crypto::put_u32_be(out, msg.sender);
  crypto::append(out, msg.chain_key);
  return out;
}

void sign_global(Message& msg, ByteView gbk) { msg.mac = crypto::hmac(gbk, mac_input(msg)); }

bool verify_global(const Message& msg, ByteView gbk) { return crypto::verify_hmac(gbk, mac_input(msg), msg.mac); }

void sign_nested(Message& msg, ByteView gbk, ByteView x_k) {
  msg.mac = crypto::nested_hmac(gbk, x_k, mac_input(msg));
}

bool verify_nested(const Message& msg, ByteView gbk, ByteView x_k) {
  return crypto::verify_nested_hmac(gbk, x_k, mac_input(msg), msg.mac);
}

Bytes ClusterId::serialize() const {
  Bytes out;
  crypto::put_u16_be(out, static_cast<std::uint16_t>(region));
  crypto::put_u32_be(out, static_cast<std::uint32_t>(trust_timestamp_ms >> 32));
  crypto::put_u32_be(out, static_cast<std::uint32_t>(trust_timestamp_ms));
  crypto::put_u16_be(out, static_cast<std::uint16_t>(substation_ids.size()));
  for (int s : substation_ids) crypto::put_u16_be(out, static_cast<std::uint16_t>(s));
  return out;
}

ClusterId ClusterId::parse(ByteView data) {
  if (data.size() < 12) throw CryptoError(CryptoErrorKind::Format, "truncated cluster id");
  ClusterId id;
  id.region = crypto::get_u16_be(data, 0);
  id.trust_timestamp_ms = std::uint64_t{crypto::get_u32_be(data, 2)} << 32 | crypto::get_u32_be(data, 6);
  const std::size_t n = crypto::get_u16_be(data, 10);
  if (data.size() != 12 + 2 * n) throw CryptoError(CryptoErrorKind::Format, "cluster id length mismatch");
  for (std::size_t i = 0; i < n; ++i) id.substation_ids.push_back(crypto::get_u16_be(data, 12 + 2 * i));
  return id;
}

}  // namespace sermt::protocol
