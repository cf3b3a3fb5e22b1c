#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "sermt/grid/types.hpp"
#include "sermt/sim/energy.hpp"

namespace sermt::sim {

using grid::EntityId;
inline constexpr EntityId kNoEntity = 0xffffffffu;

enum class TraceKind : std::uint8_t {
  Send,
  Receive,
  Drop,
  Compute,
  Recharge,
  Death,
  Generate,  // application readings handed to the network
  Deliver,   // application readings recovered at a control center
  Alarm,
  Attack,
};

enum class DropReason : std::uint8_t {
  None,
  Range,
  Loss,
  DeadReceiver,
  DeadSender,
  Adversarial,
  Integrity,  // MAC or padding check failed
  Auth,       // control message rejected
  NoRoute,
};

std::string_view to_string(TraceKind kind);
std::string_view to_string(DropReason reason);

/// `label` must point at storage with static duration.
struct TraceRecord {
  double time = 0.0;
  TraceKind kind = TraceKind::Send;
  std::string_view label;
  EntityId from = kNoEntity;
  EntityId to = kNoEntity;
  DropReason reason = DropReason::None;
  Picojoules pj = 0;
  std::uint32_t bits = 0;
  std::uint32_t count = 0;
};

/// Append-only event log. The running hash covers every field of every
/// record, so two runs agree on hash() iff their traces are identical.
class Trace {
 public:
  explicit Trace(bool keep_records = true) : keep_records_(keep_records) {}

  void record(const TraceRecord& rec);

  std::uint64_t hash() const { return hash_; }
  std::size_t size() const { return size_; }
  const std::vector<TraceRecord>& records() const { return records_; }
  bool keeps_records() const { return keep_records_; }
  /// Sees every record as it is appended, whether or not records are kept.
  void set_sink(std::function<void(const TraceRecord&)> sink) { sink_ = std::move(sink); }

  /// `t | event_kind | from->to | label | outcome | joules` per record.
  void write(std::ostream& out) const;

 private:
  void mix(const void* data, std::size_t len);

  bool keep_records_;
  std::vector<TraceRecord> records_;
  std::function<void(const TraceRecord&)> sink_;
  std::uint64_t hash_ = 14695981039346656037ull;
  std::size_t size_ = 0;
};

void write_record(std::ostream& out, const TraceRecord& rec);

}  // namespace sermt::sim
