#include "sermt/sim/trace.hpp"

#include <fmt/format.h>

#include <ostream>

namespace sermt::sim {

std::string_view to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::Send: return "SEND";
    case TraceKind::Receive: return "RECV";
    case TraceKind::Drop: return "DROP";
    case TraceKind::Compute: return "COMPUTE";
    case TraceKind::Recharge: return "RECHARGE";
    case TraceKind::Death: return "DEATH";
    case TraceKind::Generate: return "GENERATE";
    case TraceKind::Deliver: return "DELIVER";
    case TraceKind::Alarm: return "ALARM";
    case TraceKind::Attack: return "ATTACK";
  }
  return "?";
}

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::None: return "ok";
    case DropReason::Range: return "range";
    case DropReason::Loss: return "loss";
    case DropReason::DeadReceiver: return "dead_receiver";
    case DropReason::DeadSender: return "dead_sender";
    case DropReason::Adversarial: return "adversarial";
    case DropReason::Integrity: return "integrity";
    case DropReason::Auth: return "auth";
    case DropReason::NoRoute: return "no_route";
  }
  return "?";
}

void Trace::mix(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    hash_ ^= p[i];
    hash_ *= 1099511628211ull;
  }
}

void Trace::record(const TraceRecord& rec) {
  mix(&rec.time, sizeof rec.time);
  mix(&rec.kind, sizeof rec.kind);
  mix(rec.label.data(), rec.label.size());
  mix(&rec.from, sizeof rec.from);
  mix(&rec.to, sizeof rec.to);
  mix(&rec.reason, sizeof rec.reason);
  mix(&rec.pj, sizeof rec.pj);
  mix(&rec.bits, sizeof rec.bits);
  mix(&rec.count, sizeof rec.count);
  ++size_;
  if (sink_) sink_(rec);
  if (keep_records_) records_.push_back(rec);
}

void write_record(std::ostream& out, const TraceRecord& rec) {
  auto id = [](EntityId e) { return e == kNoEntity ? std::string("-") : std::to_string(e); };
  out << fmt::format("{:.6f} | {} | {}->{} | {} | {} | {:.12f}", rec.time, to_string(rec.kind), id(rec.from),
                     id(rec.to), rec.label, to_string(rec.reason), pj_to_joules(rec.pj));
  if (rec.count != 0) out << fmt::format(" | n={} bits={}", rec.count, rec.bits);
  out << '\n';
}

void Trace::write(std::ostream& out) const {
  for (const auto& rec : records_) write_record(out, rec);
}

}  // namespace sermt::sim
