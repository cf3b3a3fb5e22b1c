#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "sermt/crypto/ecc.hpp"
#include "sermt/crypto/hash_chain.hpp"
#include "sermt/grid/deployment.hpp"
#include "sermt/protocol/message.hpp"

namespace sermt::protocol {

using grid::EntityKind;
using grid::RegionId;
using grid::SubstationId;
using grid::Vec2;

struct ProtocolConfig {
  bool defense = true;  // false: baseline without trust rounds, MACs or chain auth
  double trust_interval = 200.0;
  double round_duration = 5.0;
  int test_messages = 10;
  double mu_interval = 10.0;
  double pmu_interval = 5.0;
  double es_probe_interval = 50.0;
  double recharge_interval = 10.0;
  std::size_t mu_reading_bytes = 64;
  std::size_t pmu_sample_bytes = 128;
  std::size_t chain_length = 256;
  std::size_t chain_window = 64;  // max hash steps a receiver walks to its last accepted key
  bool audit = true;              // scan every frame on air for plaintext readings
};

void validate(const ProtocolConfig& cfg);

/// Protocol-side view of one entity. Physical state (position, battery)
/// lives in sim::World under the same ID.
struct NodeState {
  EntityId id = 0;
  EntityKind kind = EntityKind::N;
  RegionId region = 0;
  std::optional<SubstationId> substation;
  bool known = true;    // in the operator's inventory (false for attacker-deployed nodes)
  bool has_gbk = true;  // foreign nodes lack the global key
  bool phantom = false;
  EntityId owner = 0;   // physical transmitter (differs from id for Sybil personas)
  crypto::KeyPair keys;
  std::map<EntityId, crypto::SharedSecret> secrets;
  std::array<crypto::ChainVerifier, 2> verifiers;
  std::array<std::optional<crypto::Point>, 2> server_pub;
  std::array<std::uint32_t, 2> server_pub_generation{0, 0};
};

/// Values a node reports about itself in ACK frames.
struct Advert {
  double bp = 0.0;  // mAh
  double c = 0.0;   // same-region neighbours
  double cn = 0.0;  // other-region neighbours
};

/// Attack behaviours plug in here; the default is an honest network.
class AdversaryHooks {
 public:
  virtual ~AdversaryHooks() = default;
  /// A frame reached `node`, which the protocol expects to echo, forward or
  /// process. True means the node silently discards it.
  virtual bool swallow(EntityId node, MsgType type, double now) {
    (void)node, (void)type, (void)now;
    return false;
  }
  virtual Advert advertise(EntityId node, const Advert& honest) {
    (void)node;
    return honest;
  }
  /// Sybil identities answering alongside `node`.
  virtual std::vector<EntityId> personas(EntityId node) {
    (void)node;
    return {};
  }
  /// Runs after `node` has MACed an outgoing frame (false-data injection).
  virtual void tamper(EntityId node, Message& msg) { (void)node, (void)msg; }
  /// Far end of a wormhole tunnel for broadcasts overheard at `node`.
  virtual std::optional<EntityId> tunnel(EntityId node) {
    (void)node;
    return std::nullopt;
  }
  /// Every frame put on air by radio transmitter `from`.
  virtual void on_air(EntityId from, EntityId to, const Message& msg, double now) {
    (void)from, (void)to, (void)msg, (void)now;
  }
};

struct ProtocolStats {
  std::uint64_t readings_sent = 0;
  std::uint64_t readings_delivered = 0;
  std::uint64_t delivered_bits = 0;
  std::uint64_t mu_sent = 0, mu_delivered = 0;
  std::uint64_t pmu_sent = 0, pmu_delivered = 0;

  std::uint64_t alarms = 0;
  std::uint64_t isolation_alarms = 0;
  std::uint64_t stale_regions = 0;
  std::uint64_t integrity_failures = 0;

  std::uint64_t control_accepted = 0;
  std::uint64_t control_rejected = 0;
  std::uint64_t forged_accepted = 0;
  std::uint64_t forged_rejected = 0;
  std::uint64_t plaintext_exposures = 0;

  std::uint64_t trust_rounds = 0;
  std::uint64_t tables_converged = 0;
  std::uint64_t tables_diverged = 0;
  std::uint64_t pdc_failovers = 0;
  std::uint64_t chain_renewals = 0;
};

/// Forwarder choices and cached paths, for route-freshness checks.
struct SelectionEvent {
  double time = 0.0;
  EntityId chooser = 0;  // gateway (MU forwarder / PMU ES) or cluster head
  EntityId chosen = 0;
  std::vector<EntityId> path;
  enum class What { MuForwarder, PmuRelay, ClusterHead, ChPath, PdcOverlay } what = What::MuForwarder;
};

/// Application payload record: `source:4 | seq:4 | len:2 | bytes`.
struct Reading {
  EntityId source = 0;
  std::uint32_t seq = 0;
  Bytes data;
  friend bool operator==(const Reading&, const Reading&) = default;
};

/// Aggregation is ordered concatenation: `count:2 | reading*`.
Bytes encode_aggregate(const std::vector<Reading>& readings);
std::vector<Reading> parse_aggregate(ByteView data);

/// Deterministic reading contents, so the receiving CC can check integrity.
Bytes reading_bytes(std::uint64_t seed, EntityId source, std::uint32_t seq, std::size_t len);

/// splitmix64 over the mixed inputs; used to derive per-purpose RNG seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace sermt::protocol
