#pragma once

#include <functional>
#include <random>
#include <vector>

#include "sermt/grid/deployment.hpp"
#include "sermt/sim/trace.hpp"

namespace sermt::sim {

using grid::EntityKind;
using grid::RegionId;
using grid::Vec2;

/// Physical side of an entity: where it is and how much energy it has.
struct PhysicalNode {
  EntityId id = 0;
  EntityKind kind = EntityKind::N;
  Vec2 position;
  RegionId region = 0;
  Battery battery;
  bool dead = false;     // N nodes die permanently at 0 mAh
  bool phantom = false;  // Sybil persona: advertised but not physically present
};

/// Owns every PhysicalNode of one simulation instance and the energy ledger.
class World {
 public:
  World(const grid::NetworkLayout& layout, EnergyModel model, Trace& trace);

  std::size_t size() const { return nodes_.size(); }
  PhysicalNode& node(EntityId id) { return nodes_.at(id); }
  const PhysicalNode& node(EntityId id) const { return nodes_.at(id); }
  const std::vector<PhysicalNode>& nodes() const { return nodes_; }
  const EnergyModel& energy() const { return model_; }
  Trace& trace() { return trace_; }

  EntityId add_phantom(EntityKind kind, Vec2 position, RegionId region);
  /// A physically present node that was not part of the deployment.
  EntityId add_node(EntityKind kind, Vec2 position, RegionId region);

  /// Physically present, not dead, and either mains powered or holding charge.
  bool operational(EntityId id) const;

  /// Debits `joules` (clamped to what is left), logs it, applies the N-node
  /// death rule. Returns the picojoules actually taken.
  Picojoules debit(EntityId id, double joules, double now, TraceKind kind, std::string_view label,
                   EntityId peer = kNoEntity, DropReason reason = DropReason::None, std::uint32_t bits = 0);

  /// Linear harvest for ES and PDC nodes over `dt` seconds, clamped to capacity.
  void recharge_tick(EntityId id, double dt, double now);
  void recharge_all(double dt, double now);

 private:
  std::vector<PhysicalNode> nodes_;
  EnergyModel model_;
  Trace& trace_;
};

struct RadioConfig {
  double range_n = 250.0;
  double range_es = 300.0;
  double range_pdc = 1000.0;
  double range_gateway = 300.0;
  double loss_probability = 0.0;
};

struct TxResult {
  bool delivered = false;
  DropReason reason = DropReason::None;
};

/// Unit-disk radio with Bernoulli loss. A receiver at exactly the sender's
/// range is reachable.
class Radio {
 public:
  Radio(RadioConfig config, std::uint64_t seed) : config_(config), rng_(seed) {}

  const RadioConfig& config() const { return config_; }
  double range(EntityKind kind) const;
  bool in_range(const World& world, EntityId from, EntityId to) const;

  /// Sender pays E_T at min(distance, range) on every attempt it can make;
  /// the receiver pays E_R only on delivery.
  TxResult transmit(World& world, EntityId from, EntityId to, std::uint32_t bits, std::string_view label,
                    double now);

  using Audience = std::function<bool(const PhysicalNode&)>;
  /// One transmission at full range; every operational node in range that
  /// the audience filter admits gets an independent loss draw.
  std::vector<std::pair<EntityId, TxResult>> broadcast(World& world, EntityId from, std::uint32_t bits,
                                                       std::string_view label, double now,
                                                       const Audience& audience);

  /// Operational nodes within range of `id` (closed ball), ascending ID.
  std::vector<EntityId> neighbors(const World& world, EntityId id) const;

 private:
  bool lost();

  RadioConfig config_;
  std::mt19937_64 rng_;
};

}  // namespace sermt::sim
