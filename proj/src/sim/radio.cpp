#include "sermt/sim/radio.hpp"

#include <algorithm>

namespace sermt::sim {

World::World(const grid::NetworkLayout& layout, EnergyModel model, Trace& trace)
    : model_(model), trace_(trace) {
  const Picojoules initial = mah_to_pj(model_.initial_battery, model_.volts);
  const Picojoules es_capacity = mah_to_pj(model_.battery_capacity_es, model_.volts);
  nodes_.reserve(layout.entities.size());
  for (const auto& e : layout.entities) {
    PhysicalNode n;
    n.id = e.id;
    n.kind = e.kind;
    n.position = e.position;
    n.region = e.region;
    switch (e.kind) {
      case EntityKind::N: n.battery = Battery::cell(initial, initial); break;
      case EntityKind::ES:
      case EntityKind::PDC: n.battery = Battery::cell(es_capacity, initial); break;
      default: n.battery = Battery::mains(); break;
    }
    nodes_.push_back(n);
  }
}

EntityId World::add_phantom(EntityKind kind, Vec2 position, RegionId region) {
  PhysicalNode n;
  n.id = static_cast<EntityId>(nodes_.size());
  n.kind = kind;
  n.position = position;
  n.region = region;
  n.battery = Battery::mains();
  n.phantom = true;
  nodes_.push_back(n);
  return n.id;
}

EntityId World::add_node(EntityKind kind, Vec2 position, RegionId region) {
  PhysicalNode n;
  n.id = static_cast<EntityId>(nodes_.size());
  n.kind = kind;
  n.position = position;
  n.region = region;
  const Picojoules initial = mah_to_pj(model_.initial_battery, model_.volts);
  n.battery = kind == EntityKind::N ? Battery::cell(initial, initial)
                                    : Battery::cell(mah_to_pj(model_.battery_capacity_es, model_.volts), initial);
  nodes_.push_back(n);
  return n.id;
}

bool World::operational(EntityId id) const {
  const PhysicalNode& n = nodes_.at(id);
  return !n.phantom && !n.dead && (n.battery.mains_powered || n.battery.remaining > 0);
}

Picojoules World::debit(EntityId id, double joules, double now, TraceKind kind, std::string_view label,
                        EntityId peer, DropReason reason, std::uint32_t bits) {
  PhysicalNode& n = nodes_.at(id);
  const Picojoules taken = n.battery.debit(joules_to_pj(joules));
  trace_.record(TraceRecord{now, kind, label, id, peer, reason, taken, bits, 0});
  if (!n.battery.mains_powered && n.kind == EntityKind::N && n.battery.remaining == 0 && !n.dead) {
    n.dead = true;
    trace_.record(TraceRecord{now, TraceKind::Death, "battery", id, kNoEntity, DropReason::None, 0, 0, 0});
  }
  return taken;
}

void World::recharge_tick(EntityId id, double dt, double now) {
  PhysicalNode& n = nodes_.at(id);
  if (n.battery.mains_powered || n.dead || (n.kind != EntityKind::ES && n.kind != EntityKind::PDC)) return;
  const Picojoules added = n.battery.recharge(mah_to_pj(model_.recharge_rate * dt, model_.volts));
  if (added > 0) trace_.record(TraceRecord{now, TraceKind::Recharge, "harvest", id, kNoEntity, DropReason::None, added, 0, 0});
}

void World::recharge_all(double dt, double now) {
  for (const auto& n : nodes_) recharge_tick(n.id, dt, now);
}

double Radio::range(EntityKind kind) const {
  switch (kind) {
    case EntityKind::N: return config_.range_n;
    case EntityKind::ES: return config_.range_es;
    case EntityKind::PDC: return config_.range_pdc;
    case EntityKind::Gateway: return config_.range_gateway;
    case EntityKind::Server: return 0.0;  // wired behind its CC gateway
    default: return 0.0;
  }
}

bool Radio::in_range(const World& world, EntityId from, EntityId to) const {
  const PhysicalNode& a = world.node(from);
  return grid::distance(a.position, world.node(to).position) <= range(a.kind);
}

bool Radio::lost() {
  if (config_.loss_probability <= 0.0) return false;
  if (config_.loss_probability >= 1.0) return true;
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53 < config_.loss_probability;
}

TxResult Radio::transmit(World& world, EntityId from, EntityId to, std::uint32_t bits, std::string_view label,
                         double now) {
  Trace& trace = world.trace();
  if (!world.operational(from)) {
    trace.record(TraceRecord{now, TraceKind::Drop, label, from, to, DropReason::DeadSender, 0, bits, 0});
    return {false, DropReason::DeadSender};
  }
  const PhysicalNode& sender = world.node(from);
  const PhysicalNode& receiver = world.node(to);
  const double reach = range(sender.kind);
  const double d = grid::distance(sender.position, receiver.position);
  world.debit(from, energy_tx(world.energy(), bits, std::min(d, reach)), now, TraceKind::Send, label, to,
              DropReason::None, bits);

  DropReason reason = DropReason::None;
  if (receiver.phantom) {
    reason = DropReason::Adversarial;
  } else if (d > reach) {
    reason = DropReason::Range;
  } else if (!world.operational(to)) {
    reason = DropReason::DeadReceiver;
  } else if (lost()) {
    reason = DropReason::Loss;
  }
  if (reason != DropReason::None) {
    trace.record(TraceRecord{now, TraceKind::Drop, label, from, to, reason, 0, bits, 0});
    return {false, reason};
  }
  world.debit(to, energy_rx(world.energy(), bits), now, TraceKind::Receive, label, from, DropReason::None, bits);
  return {true, DropReason::None};
}

std::vector<std::pair<EntityId, TxResult>> Radio::broadcast(World& world, EntityId from, std::uint32_t bits,
                                                            std::string_view label, double now,
                                                            const Audience& audience) {
  std::vector<std::pair<EntityId, TxResult>> out;
  if (!world.operational(from)) {
    world.trace().record(TraceRecord{now, TraceKind::Drop, label, from, kNoEntity, DropReason::DeadSender, 0, bits, 0});
    return out;
  }
  const double reach = range(world.node(from).kind);
  world.debit(from, energy_tx(world.energy(), bits, reach), now, TraceKind::Send, label, kNoEntity,
              DropReason::None, bits);
  for (EntityId id : neighbors(world, from)) {
    if (audience && !audience(world.node(id))) continue;
    if (lost()) {
      world.trace().record(TraceRecord{now, TraceKind::Drop, label, from, id, DropReason::Loss, 0, bits, 0});
      out.emplace_back(id, TxResult{false, DropReason::Loss});
      continue;
    }
    world.debit(id, energy_rx(world.energy(), bits), now, TraceKind::Receive, label, from, DropReason::None, bits);
    out.emplace_back(id, TxResult{true, DropReason::None});
  }
  return out;
}

std::vector<EntityId> Radio::neighbors(const World& world, EntityId id) const {
  std::vector<EntityId> out;
  const PhysicalNode& self = world.node(id);
  const double reach = range(self.kind);
  if (reach <= 0.0) return out;
  for (const auto& n : world.nodes()) {
    if (n.id == id || !world.operational(n.id)) continue;
    if (range(n.kind) <= 0.0) continue;  // wired-only entities (MU, PMU)
    if (grid::distance(self.position, n.position) <= reach) out.push_back(n.id);
  }
  return out;
}

}  // namespace sermt::sim
