#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <vector>

#include "sermt/adversary/attack_spec.hpp"
#include "sermt/protocol/engine.hpp"

namespace sermt::adversary {

using protocol::Message;
using protocol::MsgType;

struct AttackOutcomeLog {
  std::uint64_t bogus_frames_sent = 0;
  std::uint64_t frames_swallowed = 0;
  std::uint64_t fake_locations_advertised = 0;
  std::uint64_t inflated_adverts = 0;
  std::uint64_t frames_tampered = 0;
  std::uint64_t frames_tunnelled = 0;
  std::uint64_t frames_overheard = 0;
  std::uint64_t decrypt_attempts = 0;
  std::uint64_t payloads_decrypted = 0;
};

/// One (node, behaviour) pair installed by a spec.
struct Override {
  EntityId node = 0;
  AttackKind kind = AttackKind::Drop;
  std::size_t spec = 0;  // index into the spec list
};

/// Attack behaviours plugged into the engine's hooks. Compromised nodes
/// keep every key they held; foreign nodes never had GBK.
class Adversary : public protocol::AdversaryHooks {
 public:
  Adversary(protocol::Engine& engine, sim::EventQueue& queue, const sim::Radio& radio, std::vector<AttackSpec> specs,
            std::uint64_t seed);

  /// Validates the specs, picks attackers, registers phantom and foreign
  /// nodes, schedules bursts over [0, duration] and hooks into the engine.
  void install(double duration);

  const std::vector<AttackSpec>& specs() const { return specs_; }
  const std::vector<Override>& overrides() const { return overrides_; }
  std::size_t installed() const { return overrides_.size(); }
  std::vector<EntityId> attackers(AttackKind kind) const;
  /// Phantom identities owned by a Sybil node.
  const std::vector<EntityId>& phantoms(EntityId node) const;
  const AttackOutcomeLog& log() const { return log_; }

  /// `ATTACK key value` rows, appended to the trace export.
  void write(std::ostream& out) const;

  bool swallow(EntityId node, MsgType type, double now) override;
  protocol::Advert advertise(EntityId node, const protocol::Advert& honest) override;
  std::vector<EntityId> personas(EntityId node) override;
  void tamper(EntityId node, Message& msg) override;
  std::optional<EntityId> tunnel(EntityId node) override;
  void on_air(EntityId from, EntityId to, const Message& msg, double now) override;

 private:
  const AttackSpec* active(EntityId node, AttackKind kind, double now) const;
  std::vector<EntityId> draw(const AttackSpec& spec, std::size_t index);
  void burst(std::size_t spec_index);
  void eavesdrop(EntityId spy, const Message& msg);

  protocol::Engine& engine_;
  sim::EventQueue& queue_;
  const sim::Radio& radio_;
  std::vector<AttackSpec> specs_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  bool installed_ = false;

  std::vector<Override> overrides_;
  std::map<EntityId, std::vector<std::size_t>> roles_;  // node -> indices into overrides_
  std::map<EntityId, std::vector<EntityId>> phantoms_;
  std::map<EntityId, EntityId> tunnel_peer_;
  std::vector<EntityId> spies_;
  AttackOutcomeLog log_;
};

}  // namespace sermt::adversary
