#pragma once

#include <map>
#include <set>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "sermt/protocol/network.hpp"
#include "sermt/protocol/routing.hpp"
#include "sermt/protocol/trust_table.hpp"
#include "sermt/sim/event_queue.hpp"
#include "sermt/sim/radio.hpp"

namespace sermt::protocol {

/// Runs the protocol state machines over one simulated world. Every
/// handler executes atomically inside an event of the owning queue; a
/// multi-hop exchange completes within the event that starts it.
class Engine {
 public:
  Engine(const grid::NetworkLayout& layout, ProtocolConfig config, sim::World& world, sim::Radio& radio,
         sim::EventQueue& queue, std::uint64_t seed);

  void set_hooks(AdversaryHooks* hooks) { hooks_ = hooks ? hooks : &honest_; }
  /// Schedules trust rounds, forwarder epochs, data ticks and recharging
  /// for [0, duration].
  void start(double duration);

  // ---- state
  const ProtocolConfig& config() const { return cfg_; }
  const grid::NetworkLayout& layout() const { return layout_; }
  const sim::World& world() const { return world_; }
  std::size_t size() const { return nodes_.size(); }
  const NodeState& node(EntityId id) const { return nodes_.at(id); }
  EntityId server(int idx) const { return servers_.at(static_cast<std::size_t>(idx)); }
  EntityId cc_gateway(int idx) const { return cc_gateways_.at(static_cast<std::size_t>(idx)); }
  EntityId gateway_of(SubstationId sid) const { return gateway_by_substation_.at(sid); }
  const TrustTable& server_table(int idx) const { return server_tables_.at(static_cast<std::size_t>(idx)); }
  const TrustTable& gateway_table(EntityId gateway) const { return gateway_tables_.at(gateway); }
  const ProtocolStats& stats() const { return stats_; }
  const std::vector<SelectionEvent>& selections() const { return selections_; }
  const crypto::Curve& curve() const { return curve_; }
  const Bytes& gbk() const { return gbk_; }
  const crypto::HashChain& chain(int idx) const { return *chains_.at(static_cast<std::size_t>(idx)); }
  const crypto::KeyPair& server_keys(int idx) const { return server_keys_.at(static_cast<std::size_t>(idx)); }
  bool round_in_progress() const { return round_in_progress_; }
  int next_round_server() const { return next_server_; }
  double now() const { return queue_.now(); }

  struct Cluster {
    EntityId gateway = 0;
    EntityId carrier = 0;
    EntityId head = 0;
    ClusterId cid;
    std::vector<EntityId> members;  // ascending, carrier and head included
    std::vector<EntityId> path;     // head ... CC gateway, empty if unreachable
    int target_server = 0;
  };
  const std::vector<Cluster>& clusters() const { return clusters_; }
  std::optional<EntityId> mu_forwarder(EntityId gateway) const;
  std::optional<EntityId> pmu_relay(EntityId gateway) const;
  EntityId acting_pdc(RegionId region) const { return acting_pdc_.at(region); }
  const std::vector<EntityId>& overlay_path(RegionId region, int server_idx) const;

  // ---- protocol phases; public so tests can drive them step by step
  /// Evaluates every reachable region, shares the table with the peer
  /// server and the gateways, and rotates both servers' key pairs.
  TrustTable run_trust_round(int server_idx);
  void end_round();
  void select_forwarders();
  void mu_tick();
  void probe_es(EntityId gateway);
  void pmu_tick();
  /// Replaces blocked or dead PDCs by their region's most trusted ES.
  void pdc_check();
  EntityId pdc_failover(RegionId region);
  void restore_pdc(RegionId region);
  /// Chain-key check against the receiver's state for that server plus the
  /// GBK MAC. Accepting advances the receiver's chain state.
  bool authenticate_control_message(EntityId receiver, int server_idx, const Message& msg, bool allow_current,
                                    bool forged = false);

  // ---- attacker entry points
  EntityId register_phantom(EntityId owner, Vec2 position);
  EntityId register_foreign(Vec2 position, RegionId region);
  /// One bogus control frame impersonating a CC server, broadcast by `attacker`.
  void inject_control(EntityId attacker, MsgType type, const Bytes& fake_key);

  Advert honest_advert(EntityId id) const;
  /// Known, live entities within range of `id` (closed ball).
  std::vector<EntityId> neighbors(EntityId id) const;

 private:
  struct RoundCtx;

  // transport
  EntityId radio_of(EntityId id) const;
  bool visible(EntityId id) const;
  bool bilink(EntityId a, EntityId b) const;
  /// Radio hop between protocol IDs; DropReason::None on delivery.
  sim::DropReason hop(EntityId from, EntityId to, const Message& msg);
  /// Hop-by-hop relay along `path`; interior nodes may swallow or tamper.
  sim::DropReason carry(const std::vector<EntityId>& path, Message& msg);
  std::vector<EntityId> broadcast(EntityId from, const Message& msg, const sim::Radio::Audience& audience);
  void audit(const Bytes& frame);

  // crypto with energy accounting
  void compute(EntityId id, std::size_t sha_blocks, std::size_t rc5_blocks, std::size_t ecc_muls);
  void sign(Message& msg, EntityId signer);
  bool check(const Message& msg, EntityId verifier);
  void sign_pair(Message& msg, EntityId signer, const Bytes& x_k);
  bool check_pair(const Message& msg, EntityId verifier, const Bytes& x_k);
  Bytes seal(EntityId sender, const Bytes& x_k, const Bytes& plain);
  std::optional<Bytes> open(EntityId receiver, const Bytes& x_k, const Bytes& body);
  const crypto::KeyPair& keys_of(EntityId id);
  bool ecdh(EntityId a, EntityId b, const std::vector<EntityId>& path, const Bytes& extra = {});
  Bytes release_key(int server_idx);
  void drop(EntityId from, EntityId to, sim::DropReason reason, std::uint32_t readings, std::uint32_t bits,
            std::string_view label);

  // trust rounds
  std::vector<EntityId> trusted_path(const RoundCtx& ctx, EntityId from, EntityId to) const;
  void evaluate_region(RoundCtx& ctx, EntityId radio, EntityId sender, RegionId region);
  /// `server_idx` < 0: gateway-local probe, MAC-only authentication.
  std::pair<std::uint8_t, std::uint8_t> run_tests(int server_idx, EntityId evaluator, const std::vector<EntityId>& path,
                                                  EntityId target, const Bytes& key);
  void flood_pubkey(int server_idx);
  void flood_anchor(int server_idx, const Bytes& k1, const crypto::ChainKey& new_anchor);

  // data plane
  double view_tv(const TrustTable& table, EntityId id) const;
  bool view_blocked(const TrustTable& table, EntityId id) const;
  std::vector<EntityId> route_to_cc(EntityId head, const TrustTable& table, int& server_idx);
  /// `retry`: a gateway left without offers after a solo re-solicit raises the isolation alarm.
  void solicit(const std::vector<EntityId>& gateways, bool retry = false);
  void form_cluster(EntityId carrier);
  /// Readings recovered intact at CC gateway `gateway`, or nullopt when the
  /// frame fails authentication or decryption.
  std::optional<std::vector<Reading>> deliver(EntityId gateway, int server_idx, const Message& msg, std::size_t reading_bytes);
  std::vector<Reading> make_readings(EntityId gateway, EntityKind kind, std::uint32_t seq, std::size_t len);
  const TrustTable& latest_table() const { return server_tables_.at(static_cast<std::size_t>(1 - next_server_)); }
  const std::vector<EntityId>& es_to_pdc_path(EntityId es, EntityId pdc, const TrustTable& table);
  void recompute_overlay();

  const grid::NetworkLayout& layout_;
  ProtocolConfig cfg_;
  sim::World& world_;
  sim::Radio& radio_;
  sim::EventQueue& queue_;
  std::uint64_t seed_;
  AdversaryHooks honest_;
  AdversaryHooks* hooks_ = &honest_;
  crypto::Curve curve_;
  Bytes gbk_;
  std::mt19937_64 rng_;

  std::vector<NodeState> nodes_;
  std::vector<std::vector<EntityId>> geo_;  // directed: within sender range
  std::array<EntityId, 2> servers_{};
  std::array<EntityId, 2> cc_gateways_{};
  std::map<SubstationId, EntityId> gateway_by_substation_;
  std::vector<EntityId> gateways_;
  std::array<crypto::KeyPair, 2> server_keys_;
  std::array<std::optional<crypto::KeyPair>, 2> server_prev_keys_;
  std::array<std::uint32_t, 2> server_generation_{1, 1};
  std::array<std::unique_ptr<crypto::HashChain>, 2> chains_;
  std::array<std::uint32_t, 2> chain_epoch_{0, 0};

  std::array<TrustTable, 2> server_tables_;
  std::map<EntityId, TrustTable> gateway_tables_;
  bool round_in_progress_ = false;
  int next_server_ = 0;
  std::uint32_t round_stamp_ms_ = 0;

  std::map<EntityId, EntityId> mu_choice_;  // gateway -> carrier with an established secret
  std::vector<EntityId> mu_pending_;        // gateways to re-solicit on the next tick
  std::vector<Cluster> clusters_;
  std::map<EntityId, std::size_t> cluster_of_carrier_;
  std::map<EntityId, EntityId> es_choice_;  // gateway -> ES
  std::map<RegionId, EntityId> acting_pdc_;
  std::map<std::pair<RegionId, int>, std::vector<EntityId>> overlay_;
  std::map<std::pair<EntityId, EntityId>, std::vector<EntityId>> es_paths_;
  std::uint32_t mu_seq_ = 0;
  std::uint32_t pmu_seq_ = 0;
  std::uint32_t epoch_ = 0;
  std::vector<Bytes> live_readings_;
  std::vector<EntityId> deferred_probes_;
  std::set<EntityId> taken_;  // nodes that answered a join request this epoch

  ProtocolStats stats_;
  std::vector<SelectionEvent> selections_;
};

}  // namespace sermt::protocol
