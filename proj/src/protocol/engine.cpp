#include "sermt/protocol/engine.hpp"

#include <algorithm>

#include "sermt/crypto/rc5.hpp"

namespace sermt::protocol {

using sim::DropReason;
using sim::TraceKind;
using sim::TraceRecord;

namespace {

Bytes seed_bytes(std::uint64_t v, std::size_t len) {
  Bytes out;
  for (std::uint64_t block = 0; out.size() < len; ++block) {
    std::uint64_t w = derive_seed(v, block);
    for (int i = 0; i < 8 && out.size() < len; ++i, w >>= 8) out.push_back(static_cast<std::uint8_t>(w));
  }
  return out;
}

enum Tag : std::uint64_t { kGbk = 1, kKeys, kServer, kChain, kEphemeral, kNonce };

}  // namespace

Engine::Engine(const grid::NetworkLayout& layout, ProtocolConfig config, sim::World& world, sim::Radio& radio,
               sim::EventQueue& queue, std::uint64_t seed)
    : layout_(layout),
      cfg_(config),
      world_(world),
      radio_(radio),
      queue_(queue),
      seed_(seed),
      curve_(crypto::secp112r1()),
      gbk_(seed_bytes(derive_seed(seed, kGbk), 16)),
      rng_(derive_seed(seed, kNonce)) {
  validate(cfg_);
  int server_slot = 0;
  for (const auto& e : layout_.entities) {
    NodeState n;
    n.id = e.id;
    n.kind = e.kind;
    n.region = e.region;
    n.substation = e.substation;
    n.owner = e.id;
    nodes_.push_back(std::move(n));
    if (e.kind == EntityKind::Gateway) {
      gateways_.push_back(e.id);
      gateway_by_substation_[*e.substation] = e.id;
      gateway_tables_[e.id] = TrustTable{};
    }
    if (e.kind == EntityKind::Server && server_slot < 2) servers_[static_cast<std::size_t>(server_slot++)] = e.id;
  }
  if (server_slot != 2) throw ProtocolError(ProtocolError::Kind::Config, "layout needs a main and a backup server");
  cc_gateways_ = {gateway_by_substation_.at(layout_.control_centers.main),
                  gateway_by_substation_.at(layout_.control_centers.backup)};

  for (int i = 0; i < 2; ++i) {
    const auto s = static_cast<std::size_t>(i);
    server_keys_[s] = crypto::generate_keypair(curve_, derive_seed(seed_, kServer, s, 0));
    chains_[s] = std::make_unique<crypto::HashChain>(seed_bytes(derive_seed(seed_, kChain, s, 0), 20), cfg_.chain_length);
  }
  for (auto& n : nodes_) {
    for (std::size_t s = 0; s < 2; ++s) {
      n.verifiers[s] = crypto::ChainVerifier(chains_[s]->anchor(), cfg_.chain_window);
      n.server_pub[s] = server_keys_[s].public_key;
      n.server_pub_generation[s] = 1;
    }
  }
  for (const auto& r : layout_.regions) {
    if (r.pdc_id) acting_pdc_[r.id] = *r.pdc_id;
  }

  geo_.assign(nodes_.size(), {});
  for (const auto& a : nodes_) {
    const double ra = radio_.range(a.kind);
    if (ra <= 0.0) continue;
    for (const auto& b : nodes_) {
      if (a.id == b.id || radio_.range(b.kind) <= 0.0) continue;
      if (grid::distance(world_.node(a.id).position, world_.node(b.id).position) <= ra) geo_[a.id].push_back(b.id);
    }
  }
}

void Engine::start(double duration) {
  recompute_overlay();
  const double rd = cfg_.round_duration;
  for (int k = 0; k * cfg_.trust_interval <= duration; ++k) {
    const double t = k * cfg_.trust_interval;
    queue_.schedule(t, [this] {
      if (cfg_.defense) {
        run_trust_round(next_server_);
      } else {
        round_in_progress_ = true;
      }
    });
    if (t + rd <= duration) queue_.schedule(t + rd, [this] { end_round(); });
  }
  for (int k = 0; rd + k * cfg_.es_probe_interval <= duration; ++k) {
    queue_.schedule(rd + k * cfg_.es_probe_interval, [this] {
      for (EntityId gw : gateways_) probe_es(gw);
    });
  }
  for (int k = 1; k * cfg_.pmu_interval <= duration; ++k) queue_.schedule(k * cfg_.pmu_interval, [this] { pmu_tick(); });
  for (int k = 1; k * cfg_.mu_interval <= duration; ++k) queue_.schedule(k * cfg_.mu_interval, [this] { mu_tick(); });
  for (int k = 1; k * cfg_.recharge_interval <= duration; ++k) {
    queue_.schedule(k * cfg_.recharge_interval, [this] { world_.recharge_all(cfg_.recharge_interval, now()); });
  }
}

std::optional<EntityId> Engine::mu_forwarder(EntityId gateway) const {
  auto it = mu_choice_.find(gateway);
  if (it == mu_choice_.end()) return std::nullopt;
  return it->second;
}

std::optional<EntityId> Engine::pmu_relay(EntityId gateway) const {
  auto it = es_choice_.find(gateway);
  if (it == es_choice_.end()) return std::nullopt;
  return it->second;
}

const std::vector<EntityId>& Engine::overlay_path(RegionId region, int server_idx) const {
  static const std::vector<EntityId> empty;
  auto it = overlay_.find({region, server_idx});
  return it == overlay_.end() ? empty : it->second;
}

// ---------------------------------------------------------------- topology

EntityId Engine::radio_of(EntityId id) const {
  const NodeState& n = nodes_.at(id);
  if (n.kind == EntityKind::Server) return id == servers_[0] ? cc_gateways_[0] : cc_gateways_[1];
  return n.owner;
}

bool Engine::visible(EntityId id) const { return nodes_.at(id).phantom || world_.operational(id); }

bool Engine::bilink(EntityId a, EntityId b) const {
  const double d = grid::distance(world_.node(a).position, world_.node(b).position);
  return d <= radio_.range(nodes_.at(a).kind) && d <= radio_.range(nodes_.at(b).kind);
}

std::vector<EntityId> Engine::neighbors(EntityId id) const {
  std::vector<EntityId> out;
  for (EntityId j : geo_.at(id))
    if (nodes_[j].known && visible(j)) out.push_back(j);
  return out;
}

Advert Engine::honest_advert(EntityId id) const {
  const NodeState& n = nodes_.at(id);
  const auto& battery = world_.node(n.owner).battery;
  Advert a;
  a.bp = battery.mains_powered ? world_.energy().battery_capacity_es
                               : sim::pj_to_mah(battery.remaining, world_.energy().volts);
  for (EntityId j : neighbors(id)) {
    if (j == n.owner || nodes_[j].kind != n.kind) continue;
    (nodes_[j].region == n.region ? a.c : a.cn) += 1.0;
  }
  return a;
}

EntityId Engine::register_phantom(EntityId owner, Vec2 position) {
  const NodeState& o = nodes_.at(owner);
  const EntityId id = world_.add_phantom(o.kind, position, o.region);
  NodeState n;
  n.id = id;
  n.kind = o.kind;
  n.region = o.region;
  n.known = true;
  n.has_gbk = o.has_gbk;
  n.phantom = true;
  n.owner = owner;
  n.verifiers = o.verifiers;
  n.server_pub = o.server_pub;
  nodes_.push_back(std::move(n));
  geo_.emplace_back();
  const double r = radio_.range(o.kind);
  for (const auto& b : nodes_) {
    if (b.id == id || radio_.range(b.kind) <= 0.0) continue;
    const double d = grid::distance(position, world_.node(b.id).position);
    if (d <= r) geo_[id].push_back(b.id);
    if (d <= radio_.range(b.kind)) geo_[b.id].push_back(id);
  }
  return id;
}

EntityId Engine::register_foreign(Vec2 position, RegionId region) {
  const EntityId id = world_.add_node(EntityKind::N, position, region);
  NodeState n;
  n.id = id;
  n.kind = EntityKind::N;
  n.region = region;
  n.known = false;
  n.has_gbk = false;
  n.owner = id;
  nodes_.push_back(std::move(n));
  geo_.emplace_back();
  const double r = radio_.range(EntityKind::N);
  for (const auto& b : nodes_) {
    if (b.id == id || radio_.range(b.kind) <= 0.0) continue;
    const double d = grid::distance(position, world_.node(b.id).position);
    if (d <= r) geo_[id].push_back(b.id);
    if (d <= radio_.range(b.kind)) geo_[b.id].push_back(id);
  }
  return id;
}

// ---------------------------------------------------------------- transport

void Engine::audit(const Bytes& frame) {
  for (const auto& reading : live_readings_) {
    if (std::search(frame.begin(), frame.end(), reading.begin(), reading.end()) != frame.end()) {
      ++stats_.plaintext_exposures;
    }
  }
}

DropReason Engine::hop(EntityId from, EntityId to, const Message& msg) {
  const EntityId tx = radio_of(from);
  const EntityId rx = nodes_.at(to).phantom ? to : radio_of(to);
  const Bytes frame = encode(msg);
  const auto r = radio_.transmit(world_, tx, rx, static_cast<std::uint32_t>(frame.size() * 8), to_string(msg.type), now());
  if (r.reason != DropReason::DeadSender) {
    hooks_->on_air(tx, rx, msg, now());
    if (cfg_.audit) audit(frame);
  }
  return r.reason;
}

DropReason Engine::carry(const std::vector<EntityId>& path, Message& msg) {
  if (path.size() < 2) return path.empty() ? DropReason::NoRoute : DropReason::None;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (const auto r = hop(path[i], path[i + 1], msg); r != DropReason::None) return r;
    if (i + 2 < path.size()) {
      const EntityId relay = path[i + 1];
      if (hooks_->swallow(relay, msg.type, now())) {
        world_.trace().record(TraceRecord{now(), TraceKind::Drop, to_string(msg.type), relay, path[i + 2],
                                          DropReason::Adversarial, 0, 0, 0});
        return DropReason::Adversarial;
      }
      hooks_->tamper(relay, msg);
    }
  }
  return DropReason::None;
}

std::vector<EntityId> Engine::broadcast(EntityId from, const Message& msg, const sim::Radio::Audience& audience) {
  const EntityId tx = radio_of(from);
  const Bytes frame = encode(msg);
  const auto bits = static_cast<std::uint32_t>(frame.size() * 8);
  std::vector<EntityId> got;
  if (!world_.operational(tx)) {
    radio_.broadcast(world_, tx, bits, to_string(msg.type), now(), audience);
    return got;
  }
  for (const auto& [id, r] : radio_.broadcast(world_, tx, bits, to_string(msg.type), now(), audience)) {
    if (r.delivered) got.push_back(id);
  }
  hooks_->on_air(tx, sim::kNoEntity, msg, now());
  if (cfg_.audit) audit(frame);

  // Wormhole replay at the far end of any tunnel that overheard the frame.
  const std::size_t direct = got.size();
  for (std::size_t i = 0; i < direct; ++i) {
    const auto far = hooks_->tunnel(got[i]);
    if (!far || !world_.operational(*far)) continue;
    auto fresh = [&](const sim::PhysicalNode& n) {
      return n.id != tx && std::find(got.begin(), got.end(), n.id) == got.end() && (!audience || audience(n));
    };
    for (const auto& [id, r] : radio_.broadcast(world_, *far, bits, to_string(msg.type), now(), fresh)) {
      if (r.delivered) got.push_back(id);
    }
    hooks_->on_air(*far, sim::kNoEntity, msg, now());
  }
  return got;
}

void Engine::drop(EntityId from, EntityId to, DropReason reason, std::uint32_t readings, std::uint32_t bits,
                  std::string_view label) {
  world_.trace().record(TraceRecord{now(), TraceKind::Drop, label, from, to, reason, 0, bits, readings});
}

// ---------------------------------------------------------------- crypto

void Engine::compute(EntityId id, std::size_t sha_blocks, std::size_t rc5_blocks, std::size_t ecc_muls) {
  const EntityId who = nodes_.at(id).kind == EntityKind::Server ? id : nodes_.at(id).owner;
  if (!world_.operational(who)) return;
  const auto& m = world_.energy();
  const double joules = static_cast<double>(sha_blocks) * m.e_sha1_block +
                        static_cast<double>(rc5_blocks) * m.e_rc5_block + static_cast<double>(ecc_muls) * m.e_ecc_mul;
  if (joules > 0.0) world_.debit(who, joules, now(), TraceKind::Compute, "CRYPTO");
}

void Engine::sign(Message& msg, EntityId signer) {
  if (!cfg_.defense) return;
  const Bytes input = mac_input(msg);
  if (nodes_.at(signer).has_gbk) {
    msg.mac = crypto::hmac(gbk_, input);
    compute(signer, crypto::hmac_blocks(input.size()), 0, 0);
  } else {
    for (auto& b : msg.mac) b = static_cast<std::uint8_t>(rng_());
  }
}

bool Engine::check(const Message& msg, EntityId verifier) {
  if (!cfg_.defense) return true;
  const Bytes input = mac_input(msg);
  compute(verifier, crypto::hmac_blocks(input.size()), 0, 0);
  return nodes_.at(verifier).has_gbk && crypto::verify_hmac(gbk_, input, msg.mac);
}

void Engine::sign_pair(Message& msg, EntityId signer, const Bytes& x_k) {
  if (!cfg_.defense) return;
  const Bytes input = mac_input(msg);
  if (nodes_.at(signer).has_gbk) {
    msg.mac = crypto::nested_hmac(gbk_, x_k, input);
  } else {
    msg.mac = crypto::hmac(x_k, crypto::hmac(x_k, input));  // no GBK: cannot form the outer layer
  }
  compute(signer, crypto::hmac_blocks(input.size()) + crypto::hmac_blocks(crypto::kDigestSize), 0, 0);
}

bool Engine::check_pair(const Message& msg, EntityId verifier, const Bytes& x_k) {
  if (!cfg_.defense) return true;
  const Bytes input = mac_input(msg);
  compute(verifier, crypto::hmac_blocks(input.size()) + crypto::hmac_blocks(crypto::kDigestSize), 0, 0);
  return nodes_.at(verifier).has_gbk && verify_nested(msg, gbk_, x_k);
}

Bytes Engine::seal(EntityId sender, const Bytes& x_k, const Bytes& plain) {
  Bytes body = crypto::rc5_encrypt(crypto::rc5_key_from_secret(x_k), plain);
  compute(sender, 0, body.size() / crypto::kRc5BlockSize, 0);
  return body;
}

std::optional<Bytes> Engine::open(EntityId receiver, const Bytes& x_k, const Bytes& body) {
  compute(receiver, 0, body.size() / crypto::kRc5BlockSize, 0);
  try {
    return crypto::rc5_decrypt(crypto::rc5_key_from_secret(x_k), body);
  } catch (const crypto::CryptoError&) {
    return std::nullopt;
  }
}

const crypto::KeyPair& Engine::keys_of(EntityId id) {
  NodeState& n = nodes_.at(id);
  if (n.keys.private_key == 0) n.keys = crypto::generate_keypair(curve_, derive_seed(seed_, kKeys, id));
  return n.keys;
}

bool Engine::ecdh(EntityId a, EntityId b, const std::vector<EntityId>& path, const Bytes& extra) {
  if (path.size() < 2 || nodes_.at(a).phantom) return false;
  Message ma{MsgType::PUBKEY, a, curve_.encode(keys_of(a).public_key), {}, {}};
  crypto::append(ma.payload, extra);
  sign(ma, a);
  if (carry(path, ma) != DropReason::None) return false;
  if (hooks_->swallow(b, MsgType::PUBKEY, now()) || !check(ma, b)) return false;

  Message mb{MsgType::PUBKEY, b, curve_.encode(keys_of(b).public_key), {}, {}};
  sign(mb, b);
  std::vector<EntityId> back(path.rbegin(), path.rend());
  if (carry(back, mb) != DropReason::None) return false;
  if (!check(mb, a)) return false;

  const std::size_t point_bytes = 2 * curve_.field_bytes();
  try {
    const auto pa = curve_.decode(ByteView(ma.payload).first(point_bytes));
    const auto pb = curve_.decode(ByteView(mb.payload).first(point_bytes));
    compute(a, 0, 0, 1);
    compute(b, 0, 0, 1);
    nodes_[a].secrets[b] = crypto::derive_shared_secret(curve_, keys_of(a).private_key, pb);
    nodes_[b].secrets[a] = crypto::derive_shared_secret(curve_, keys_of(b).private_key, pa);
  } catch (const crypto::CryptoError&) {
    return false;
  }
  return true;
}

Bytes Engine::release_key(int server_idx) {
  const auto s = static_cast<std::size_t>(server_idx);
  if (chains_[s]->remaining() <= 1) {
    // Only K_1 is left: it authenticates the anchor of a fresh chain.
    const auto k1 = chains_[s]->release();
    ++chain_epoch_[s];
    auto next = std::make_unique<crypto::HashChain>(
        seed_bytes(derive_seed(seed_, kChain, s, chain_epoch_[s]), 20), cfg_.chain_length);
    const crypto::ChainKey anchor = next->anchor();
    chains_[s] = std::move(next);
    ++stats_.chain_renewals;
    flood_anchor(server_idx, Bytes(k1->begin(), k1->end()), anchor);
  }
  const auto k = chains_[s]->release();
  return Bytes(k->begin(), k->end());
}

bool Engine::authenticate_control_message(EntityId receiver, int server_idx, const Message& msg, bool allow_current,
                                          bool forged) {
  if (!cfg_.defense) {
    ++stats_.control_accepted;
    if (forged) ++stats_.forged_accepted;
    return true;
  }
  NodeState& n = nodes_.at(receiver);
  auto& verifier = n.verifiers.at(static_cast<std::size_t>(server_idx));
  const auto chain = verifier.peek(msg.chain_key, allow_current);
  compute(receiver, chain.accepted ? chain.steps : cfg_.chain_window, 0, 0);
  const bool ok = chain.accepted && check(msg, receiver);
  if (ok) {
    verifier.accept(msg.chain_key, allow_current);
    ++stats_.control_accepted;
    if (forged) ++stats_.forged_accepted;
  } else {
    ++stats_.control_rejected;
    if (forged) ++stats_.forged_rejected;
  }
  return ok;
}

void Engine::inject_control(EntityId attacker, MsgType type, const Bytes& fake_key) {
  Message m;
  m.type = type;
  m.sender = servers_[0];
  m.payload = seed_bytes(rng_(), type == MsgType::PUBKEY ? 4 + 2 * curve_.field_bytes() : 24);
  m.chain_key = fake_key;
  // A compromised node still holds GBK and can produce a valid MAC; only the
  // chain key gives it away.
  if (nodes_.at(attacker).has_gbk) {
    m.mac = crypto::hmac(gbk_, mac_input(m));
  } else {
    for (auto& b : m.mac) b = static_cast<std::uint8_t>(rng_());
  }
  world_.trace().record(TraceRecord{now(), TraceKind::Attack, "FORGED_CONTROL", attacker, sim::kNoEntity,
                                    DropReason::None, 0, 0, 0});
  const auto got = broadcast(attacker, m, [this](const sim::PhysicalNode& n) {
    return n.id < nodes_.size() && nodes_[n.id].known && !nodes_[n.id].phantom;
  });
  for (EntityId r : got) {
    if (nodes_[r].kind == EntityKind::MU || nodes_[r].kind == EntityKind::PMU) continue;
    authenticate_control_message(r, 0, m, false, true);
  }
}

}  // namespace sermt::protocol
