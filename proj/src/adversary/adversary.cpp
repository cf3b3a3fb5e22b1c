#include "sermt/adversary/adversary.hpp"
#include "sermt/crypto/rc5.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace sermt::adversary {

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

bool carries_data(MsgType t) { return t == MsgType::EMD || t == MsgType::DATA || t == MsgType::AGG_DATA; }

// What a relay is expected to echo or pass on.
bool forwardable(MsgType t) { return carries_data(t) || t == MsgType::TEST || t == MsgType::RQM; }

}  // namespace

Adversary::Adversary(protocol::Engine& engine, sim::EventQueue& queue, const sim::Radio& radio,
                     std::vector<AttackSpec> specs, std::uint64_t seed)
    : engine_(engine),
      queue_(queue),
      radio_(radio),
      specs_(std::move(specs)),
      seed_(seed),
      rng_(protocol::derive_seed(seed, 0xad5e)) {}

std::vector<EntityId> Adversary::draw(const AttackSpec& spec, std::size_t index) {
  if (!spec.targets.empty()) return spec.targets;
  std::vector<EntityId> pool;
  for (const auto& e : engine_.layout().entities) {
    if (std::find(spec.population.begin(), spec.population.end(), e.kind) != spec.population.end()) pool.push_back(e.id);
  }
  const auto n = static_cast<std::size_t>(spec.count);
  if (n > pool.size()) {
    throw AttackError(fmt::format("{}: count {} exceeds the {} candidate nodes", to_string(spec.kind), n, pool.size()));
  }
  std::mt19937_64 pick(protocol::derive_seed(seed_, 0xd4a3, index));
  std::shuffle(pool.begin(), pool.end(), pick);
  pool.resize(n);
  std::sort(pool.begin(), pool.end());
  return pool;
}

void Adversary::install(double duration) {
  if (installed_) throw AttackError("attacks already installed");
  installed_ = true;
  const auto& layout = engine_.layout();
  for (const auto& spec : specs_) validate(spec, layout);

  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const AttackSpec& spec = specs_[i];
    std::vector<EntityId> nodes;
    if (spec.foreign) {
      std::mt19937_64 place(protocol::derive_seed(seed_, 0xf0e1, i));
      for (int k = 0; k < spec.count; ++k) {
        const std::size_t r = place() % layout.regions.size();
        const auto& box = layout.region_boxes.at(r);
        const grid::Vec2 p{box.min.x + unit(place) * (box.max.x - box.min.x),
                           box.min.y + unit(place) * (box.max.y - box.min.y)};
        nodes.push_back(engine_.register_foreign(p, layout.regions[r].id));
      }
    } else {
      nodes = draw(spec, i);
    }
    for (EntityId id : nodes) {
      // Trusted substation equipment must never carry attack behaviour.
      if (!attackable(engine_.node(id).kind)) throw std::logic_error("attack installed on trusted equipment");
      roles_[id].push_back(overrides_.size());
      overrides_.push_back(Override{id, spec.kind, i});
    }

    switch (spec.kind) {
      case AttackKind::Sybil: {
        std::mt19937_64 place(protocol::derive_seed(seed_, 0x5b11, i));
        for (EntityId id : nodes) {
          const auto home = engine_.world().node(id).position;
          const double reach = radio_.range(engine_.node(id).kind);
          for (int k = 0; k < spec.personas; ++k) {
            const double a = 2.0 * std::numbers::pi * unit(place);
            const double d = reach * std::sqrt(unit(place));
            phantoms_[id].push_back(engine_.register_phantom(id, {home.x + d * std::cos(a), home.y + d * std::sin(a)}));
          }
        }
        break;
      }
      case AttackKind::Wormhole:
        for (std::size_t k = 0; k + 1 < nodes.size(); k += 2) {
          tunnel_peer_[nodes[k]] = nodes[k + 1];
          tunnel_peer_[nodes[k + 1]] = nodes[k];
        }
        break;
      case AttackKind::Eavesdrop:
        spies_.insert(spies_.end(), nodes.begin(), nodes.end());
        break;
      case AttackKind::Flood:
      case AttackKind::Sinkhole:
        for (double t = spec.start_time; t <= duration; t += spec.interval) {
          queue_.schedule(t, [this, i] { burst(i); });
        }
        break;
      default:
        break;
    }
  }
  std::sort(spies_.begin(), spies_.end());
  spies_.erase(std::unique(spies_.begin(), spies_.end()), spies_.end());
  engine_.set_hooks(this);
}

std::vector<EntityId> Adversary::attackers(AttackKind kind) const {
  std::vector<EntityId> out;
  for (const auto& o : overrides_)
    if (o.kind == kind) out.push_back(o.node);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const std::vector<EntityId>& Adversary::phantoms(EntityId node) const {
  static const std::vector<EntityId> none;
  auto it = phantoms_.find(node);
  return it == phantoms_.end() ? none : it->second;
}

const AttackSpec* Adversary::active(EntityId node, AttackKind kind, double now) const {
  auto it = roles_.find(node);
  if (it == roles_.end()) return nullptr;
  for (std::size_t o : it->second) {
    const auto& spec = specs_[overrides_[o].spec];
    if (overrides_[o].kind == kind && now >= spec.start_time) return &spec;
  }
  return nullptr;
}

void Adversary::burst(std::size_t spec_index) {
  const AttackSpec& spec = specs_[spec_index];
  for (const auto& o : overrides_) {
    if (o.spec != spec_index || !engine_.world().operational(o.node)) continue;
    const int frames = spec.kind == AttackKind::Flood ? spec.rate : 1;
    const MsgType type = spec.kind == AttackKind::Flood ? MsgType::RQM : MsgType::ANCHOR_BCAST;
    for (int k = 0; k < frames; ++k) {
      protocol::Bytes fake(20);
      for (auto& b : fake) b = static_cast<std::uint8_t>(rng_());
      engine_.inject_control(o.node, type, fake);
      ++log_.bogus_frames_sent;
    }
  }
}

bool Adversary::swallow(EntityId node, MsgType type, double now) {
  if (!forwardable(type)) return false;
  if (active(node, AttackKind::Sinkhole, now)) {
    ++log_.frames_swallowed;
    return true;
  }
  if (const auto* spec = active(node, AttackKind::Drop, now)) {
    const bool drop = spec->drop_probability >= 1.0 || unit(rng_) < spec->drop_probability;
    log_.frames_swallowed += drop;
    return drop;
  }
  return false;
}

protocol::Advert Adversary::advertise(EntityId node, const protocol::Advert& honest) {
  if (!active(node, AttackKind::Sinkhole, engine_.now())) return honest;
  ++log_.inflated_adverts;
  const double top = engine_.world().energy().battery_capacity_es;
  return protocol::Advert{10.0 * top, 10.0 * std::max(honest.c, 1.0), 10.0 * std::max(honest.cn, 1.0)};
}

std::vector<EntityId> Adversary::personas(EntityId node) {
  if (!active(node, AttackKind::Sybil, engine_.now())) return {};
  const auto& p = phantoms(node);
  log_.fake_locations_advertised += p.size();
  return p;
}

void Adversary::tamper(EntityId node, Message& msg) {
  if (!carries_data(msg.type) || msg.payload.empty() || !active(node, AttackKind::FalseData, engine_.now())) return;
  msg.payload[msg.payload.size() / 2] ^= 0x5a;
  ++log_.frames_tampered;
}

std::optional<EntityId> Adversary::tunnel(EntityId node) {
  auto it = tunnel_peer_.find(node);
  if (it == tunnel_peer_.end() || !active(node, AttackKind::Wormhole, engine_.now())) return std::nullopt;
  ++log_.frames_tunnelled;
  return it->second;
}

void Adversary::on_air(EntityId from, EntityId to, const Message& msg, double now) {
  (void)to;
  if (spies_.empty()) return;
  const auto& world = engine_.world();
  const double reach = radio_.range(world.node(from).kind);
  for (EntityId spy : spies_) {
    if (spy == from || !world.operational(spy) || !active(spy, AttackKind::Eavesdrop, now)) continue;
    if (grid::distance(world.node(spy).position, world.node(from).position) > reach) continue;
    ++log_.frames_overheard;
    eavesdrop(spy, msg);
  }
}

// Tries every key the spy actually holds; counts a success only when the
// body decrypts and parses as an aggregate.
void Adversary::eavesdrop(EntityId spy, const Message& msg) {
  if (!carries_data(msg.type)) return;
  const auto& me = engine_.node(spy);
  if (msg.type == MsgType::AGG_DATA) {
    if (me.keys.private_key == 0) return;
    ++log_.decrypt_attempts;
    try {
      protocol::parse_aggregate(crypto::ecc_decrypt(engine_.curve(), me.keys.private_key, msg.payload));
      ++log_.payloads_decrypted;
    } catch (const std::exception&) {
    }
    return;
  }
  for (const auto& [peer, secret] : me.secrets) {
    ++log_.decrypt_attempts;
    try {
      protocol::parse_aggregate(crypto::rc5_decrypt(crypto::rc5_key_from_secret(secret.x_k), msg.payload));
      ++log_.payloads_decrypted;
      return;
    } catch (const std::exception&) {
    }
  }
}

void Adversary::write(std::ostream& out) const {
  const std::pair<const char*, std::uint64_t> rows[] = {
      {"bogus_frames_sent", log_.bogus_frames_sent},
      {"frames_swallowed", log_.frames_swallowed},
      {"fake_locations_advertised", log_.fake_locations_advertised},
      {"inflated_adverts", log_.inflated_adverts},
      {"frames_tampered", log_.frames_tampered},
      {"frames_tunnelled", log_.frames_tunnelled},
      {"frames_overheard", log_.frames_overheard},
      {"decrypt_attempts", log_.decrypt_attempts},
      {"payloads_decrypted", log_.payloads_decrypted},
  };
  for (const auto& o : overrides_) out << fmt::format("ATTACK install {} {}\n", to_string(o.kind), o.node);
  for (auto [k, v] : rows) out << fmt::format("ATTACK {} {}\n", k, v);
}

}  // namespace sermt::adversary
