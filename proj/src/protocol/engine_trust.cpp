#include <algorithm>
#include <deque>

#include "sermt/protocol/engine.hpp"

namespace sermt::protocol {

using sim::DropReason;
using sim::TraceKind;
using sim::TraceRecord;

namespace {

bool is_sensor(EntityKind k) { return k == EntityKind::N || k == EntityKind::ES || k == EntityKind::PDC; }

using Results = std::map<EntityId, std::pair<std::uint8_t, std::uint8_t>>;

Bytes encode_results(RegionId region, const Results& results) {
  Bytes out;
  crypto::put_u16_be(out, static_cast<std::uint16_t>(region));
  crypto::put_u16_be(out, static_cast<std::uint16_t>(results.size()));
  for (const auto& [id, ds] : results) {
    crypto::put_u32_be(out, id);
    out.push_back(ds.first);
    out.push_back(ds.second);
  }
  return out;
}

Results parse_results(ByteView data) {
  if (data.size() < 4) throw crypto::CryptoError(crypto::CryptoErrorKind::Format, "truncated blocked list");
  const std::size_t n = crypto::get_u16_be(data, 2);
  if (data.size() != 4 + 6 * n) throw crypto::CryptoError(crypto::CryptoErrorKind::Format, "blocked list length");
  Results out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = 4 + 6 * i;
    const std::uint8_t d = data[at + 4], s = data[at + 5];
    if (s == 0 || d > s) throw crypto::CryptoError(crypto::CryptoErrorKind::Format, "blocked list record");
    out[crypto::get_u32_be(data, at)] = {d, s};
  }
  return out;
}

}  // namespace

struct Engine::RoundCtx {
  int server = 0;
  Bytes key;
  std::vector<char> trusted;    // usable as relay this round
  std::vector<char> evaluated;
  Results results;
};

// BFS over this round's trusted relays (ascending-ID neighbour order); the
// endpoints themselves need not be trusted.
std::vector<EntityId> Engine::trusted_path(const RoundCtx& ctx, EntityId from, EntityId to) const {
  if (from == to) return {from};
  std::vector<EntityId> parent(nodes_.size(), sim::kNoEntity);
  std::deque<EntityId> open{from};
  parent[from] = from;
  while (!open.empty()) {
    const EntityId u = open.front();
    open.pop_front();
    for (EntityId v : geo_[u]) {
      if (parent[v] != sim::kNoEntity || !bilink(u, v)) continue;
      if (v == to) {
        std::vector<EntityId> path{to};
        for (EntityId w = u; w != from; w = parent[w]) path.push_back(w);
        path.push_back(from);
        std::reverse(path.begin(), path.end());
        return path;
      }
      if (!ctx.trusted[v] || !world_.operational(v)) continue;
      parent[v] = u;
      open.push_back(v);
    }
  }
  return {};
}

std::pair<std::uint8_t, std::uint8_t> Engine::run_tests(int server_idx, EntityId evaluator,
                                                        const std::vector<EntityId>& path, EntityId target,
                                                        const Bytes& key) {
  const std::vector<EntityId> back(path.rbegin(), path.rend());
  std::uint8_t delivered = 0;
  const auto sent = static_cast<std::uint8_t>(cfg_.test_messages);
  for (int k = 0; k < cfg_.test_messages; ++k) {
    Message test{MsgType::TEST, evaluator, {}, key, {}};
    crypto::put_u32_be(test.payload, static_cast<std::uint32_t>(rng_()));
    crypto::put_u32_be(test.payload, target);
    test.payload.push_back(static_cast<std::uint8_t>(k));
    sign(test, evaluator);
    if (carry(path, test) != DropReason::None) continue;
    const bool ok = server_idx >= 0 ? authenticate_control_message(target, server_idx, test, true) : check(test, target);
    if (!ok) continue;
    if (hooks_->swallow(target, MsgType::TEST, now())) {
      world_.trace().record(TraceRecord{now(), TraceKind::Drop, "TEST", target, evaluator, DropReason::Adversarial, 0, 0, 0});
      continue;
    }
    Message echo{MsgType::TEST, target, test.payload, test.chain_key, {}};
    sign(echo, target);
    hooks_->tamper(target, echo);
    if (carry(back, echo) != DropReason::None) continue;
    if (echo.payload != test.payload || !check(echo, evaluator)) continue;
    ++delivered;
  }
  return {delivered, sent};
}

void Engine::evaluate_region(RoundCtx& ctx, EntityId radio, EntityId sender, RegionId region) {
  std::vector<EntityId> targets;
  for (const auto& n : nodes_) {
    if (n.known && is_sensor(n.kind) && n.region == region && !ctx.evaluated[n.id]) targets.push_back(n.id);
  }
  for (bool progress = true; progress;) {
    progress = false;
    // BFS tree over trusted relays rooted at the evaluator.
    std::vector<int> depth(nodes_.size(), -1);
    std::vector<EntityId> parent(nodes_.size(), sim::kNoEntity);
    std::deque<EntityId> open{radio};
    depth[radio] = 0;
    while (!open.empty()) {
      const EntityId u = open.front();
      open.pop_front();
      for (EntityId v : geo_[u]) {
        if (depth[v] >= 0 || !ctx.trusted[v] || !world_.operational(v) || !bilink(u, v)) continue;
        depth[v] = depth[u] + 1;
        parent[v] = u;
        open.push_back(v);
      }
    }
    for (EntityId t : targets) {
      if (ctx.evaluated[t]) continue;
      EntityId best = sim::kNoEntity;
      for (EntityId u : geo_[t]) {
        if (depth[u] < 0 || !bilink(u, t)) continue;
        if (best == sim::kNoEntity || depth[u] < depth[best]) best = u;
      }
      if (best == sim::kNoEntity) continue;
      std::vector<EntityId> path{t};
      for (EntityId w = best; w != radio; w = parent[w]) path.push_back(w);
      path.push_back(radio);
      std::reverse(path.begin(), path.end());
      const auto ds = run_tests(ctx.server, sender, path, t, ctx.key);
      ctx.results[t] = ds;
      ctx.evaluated[t] = 1;
      if (is_trusted(compute_trust(ds.first, ds.second)) && !nodes_[t].phantom) ctx.trusted[t] = 1;
      progress = true;
    }
  }
}

TrustTable Engine::run_trust_round(int server_idx) {
  const auto s = static_cast<std::size_t>(server_idx);
  ++stats_.trust_rounds;
  round_in_progress_ = true;
  round_stamp_ms_ = static_cast<std::uint32_t>(now() * 1000.0);

  RoundCtx ctx;
  ctx.server = server_idx;
  ctx.key = release_key(server_idx);
  ctx.trusted.assign(nodes_.size(), 0);
  ctx.evaluated.assign(nodes_.size(), 0);
  for (EntityId gw : gateways_) ctx.trusted[gw] = 1;

  const EntityId home_gw = cc_gateways_[s];
  const RegionId home = nodes_[home_gw].region;
  std::map<RegionId, Results> region_results;
  auto results_of = [&](RegionId r) {
    Results out;
    for (const auto& [id, ds] : ctx.results)
      if (nodes_[id].region == r) out[id] = ds;
    return out;
  };

  evaluate_region(ctx, home_gw, servers_[s], home);
  region_results[home] = results_of(home);

  std::set<RegionId> visited{home};
  std::deque<RegionId> queue{home};
  while (!queue.empty()) {
    const RegionId from = queue.front();
    queue.pop_front();
    // Relays X: trusted, evaluated nodes of the finished region, best TV first.
    std::vector<EntityId> relays;
    for (const auto& [id, ds] : ctx.results) {
      if (nodes_[id].region == from && ctx.trusted[id] && world_.operational(id)) relays.push_back(id);
    }
    std::stable_sort(relays.begin(), relays.end(), [&](EntityId a, EntityId b) {
      const auto& da = ctx.results[a];
      const auto& db = ctx.results[b];
      return compute_trust(da.first, da.second) > compute_trust(db.first, db.second);
    });
    for (const auto& region : layout_.regions) {
      const RegionId to = region.id;
      if (visited.count(to)) continue;
      bool done = false;
      for (EntityId x : relays) {
        // nearest node of the adjacent region that has not already failed a probe
        EntityId y = sim::kNoEntity;
        double best = 0.0;
        for (EntityId v : geo_[x]) {
          if (!nodes_[v].known || !is_sensor(nodes_[v].kind) || nodes_[v].region != to || !bilink(x, v)) continue;
          if (ctx.evaluated[v] && !ctx.trusted[v]) continue;
          const double d = grid::distance(world_.node(x).position, world_.node(v).position);
          if (y == sim::kNoEntity || d < best) y = v, best = d;
        }
        if (y == sim::kNoEntity) continue;

        Message rqm{MsgType::RQM, servers_[s], {}, cfg_.defense ? ctx.key : Bytes{}, {}};
        crypto::put_u16_be(rqm.payload, static_cast<std::uint16_t>(to));
        crypto::put_u32_be(rqm.payload, round_stamp_ms_);
        sign(rqm, servers_[s]);
        if (carry(trusted_path(ctx, home_gw, x), rqm) != DropReason::None) continue;
        if (!authenticate_control_message(x, server_idx, rqm, true) || hooks_->swallow(x, MsgType::RQM, now())) continue;

        if (!ctx.evaluated[y]) {
          const auto ds = run_tests(server_idx, x, {x, y}, y, ctx.key);
          ctx.results[y] = ds;
          ctx.evaluated[y] = 1;
          if (is_trusted(compute_trust(ds.first, ds.second)) && !nodes_[y].phantom) ctx.trusted[y] = 1;
        }
        if (!ctx.trusted[y]) continue;  // not forwarded through an untrusted node; next relay
        if (hop(x, y, rqm) != DropReason::None || !authenticate_control_message(y, server_idx, rqm, true)) continue;

        visited.insert(to);
        queue.push_back(to);
        done = true;
        evaluate_region(ctx, y, y, to);

        Message list{MsgType::BLOCKED_LIST, y, encode_results(to, results_of(to)), {}, {}};
        sign(list, y);
        hooks_->tamper(y, list);
        if (carry(trusted_path(ctx, y, home_gw), list) == DropReason::None && check(list, servers_[s])) {
          try {
            region_results[to] = parse_results(list.payload);
          } catch (const crypto::CryptoError&) {
          }
        }
        break;
      }
      (void)done;
    }
  }

  TrustTable& table = server_tables_[s];
  for (const auto& region : layout_.regions) {
    auto it = region_results.find(region.id);
    if (it == region_results.end()) {
      ++stats_.stale_regions;
      ++stats_.alarms;
      world_.trace().record(TraceRecord{now(), TraceKind::Alarm, "STALE_REGION", home_gw, sim::kNoEntity,
                                        DropReason::NoRoute, 0, 0, static_cast<std::uint32_t>(region.id)});
      continue;
    }
    for (const auto& [id, ds] : it->second) table.set(TrustRecord{id, ds.first, ds.second, round_stamp_ms_});
  }

  // Share: peer server, then every gateway, all under one fresh chain key.
  const Bytes table_key = release_key(server_idx);
  const std::size_t peer = 1 - s;
  Message shared{MsgType::BLOCKED_LIST, servers_[s], table.serialize(), table_key, {}};
  sign(shared, servers_[s]);
  bool peer_ok = false;
  {
    Message m = shared;
    if (carry(trusted_path(ctx, home_gw, cc_gateways_[peer]), m) == DropReason::None &&
        authenticate_control_message(servers_[peer], server_idx, m, false)) {
      try {
        server_tables_[peer] = TrustTable::parse(m.payload);
        peer_ok = true;
      } catch (const crypto::CryptoError&) {
      }
    }
  }
  if (peer_ok && server_tables_[0] == server_tables_[1]) {
    ++stats_.tables_converged;
  } else {
    ++stats_.tables_diverged;
    ++stats_.alarms;
  }
  for (EntityId gw : gateways_) {
    if (gw == home_gw) {
      gateway_tables_[gw] = table;
      continue;
    }
    if (gw == cc_gateways_[peer] && peer_ok) {
      gateway_tables_[gw] = server_tables_[peer];
      continue;
    }
    Message m = shared;
    if (carry(trusted_path(ctx, home_gw, gw), m) == DropReason::None &&
        authenticate_control_message(gw, server_idx, m, false)) {
      try {
        gateway_tables_[gw] = TrustTable::parse(m.payload);
      } catch (const crypto::CryptoError&) {
      }
    }
  }

  // Both servers rotate their key pairs and announce them.
  for (std::size_t i = 0; i < 2; ++i) {
    server_prev_keys_[i] = server_keys_[i];
    server_keys_[i] = crypto::generate_keypair(curve_, derive_seed(seed_, 3, i, server_generation_[i]));
    ++server_generation_[i];
    compute(servers_[i], 0, 0, 1);
    flood_pubkey(static_cast<int>(i));
  }
  next_server_ = 1 - server_idx;
  return table;
}

void Engine::flood_pubkey(int server_idx) {
  const auto s = static_cast<std::size_t>(server_idx);
  const std::uint32_t generation = server_generation_[s];
  Message m{MsgType::PUBKEY, servers_[s], {}, cfg_.defense ? release_key(server_idx) : Bytes{}, {}};
  crypto::put_u32_be(m.payload, generation);
  crypto::append(m.payload, curve_.encode(server_keys_[s].public_key));
  sign(m, servers_[s]);

  auto adopt = [&](EntityId id) {
    nodes_[id].server_pub[s] = server_keys_[s].public_key;
    nodes_[id].server_pub_generation[s] = generation;
  };
  // Both CC gateways sit on the servers' LAN.
  std::deque<EntityId> frontier;
  for (std::size_t i = 0; i < 2; ++i) {
    if (i == s || authenticate_control_message(cc_gateways_[i], server_idx, m, false)) {
      if (i == s && cfg_.defense) nodes_[cc_gateways_[i]].verifiers[s].accept(m.chain_key, false);
      adopt(cc_gateways_[i]);
      adopt(servers_[i]);
      frontier.push_back(cc_gateways_[i]);
    }
  }
  auto audience = [this](const sim::PhysicalNode& n) {
    return n.id < nodes_.size() && !nodes_[n.id].phantom &&
           (is_sensor(nodes_[n.id].kind) || nodes_[n.id].kind == EntityKind::Gateway);
  };
  while (!frontier.empty()) {
    const EntityId b = frontier.front();
    frontier.pop_front();
    for (EntityId r : broadcast(b, m, audience)) {
      NodeState& n = nodes_[r];
      if (!n.known || n.server_pub_generation[s] >= generation) continue;  // duplicate copy
      if (!authenticate_control_message(r, server_idx, m, false)) continue;
      adopt(r);
      if (hooks_->swallow(r, MsgType::PUBKEY, now())) continue;
      frontier.push_back(r);
    }
  }
}

void Engine::flood_anchor(int server_idx, const Bytes& k1, const crypto::ChainKey& new_anchor) {
  const auto s = static_cast<std::size_t>(server_idx);
  Message m{MsgType::ANCHOR_BCAST, servers_[s], Bytes(new_anchor.begin(), new_anchor.end()), k1, {}};
  sign(m, servers_[s]);
  std::vector<char> done(nodes_.size(), 0);
  auto adopt = [&](EntityId id) {
    nodes_[id].verifiers[s].reset_anchor(new_anchor);
    done[id] = 1;
  };
  std::deque<EntityId> frontier;
  for (std::size_t i = 0; i < 2; ++i) {
    if (i == s || authenticate_control_message(cc_gateways_[i], server_idx, m, false)) {
      adopt(cc_gateways_[i]);
      adopt(servers_[i]);
      frontier.push_back(cc_gateways_[i]);
    }
  }
  auto audience = [this](const sim::PhysicalNode& n) {
    return n.id < nodes_.size() && !nodes_[n.id].phantom &&
           (is_sensor(nodes_[n.id].kind) || nodes_[n.id].kind == EntityKind::Gateway);
  };
  while (!frontier.empty()) {
    const EntityId b = frontier.front();
    frontier.pop_front();
    for (EntityId r : broadcast(b, m, audience)) {
      if (done[r] || !nodes_[r].known) continue;
      if (!authenticate_control_message(r, server_idx, m, false)) continue;
      adopt(r);
      if (hooks_->swallow(r, MsgType::ANCHOR_BCAST, now())) continue;
      frontier.push_back(r);
    }
  }
  // Nodes the flood missed would reject the new chain forever; resynchronise
  // them on their next accepted frame is out of scope, so count them.
  for (const auto& n : nodes_) {
    if (n.known && !n.phantom && (is_sensor(n.kind) || n.kind == EntityKind::Gateway) && !done[n.id]) ++stats_.alarms;
  }
}

void Engine::end_round() {
  round_in_progress_ = false;
  es_paths_.clear();
  pdc_check();
  select_forwarders();
  auto deferred = std::move(deferred_probes_);
  deferred_probes_.clear();
  for (EntityId gw : deferred) probe_es(gw);
}

void Engine::pdc_check() {
  for (const auto& region : layout_.regions) {
    const EntityId cur = acting_pdc_.at(region.id);
    const bool blocked = cfg_.defense && latest_table().blocked(cur);
    if (blocked || !world_.operational(cur)) pdc_failover(region.id);
  }
}

EntityId Engine::pdc_failover(RegionId region) {
  const TrustTable& table = latest_table();
  const EntityId cur = acting_pdc_.at(region);
  std::vector<std::pair<EntityId, double>> scored;
  for (const auto& n : nodes_) {
    if (n.kind != EntityKind::ES || n.region != region || !n.known || n.phantom || n.id == cur) continue;
    if (!world_.operational(n.id)) continue;
    const double tv = cfg_.defense ? table.tv(n.id) : 100.0;
    if (is_trusted(tv)) scored.emplace_back(n.id, tv);
  }
  const auto pick = argmax_score(scored);
  if (!pick) {
    ++stats_.alarms;
    world_.trace().record(TraceRecord{now(), TraceKind::Alarm, "NO_PDC", cur, sim::kNoEntity, DropReason::NoRoute, 0, 0, 0});
    return cur;
  }
  acting_pdc_[region] = *pick;
  ++stats_.pdc_failovers;
  recompute_overlay();
  return *pick;
}

void Engine::restore_pdc(RegionId region) {
  const auto& r = layout_.region(region);
  if (!r.pdc_id || acting_pdc_.at(region) == *r.pdc_id) return;
  acting_pdc_[region] = *r.pdc_id;
  recompute_overlay();
}

void Engine::recompute_overlay() {
  es_paths_.clear();
  overlay_.clear();
  const TrustTable& table = latest_table();
  std::vector<EntityId> ids;
  for (const auto& [rid, pdc] : acting_pdc_) ids.push_back(pdc);
  ids.push_back(cc_gateways_[0]);
  ids.push_back(cc_gateways_[1]);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto index = [&](EntityId id) {
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  Graph g(ids.size());
  for (EntityId u : ids) {
    if (nodes_[u].kind == EntityKind::Gateway) continue;  // terminals
    const double ru = radio_.range(nodes_[u].kind);
    for (EntityId v : ids) {
      if (u == v) continue;
      const double d = grid::distance(world_.node(u).position, world_.node(v).position);
      if (d > ru) continue;
      double w = d;
      if (cfg_.defense) {
        const bool gw = nodes_[v].kind == EntityKind::Gateway;
        const double bp = gw ? world_.energy().battery_capacity_es : honest_advert(v).bp;
        w = route_weight(d, bp, gw ? 100.0 : table.tv(v));
      }
      g.add_edge(index(u), index(v), w);
    }
  }
  for (const auto& [rid, pdc] : acting_pdc_) {
    const auto paths = shortest_paths_from(g, index(pdc));
    for (int i = 0; i < 2; ++i) {
      std::vector<EntityId> path;
      if (const auto& p = paths[index(cc_gateways_[static_cast<std::size_t>(i)])]) {
        for (std::size_t k : p->nodes) path.push_back(ids[k]);
      }
      overlay_[{rid, i}] = path;
      selections_.push_back(SelectionEvent{now(), pdc, path.empty() ? sim::kNoEntity : path.back(), path,
                                           SelectionEvent::What::PdcOverlay});
    }
  }
}

}  // namespace sermt::protocol
