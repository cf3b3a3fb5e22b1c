#include <algorithm>

#include "sermt/protocol/engine.hpp"

namespace sermt::protocol {

using sim::DropReason;
using sim::TraceKind;
using sim::TraceRecord;

namespace {

void put_advert(Bytes& out, const Advert& a) {
  crypto::put_u32_be(out, static_cast<std::uint32_t>(std::clamp(a.bp * 1000.0, 0.0, 4.0e9)));  // milli-mAh
  crypto::put_u16_be(out, static_cast<std::uint16_t>(std::clamp(a.c, 0.0, 65535.0)));
  crypto::put_u16_be(out, static_cast<std::uint16_t>(std::clamp(a.cn, 0.0, 65535.0)));
}

Advert get_advert(ByteView in) {
  if (in.size() != 8) throw crypto::CryptoError(crypto::CryptoErrorKind::Format, "ACK payload");
  return Advert{crypto::get_u32_be(in, 0) / 1000.0, static_cast<double>(crypto::get_u16_be(in, 4)),
                static_cast<double>(crypto::get_u16_be(in, 6))};
}

}  // namespace

double Engine::view_tv(const TrustTable& table, EntityId id) const { return cfg_.defense ? table.tv(id) : 100.0; }

bool Engine::view_blocked(const TrustTable& table, EntityId id) const { return cfg_.defense && table.blocked(id); }

std::vector<Reading> Engine::make_readings(EntityId gateway, EntityKind kind, std::uint32_t seq, std::size_t len) {
  std::vector<Reading> out;
  const auto sid = nodes_.at(gateway).substation;
  for (const auto& e : layout_.entities) {
    if (e.kind != kind || e.substation != sid) continue;
    out.push_back(Reading{e.id, seq, reading_bytes(seed_, e.id, seq, len)});
    if (cfg_.audit) live_readings_.push_back(out.back().data);
  }
  return out;
}

// ---------------------------------------------------------------- MU plane

void Engine::select_forwarders() {
  ++epoch_;
  mu_choice_.clear();
  clusters_.clear();
  cluster_of_carrier_.clear();
  mu_pending_.clear();
  taken_.clear();
  std::vector<EntityId> soliciting;
  for (EntityId gw : gateways_)
    if (gw != cc_gateways_[0]) soliciting.push_back(gw);
  solicit(soliciting);
}

void Engine::solicit(const std::vector<EntityId>& gateways, bool retry) {
  auto n_only = [this](const sim::PhysicalNode& n) {
    return n.id < nodes_.size() && nodes_[n.id].kind == EntityKind::N && !nodes_[n.id].phantom;
  };
  std::map<EntityId, std::vector<EntityId>> heard;  // node -> soliciting gateways
  for (EntityId gw : gateways) {
    Message m{MsgType::FORW_RQM, gw, {}, {}, {}};
    crypto::put_u16_be(m.payload, static_cast<std::uint16_t>(*nodes_[gw].substation));
    crypto::put_u32_be(m.payload, epoch_);
    sign(m, gw);
    for (EntityId r : broadcast(gw, m, n_only)) {
      if (check(m, r)) heard[r].push_back(gw);
    }
  }

  std::set<EntityId> busy;
  for (const auto& [gw, carrier] : mu_choice_) busy.insert(carrier);
  std::map<EntityId, std::vector<Candidate>> offers;
  for (const auto& [r, gws] : heard) {
    if (busy.count(r) || hooks_->swallow(r, MsgType::FORW_RQM, now())) continue;
    // ACK only the closest soliciting gateway (lower ID on equal distance)
    EntityId best = gws.front();
    double best_d = grid::distance(world_.node(r).position, world_.node(best).position);
    for (EntityId gw : gws) {
      const double d = grid::distance(world_.node(r).position, world_.node(gw).position);
      if (d < best_d || (d == best_d && gw < best)) best = gw, best_d = d;
    }
    std::vector<EntityId> voices{r};
    for (EntityId p : hooks_->personas(r)) voices.push_back(p);
    for (EntityId id : voices) {
      Message ack{MsgType::ACK, id, {}, {}, {}};
      put_advert(ack.payload, hooks_->advertise(id, honest_advert(id)));
      sign(ack, id);
      hooks_->tamper(r, ack);
      if (hop(id, best, ack) != DropReason::None || !check(ack, best)) continue;
      const TrustTable& table = gateway_tables_.at(best);
      if (view_blocked(table, id)) continue;
      try {
        const Advert a = get_advert(ack.payload);
        offers[best].push_back(Candidate{id, a.bp, view_tv(table, id), a.c});
      } catch (const crypto::CryptoError&) {
      }
    }
  }

  std::vector<EntityId> carriers;
  for (EntityId gw : gateways) {
    const auto pick = select_forwarder(offers[gw]);
    bool ok = false;
    if (pick) {
      // The handshake carries the trust view of the carrier's neighbourhood.
      Bytes view;
      const TrustTable& table = gateway_tables_.at(gw);
      for (EntityId v : geo_[*pick]) {
        if (!nodes_[v].known) continue;
        crypto::put_u32_be(view, v);
        const auto rec = table.find(v);
        view.push_back(rec ? rec->delivered : 1);
        view.push_back(rec ? rec->sent : 1);
      }
      ok = ecdh(gw, *pick, {gw, *pick}, view);
      mu_choice_[gw] = *pick;  // kept even when the handshake fails: frames to it are lost
      selections_.push_back(SelectionEvent{now(), gw, *pick, {gw, *pick}, SelectionEvent::What::MuForwarder});
      if (ok) carriers.push_back(*pick);
    }
    if (!pick) {
      // Nodes ACK only their closest soliciting gateway, so a miss in the
      // joint pass is retried alone on the next tick before alarming.
      if (retry) {
        ++stats_.alarms;
        ++stats_.isolation_alarms;
        world_.trace().record(
            TraceRecord{now(), TraceKind::Alarm, "ISOLATED_GW", gw, sim::kNoEntity, DropReason::NoRoute, 0, 0, 0});
      }
      mu_pending_.push_back(gw);
    }
  }
  std::sort(carriers.begin(), carriers.end());
  for (EntityId d : carriers) form_cluster(d);
}

void Engine::form_cluster(EntityId carrier) {
  EntityId gw = 0;
  for (const auto& [g, c] : mu_choice_)
    if (c == carrier) gw = g;
  const TrustTable& table = gateway_tables_.at(gw);
  std::set<EntityId> carriers;
  for (const auto& [g, c] : mu_choice_) carriers.insert(c);

  Cluster cl;
  cl.gateway = gw;
  cl.carrier = carrier;
  std::vector<Candidate> cands;
  const Advert own = hooks_->advertise(carrier, honest_advert(carrier));
  cands.push_back(Candidate{carrier, own.bp, view_tv(table, carrier), own.cn});

  if (!hooks_->swallow(carrier, MsgType::JOIN_RQM, now())) {
    Message join{MsgType::JOIN_RQM, carrier, {}, {}, {}};
    crypto::put_u16_be(join.payload, static_cast<std::uint16_t>(nodes_[carrier].region));
    crypto::put_u32_be(join.payload, epoch_);
    sign(join, carrier);
    auto n_only = [this](const sim::PhysicalNode& n) {
      return n.id < nodes_.size() && nodes_[n.id].kind == EntityKind::N && !nodes_[n.id].phantom;
    };
    for (EntityId r : broadcast(carrier, join, n_only)) {
      if (carriers.count(r) || taken_.count(r)) continue;
      if (!check(join, r)) continue;  // no GBK: cannot read the request
      taken_.insert(r);
      std::vector<EntityId> voices{r};
      for (EntityId p : hooks_->personas(r)) voices.push_back(p);
      for (EntityId id : voices) {
        Message ack{MsgType::ACK, id, {}, {}, {}};
        put_advert(ack.payload, hooks_->advertise(id, honest_advert(id)));
        sign(ack, id);
        hooks_->tamper(r, ack);
        if (hop(id, carrier, ack) != DropReason::None || !check(ack, carrier)) continue;
        if (view_blocked(table, id)) continue;
        try {
          const Advert a = get_advert(ack.payload);
          cands.push_back(Candidate{id, a.bp, view_tv(table, id), a.cn});
        } catch (const crypto::CryptoError&) {
        }
      }
    }
  }

  cl.head = *elect_cluster_head(cands);
  for (const auto& c : cands) cl.members.push_back(c.id);
  std::sort(cl.members.begin(), cl.members.end());
  cl.cid.region = nodes_[carrier].region;
  cl.cid.trust_timestamp_ms = round_stamp_ms_;
  cl.cid.substation_ids = layout_.region(cl.cid.region).substation_ids;

  if (cl.members.size() > 1) {
    Message cm{MsgType::CLUSTER_ID, carrier, cl.cid.serialize(), {}, {}};
    crypto::put_u32_be(cm.payload, cl.head);
    crypto::put_u16_be(cm.payload, static_cast<std::uint16_t>(cl.members.size()));
    for (EntityId m : cl.members) crypto::put_u32_be(cm.payload, m);
    sign(cm, carrier);
    const std::set<EntityId> member_set(cl.members.begin(), cl.members.end());
    for (EntityId r : broadcast(carrier, cm, [&](const sim::PhysicalNode& n) { return member_set.count(n.id) > 0; })) {
      check(cm, r);
    }
    for (EntityId m : cl.members) {
      if (m != cl.head) ecdh(cl.head, m, {cl.head, m});
    }
  }
  cl.path = route_to_cc(cl.head, table, cl.target_server);
  selections_.push_back(SelectionEvent{now(), carrier, cl.head, cl.members, SelectionEvent::What::ClusterHead});
  selections_.push_back(SelectionEvent{now(), cl.head, cl.path.empty() ? sim::kNoEntity : cl.path.back(), cl.path,
                                       SelectionEvent::What::ChPath});
  cluster_of_carrier_[carrier] = clusters_.size();
  clusters_.push_back(std::move(cl));
}

std::vector<EntityId> Engine::route_to_cc(EntityId head, const TrustTable& table, int& server_idx) {
  server_idx = 0;
  const EntityId main = cc_gateways_[0];
  const auto hp = world_.node(head).position;
  if (nodes_[head].region == nodes_[main].region &&
      grid::distance(hp, world_.node(main).position) <= radio_.range(nodes_[head].kind)) {
    return {head, main};  // inside the main CC's region: deliver directly
  }
  // The head itself may be an unknown node the baseline let into a cluster.
  std::vector<EntityId> ids{cc_gateways_[0], cc_gateways_[1], head};
  for (const auto& n : nodes_) {
    if (n.kind != EntityKind::N || !n.known || !visible(n.id)) continue;
    if (n.id != head && view_blocked(table, n.id)) continue;
    ids.push_back(n.id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto index = [&](EntityId id) {
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  auto present = [&](EntityId id) { return std::binary_search(ids.begin(), ids.end(), id); };
  std::vector<double> bp(ids.size()), tv(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (nodes_[ids[i]].kind == EntityKind::Gateway) {
      bp[i] = world_.energy().battery_capacity_es;
      tv[i] = 100.0;
    } else {
      bp[i] = hooks_->advertise(ids[i], honest_advert(ids[i])).bp;
      tv[i] = view_tv(table, ids[i]);
    }
  }
  Graph g(ids.size());
  for (EntityId u : ids) {
    if (nodes_[u].kind == EntityKind::Gateway) continue;  // terminals only
    for (EntityId v : geo_[u]) {
      if (!present(v)) continue;
      const double d = grid::distance(world_.node(u).position, world_.node(v).position);
      const std::size_t j = index(v);
      g.add_edge(index(u), j, cfg_.defense ? route_weight(d, bp[j], tv[j]) : d);
    }
  }
  const auto paths = shortest_paths_from(g, index(head));
  for (int i = 0; i < 2; ++i) {
    if (const auto& p = paths[index(cc_gateways_[static_cast<std::size_t>(i)])]) {
      server_idx = i;
      std::vector<EntityId> out;
      for (std::size_t k : p->nodes) out.push_back(ids[k]);
      return out;
    }
  }
  ++stats_.alarms;
  world_.trace().record(TraceRecord{now(), TraceKind::Alarm, "CC_UNREACHABLE", head, sim::kNoEntity, DropReason::NoRoute, 0, 0, 0});
  return {};
}

std::optional<std::vector<Reading>> Engine::deliver(EntityId gateway, int server_idx, const Message& msg,
                                                    std::size_t reading_len) {
  const auto s = static_cast<std::size_t>(server_idx);
  if (!check(msg, gateway)) return std::nullopt;
  std::optional<Bytes> plain;
  for (const auto* keys : {&server_keys_[s], server_prev_keys_[s] ? &*server_prev_keys_[s] : nullptr}) {
    if (!keys || plain) continue;
    compute(servers_[s], crypto::hmac_blocks(msg.payload.size()), msg.payload.size() / 8, 1);
    try {
      plain = crypto::ecc_decrypt(curve_, keys->private_key, msg.payload);
    } catch (const crypto::CryptoError&) {
    }
  }
  if (!plain) return std::nullopt;
  std::vector<Reading> intact;
  try {
    for (auto& r : parse_aggregate(*plain)) {
      if (r.data.size() == reading_len && r.data == reading_bytes(seed_, r.source, r.seq, reading_len)) {
        intact.push_back(std::move(r));
      }
    }
  } catch (const crypto::CryptoError&) {
    return std::nullopt;
  }
  return intact;
}

void Engine::mu_tick() {
  ++mu_seq_;
  live_readings_.clear();
  if (!mu_pending_.empty()) {
    const auto pending = std::move(mu_pending_);
    mu_pending_.clear();
    solicit(pending, true);
  }
  const std::size_t len = cfg_.mu_reading_bytes;
  for (EntityId gw : gateways_) {
    if (gw == cc_gateways_[0]) continue;  // wired straight to the main server
    const auto readings = make_readings(gw, EntityKind::MU, mu_seq_, len);
    if (readings.empty()) continue;
    const auto n = static_cast<std::uint32_t>(readings.size());
    const auto bits = static_cast<std::uint32_t>(n * len * 8);
    world_.trace().record(TraceRecord{now(), TraceKind::Generate, "MU", gw, sim::kNoEntity, DropReason::None, 0, bits, n});
    stats_.readings_sent += n;
    stats_.mu_sent += n;
    auto lost = [&](EntityId at, DropReason why) { drop(at, sim::kNoEntity, why, n, bits, "MU"); };

    auto it = mu_choice_.find(gw);
    if (it == mu_choice_.end() || !nodes_[gw].secrets.count(it->second)) {
      lost(gw, DropReason::NoRoute);
      if (it == mu_choice_.end() && std::find(mu_pending_.begin(), mu_pending_.end(), gw) == mu_pending_.end())
        mu_pending_.push_back(gw);
      continue;
    }
    const EntityId carrier = it->second;
    const Cluster& cl = clusters_.at(cluster_of_carrier_.at(carrier));
    const Bytes x = nodes_[gw].secrets.at(carrier).x_k;

    Message emd{MsgType::EMD, gw, seal(gw, x, encode_aggregate(readings)), {}, {}};
    sign_pair(emd, gw, x);
    if (const auto r = hop(gw, carrier, emd); r != DropReason::None) {
      lost(gw, r);
      continue;
    }
    if (hooks_->swallow(carrier, MsgType::EMD, now())) {
      lost(carrier, DropReason::Adversarial);
      continue;
    }
    if (!check_pair(emd, carrier, x)) {
      ++stats_.integrity_failures;
      lost(carrier, DropReason::Integrity);
      continue;
    }
    auto agg = open(carrier, x, emd.payload);
    if (!agg) {
      ++stats_.integrity_failures;
      lost(carrier, DropReason::Integrity);
      continue;
    }

    const EntityId head = cl.head;
    if (head != carrier) {
      auto sec = nodes_[carrier].secrets.find(head);
      if (sec == nodes_[carrier].secrets.end()) {
        lost(carrier, DropReason::NoRoute);
        continue;
      }
      const Bytes xh = sec->second.x_k;
      Message data{MsgType::DATA, carrier, seal(carrier, xh, *agg), {}, {}};
      sign_pair(data, carrier, xh);
      hooks_->tamper(carrier, data);
      if (const auto r = hop(carrier, head, data); r != DropReason::None) {
        lost(carrier, r);
        continue;
      }
      if (hooks_->swallow(head, MsgType::DATA, now())) {
        lost(head, DropReason::Adversarial);
        continue;
      }
      const auto back = nodes_[head].secrets.find(carrier);
      if (back == nodes_[head].secrets.end() || !check_pair(data, head, back->second.x_k)) {
        ++stats_.integrity_failures;
        lost(head, DropReason::Integrity);
        continue;
      }
      agg = open(head, back->second.x_k, data.payload);
      if (!agg) {
        ++stats_.integrity_failures;
        lost(head, DropReason::Integrity);
        continue;
      }
    }

    if (cl.path.empty()) {
      lost(head, DropReason::NoRoute);
      continue;
    }
    const auto& pub = nodes_[head].server_pub[static_cast<std::size_t>(cl.target_server)];
    if (!pub) {
      lost(head, DropReason::NoRoute);
      continue;
    }
    Message out{MsgType::AGG_DATA, head, crypto::ecc_encrypt(curve_, *pub, *agg, rng_()), {}, {}};
    compute(head, crypto::hmac_blocks(out.payload.size()), out.payload.size() / 8, 2);
    sign(out, head);
    hooks_->tamper(head, out);
    if (const auto r = carry(cl.path, out); r != DropReason::None) {
      lost(head, r);
      continue;
    }
    const auto got = deliver(cl.path.back(), cl.target_server, out, len);
    if (!got) {
      ++stats_.integrity_failures;
      lost(cl.path.back(), DropReason::Integrity);
      continue;
    }
    const auto ok = static_cast<std::uint32_t>(got->size());
    if (ok < n) lost(cl.path.back(), DropReason::Integrity);
    if (ok > 0) {
      world_.trace().record(TraceRecord{now(), TraceKind::Deliver, "MU", cl.path.back(),
                                        servers_[static_cast<std::size_t>(cl.target_server)], DropReason::None, 0,
                                        static_cast<std::uint32_t>(ok * len * 8), ok});
    }
    stats_.readings_delivered += ok;
    stats_.mu_delivered += ok;
    stats_.delivered_bits += ok * len * 8;
  }
}

// ---------------------------------------------------------------- PMU plane

void Engine::probe_es(EntityId gateway) {
  if (nodes_.at(gateway).kind != EntityKind::Gateway) return;
  const auto sid = nodes_[gateway].substation;
  const bool hosts_pmu = std::any_of(layout_.entities.begin(), layout_.entities.end(), [&](const auto& e) {
    return e.kind == EntityKind::PMU && e.substation == sid;
  });
  if (!hosts_pmu) return;
  if (round_in_progress_) {
    if (std::find(deferred_probes_.begin(), deferred_probes_.end(), gateway) == deferred_probes_.end())
      deferred_probes_.push_back(gateway);
    return;
  }
  // Only relays with an ES path onward to the acting PDC are worth a probe.
  const EntityId pdc = acting_pdc_.at(nodes_[gateway].region);
  std::vector<EntityId> cands;
  for (EntityId e : geo_[gateway]) {
    if (nodes_[e].kind != EntityKind::ES || !nodes_[e].known || !visible(e) || !bilink(gateway, e)) continue;
    if (e != pdc && es_to_pdc_path(e, pdc, gateway_tables_.at(gateway)).empty()) continue;
    cands.push_back(e);
  }
  std::optional<EntityId> pick;
  if (cfg_.defense) {
    std::vector<std::pair<EntityId, double>> scored;
    for (EntityId e : cands) {
      const auto [d, s] = run_tests(-1, gateway, {gateway, e}, e, {});
      const double tv = compute_trust(d, s);
      if (is_trusted(tv)) scored.emplace_back(e, tv);
    }
    pick = argmax_score(scored);
  } else {
    double best = 0.0;
    for (EntityId e : cands) {
      const double d = grid::distance(world_.node(gateway).position, world_.node(e).position);
      if (!pick || d < best) pick = e, best = d;
    }
  }
  if (!pick) {
    es_choice_.erase(gateway);
    ++stats_.alarms;
    world_.trace().record(TraceRecord{now(), TraceKind::Alarm, "NO_ES", gateway, sim::kNoEntity, DropReason::NoRoute, 0, 0, 0});
    return;
  }
  auto cur = es_choice_.find(gateway);
  if (cur != es_choice_.end() && cur->second == *pick && nodes_[gateway].secrets.count(*pick)) return;
  es_choice_[gateway] = *pick;
  ecdh(gateway, *pick, {gateway, *pick});
  selections_.push_back(SelectionEvent{now(), gateway, *pick, {gateway, *pick}, SelectionEvent::What::PmuRelay});
}

const std::vector<EntityId>& Engine::es_to_pdc_path(EntityId es, EntityId pdc, const TrustTable& table) {
  auto it = es_paths_.find({es, pdc});
  if (it != es_paths_.end()) return it->second;
  std::vector<EntityId> out;
  const double d0 = grid::distance(world_.node(es).position, world_.node(pdc).position);
  if (d0 <= radio_.range(nodes_[es].kind)) {
    out = {es, pdc};
  } else {
    std::vector<EntityId> ids{es, pdc};
    for (const auto& n : nodes_) {
      if (n.kind != EntityKind::ES || !n.known || !visible(n.id) || view_blocked(table, n.id)) continue;
      ids.push_back(n.id);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    auto index = [&](EntityId id) {
      return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    Graph g(ids.size());
    for (EntityId u : ids) {
      if (u == pdc) continue;
      for (EntityId v : geo_[u]) {
        if (!std::binary_search(ids.begin(), ids.end(), v)) continue;
        const double d = grid::distance(world_.node(u).position, world_.node(v).position);
        g.add_edge(index(u), index(v), cfg_.defense ? route_weight(d, honest_advert(v).bp, view_tv(table, v)) : d);
      }
    }
    if (const auto p = shortest_path(g, index(es), index(pdc))) {
      for (std::size_t k : p->nodes) out.push_back(ids[k]);
    }
  }
  return es_paths_[{es, pdc}] = out;  // empty: unreachable until the next table change
}

void Engine::pmu_tick() {
  ++pmu_seq_;
  live_readings_.clear();
  const std::size_t len = cfg_.pmu_sample_bytes;
  for (const auto& region : layout_.regions) {
    const EntityId pdc = acting_pdc_.at(region.id);
    std::vector<Reading> collected;
    std::uint32_t generated = 0;
    for (SubstationId sid : region.substation_ids) {
      const EntityId gw = gateway_by_substation_.at(sid);
      const auto readings = make_readings(gw, EntityKind::PMU, pmu_seq_, len);
      if (readings.empty()) continue;
      const auto n = static_cast<std::uint32_t>(readings.size());
      const auto bits = static_cast<std::uint32_t>(n * len * 8);
      world_.trace().record(TraceRecord{now(), TraceKind::Generate, "PMU", gw, sim::kNoEntity, DropReason::None, 0, bits, n});
      stats_.readings_sent += n;
      stats_.pmu_sent += n;
      generated += n;
      auto lost = [&](EntityId at, DropReason why) { drop(at, sim::kNoEntity, why, n, bits, "PMU"); };

      auto it = es_choice_.find(gw);
      if (it == es_choice_.end() || !nodes_[gw].secrets.count(it->second)) {
        lost(gw, DropReason::NoRoute);
        continue;
      }
      const EntityId es = it->second;
      const Bytes x = nodes_[gw].secrets.at(es).x_k;
      Message emd{MsgType::EMD, gw, seal(gw, x, encode_aggregate(readings)), {}, {}};
      sign_pair(emd, gw, x);
      if (const auto r = hop(gw, es, emd); r != DropReason::None) {
        lost(gw, r);
        continue;
      }
      if (hooks_->swallow(es, MsgType::EMD, now())) {
        lost(es, DropReason::Adversarial);
        continue;
      }
      if (!check_pair(emd, es, x)) {
        ++stats_.integrity_failures;
        lost(es, DropReason::Integrity);
        continue;
      }
      const auto plain = open(es, x, emd.payload);
      if (!plain) {
        ++stats_.integrity_failures;
        lost(es, DropReason::Integrity);
        continue;
      }

      std::vector<Reading> batch;
      if (es == pdc) {
        batch = parse_aggregate(*plain);
      } else {
        const auto& path = es_to_pdc_path(es, pdc, gateway_tables_.at(gw));
        if (path.empty()) {
          lost(es, DropReason::NoRoute);
          continue;
        }
        if (!nodes_[es].secrets.count(pdc) && !ecdh(es, pdc, path)) {
          lost(es, DropReason::NoRoute);
          continue;
        }
        const Bytes xp = nodes_[es].secrets.at(pdc).x_k;
        Message data{MsgType::DATA, es, seal(es, xp, *plain), {}, {}};
        sign_pair(data, es, xp);
        hooks_->tamper(es, data);
        Message carried = data;
        if (const auto r = carry(path, carried); r != DropReason::None) {
          lost(es, r);
          continue;
        }
        if (hooks_->swallow(pdc, MsgType::DATA, now())) {
          lost(pdc, DropReason::Adversarial);
          continue;
        }
        const auto back = nodes_[pdc].secrets.find(es);
        if (back == nodes_[pdc].secrets.end() || !check_pair(carried, pdc, back->second.x_k)) {
          ++stats_.integrity_failures;
          lost(pdc, DropReason::Integrity);
          continue;
        }
        const auto at_pdc = open(pdc, back->second.x_k, carried.payload);
        if (!at_pdc) {
          ++stats_.integrity_failures;
          lost(pdc, DropReason::Integrity);
          continue;
        }
        try {
          batch = parse_aggregate(*at_pdc);
        } catch (const crypto::CryptoError&) {
          ++stats_.integrity_failures;
          lost(pdc, DropReason::Integrity);
          continue;
        }
      }
      for (auto& r : batch) collected.push_back(std::move(r));
    }
    if (collected.empty()) continue;

    // PDC aggregate to both CCs over the static overlay; a reading counts
    // once if either server recovers it intact.
    std::set<std::pair<EntityId, std::uint32_t>> recovered;
    EntityId last_cc = sim::kNoEntity;
    const Bytes agg = encode_aggregate(collected);
    for (int i = 0; i < 2; ++i) {
      const auto& path = overlay_path(region.id, i);
      const auto& pub = nodes_[pdc].server_pub[static_cast<std::size_t>(i)];
      if (path.empty() || !pub) continue;
      Message out{MsgType::AGG_DATA, pdc, crypto::ecc_encrypt(curve_, *pub, agg, rng_()), {}, {}};
      compute(pdc, crypto::hmac_blocks(out.payload.size()), out.payload.size() / 8, 2);
      sign(out, pdc);
      hooks_->tamper(pdc, out);
      if (carry(path, out) != DropReason::None) continue;
      if (const auto got = deliver(path.back(), i, out, len)) {
        for (const auto& r : *got) recovered.insert({r.source, r.seq});
        last_cc = path.back();
      } else {
        ++stats_.integrity_failures;
      }
    }
    const auto ok = static_cast<std::uint32_t>(recovered.size());
    if (ok < collected.size()) {
      drop(pdc, sim::kNoEntity, DropReason::NoRoute, static_cast<std::uint32_t>(collected.size()) - ok,
           static_cast<std::uint32_t>((collected.size() - ok) * len * 8), "PMU");
    }
    if (ok > 0) {
      world_.trace().record(TraceRecord{now(), TraceKind::Deliver, "PMU", last_cc, sim::kNoEntity, DropReason::None, 0,
                                        static_cast<std::uint32_t>(ok * len * 8), ok});
    }
    stats_.readings_delivered += ok;
    stats_.pmu_delivered += ok;
    stats_.delivered_bits += ok * len * 8;
    (void)generated;
  }
}

}  // namespace sermt::protocol
