#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "sermt/adversary/adversary.hpp"
#include "sermt/grid/topology.hpp"

using namespace sermt;
using namespace sermt::adversary;
using protocol::Engine;
using protocol::ProtocolConfig;

namespace {

const grid::NetworkLayout& layout14() {
  static const grid::NetworkLayout layout = [] {
    auto topo = grid::load_topology_file(std::string(SERMT_DATA_DIR) + "/ieee14.grid");
    const double r = *topo.radius_threshold;
    return grid::deploy_sensors(std::move(topo), r, {60, 30}, 7, 100.0);
  }();
  return layout;
}

struct Rig {
  sim::Trace trace{true};
  sim::World world;
  sim::Radio radio;
  sim::EventQueue queue;
  Engine engine;
  Adversary adversary;

  explicit Rig(std::vector<AttackSpec> specs, ProtocolConfig cfg = {}, std::uint64_t seed = 1)
      : world(layout14(), sim::EnergyModel{}, trace),
        radio(sim::RadioConfig{}, seed),
        engine(layout14(), cfg, world, radio, queue, seed),
        adversary(engine, queue, radio, std::move(specs), seed) {}

  void run(double duration) {
    adversary.install(duration);
    engine.start(duration);
    queue.run_until(duration);
  }
};

std::vector<EntityId> of_kind(EntityKind kind) {
  std::vector<EntityId> out;
  for (const auto& e : layout14().entities)
    if (e.kind == kind) out.push_back(e.id);
  return out;
}

AttackSpec spec(AttackKind kind, std::vector<EntityId> targets = {}, int count = 0) {
  AttackSpec s;
  s.kind = kind;
  s.targets = std::move(targets);
  s.count = count;
  return s;
}

}  // namespace

TEST_CASE("attack kinds parse") {
  CHECK(parse_attack_kind("false_data") == AttackKind::FalseData);
  CHECK(parse_attack_kind("SINKHOLE") == AttackKind::Sinkhole);
  CHECK_FALSE(parse_attack_kind("jamming"));
  CHECK(to_string(AttackKind::Wormhole) == "WORMHOLE");
}

TEST_CASE("empty spec list leaves the run untouched") {
  Rig clean({});
  clean.run(300);
  sim::Trace t2{true};
  sim::World w(layout14(), sim::EnergyModel{}, t2);
  sim::Radio r(sim::RadioConfig{}, 1);
  sim::EventQueue q;
  Engine e(layout14(), {}, w, r, q, 1);
  e.start(300);
  q.run_until(300);
  CHECK(clean.trace.hash() == t2.hash());
  CHECK(clean.adversary.installed() == 0);
}

TEST_CASE("gateways, servers and substation sensors are rejected") {
  for (EntityKind k : {EntityKind::Gateway, EntityKind::Server, EntityKind::MU, EntityKind::PMU}) {
    Rig rig({spec(AttackKind::Drop, {of_kind(k).front()})});
    CHECK_THROWS_AS(rig.adversary.install(10), AttackError);
    CHECK(rig.adversary.installed() == 0);
  }
  auto bad = spec(AttackKind::Drop, {}, 3);
  bad.population = {EntityKind::Gateway};
  CHECK_THROWS_AS(validate(bad, layout14()), AttackError);
  CHECK_THROWS_AS(validate(spec(AttackKind::Wormhole, {}, 3), layout14()), AttackError);
  Rig too_many({spec(AttackKind::Drop, {}, 61)});
  CHECK_THROWS_AS(too_many.adversary.install(10), AttackError);
}

TEST_CASE("35 random DROP nodes install exactly 35 overrides") {
  Rig rig({spec(AttackKind::Drop, {}, 35)});
  rig.adversary.install(10);
  CHECK(rig.adversary.installed() == 35);
  const auto nodes = rig.adversary.attackers(AttackKind::Drop);
  CHECK(nodes.size() == 35);
  for (EntityId id : nodes) CHECK(rig.engine.node(id).kind == EntityKind::N);
}

TEST_CASE("flooding drains victims, never changes trust state") {
  const auto n_nodes = of_kind(EntityKind::N);
  // the N node with the most in-range N neighbours
  EntityId attacker = n_nodes.front();
  std::size_t most = 0;
  {
    Rig probe({});
    for (EntityId id : n_nodes) {
      const auto nb = probe.engine.neighbors(id);
      const auto c = static_cast<std::size_t>(std::count_if(nb.begin(), nb.end(), [&](EntityId j) {
        return probe.engine.node(j).kind == EntityKind::N;
      }));
      if (c > most) most = c, attacker = id;
    }
  }
  REQUIRE(most >= 5);

  auto flood = spec(AttackKind::Flood, {attacker});
  flood.start_time = 1.0;
  flood.interval = 100.0;
  auto drive = [](Rig& rig) {
    rig.adversary.install(1.0);
    rig.queue.schedule(0.0, [&] { rig.engine.run_trust_round(0); });
    rig.queue.run_until(1.0);
  };
  Rig clean({});
  Rig hit({flood});
  drive(clean);
  drive(hit);

  CHECK(hit.adversary.log().bogus_frames_sent == 10);
  CHECK(hit.engine.stats().forged_accepted == 0);
  CHECK(hit.engine.server_table(0) == clean.engine.server_table(0));
  CHECK(hit.engine.server_table(1) == clean.engine.server_table(1));

  const auto& m = hit.world.energy();
  const std::size_t frame_bits = 8 * (protocol::kHeaderBytes + 24 + 20);  // RQM: 24-byte body, 20-byte key
  const auto floor = sim::joules_to_pj(10 * sim::energy_rx(m, frame_bits));
  int victims = 0;
  for (EntityId v : hit.engine.neighbors(attacker)) {
    if (hit.engine.node(v).kind != EntityKind::N) continue;
    ++victims;
    const auto extra = hit.world.node(v).battery.debited - clean.world.node(v).battery.debited;
    CHECK(extra >= floor);
  }
  CHECK(victims >= 5);
  // the flooder pays for its own transmissions
  CHECK(hit.world.node(attacker).battery.debited > clean.world.node(attacker).battery.debited);
}

TEST_CASE("sybil personas enter candidate sets and are demoted by the next round") {
  const EntityId node = of_kind(EntityKind::N)[10];
  Rig rig({[&] {
    auto s = spec(AttackKind::Sybil, {node});
    s.personas = 3;
    return s;
  }()});
  rig.run(205);
  const auto& ph = rig.adversary.phantoms(node);
  REQUIRE(ph.size() == 3);
  for (EntityId p : ph) {
    CHECK(rig.engine.node(p).phantom);
    CHECK(rig.engine.node(p).owner == node);
    // no frame ever reaches a phantom: delivered/sent = 0
    CHECK(rig.engine.server_table(1).tv(p) == 0.0);
    CHECK(rig.engine.server_table(1).blocked(p));
  }
  CHECK(rig.adversary.log().fake_locations_advertised > 0);
  // the real node still answers honestly
  CHECK_FALSE(rig.engine.server_table(1).blocked(node));
}

TEST_CASE("sybil with zero personas behaves honestly") {
  auto s = spec(AttackKind::Sybil, {of_kind(EntityKind::N)[10]});
  s.personas = 0;
  Rig a({s});
  a.run(250);
  Rig b({});
  b.run(250);
  CHECK(a.trace.hash() == b.trace.hash());
}

TEST_CASE("sinkhole wins selection, then lands on the threat list; forged anchors rejected") {
  // an N node whose closest non-main gateway is within radio reach both ways
  Rig probe({});
  const EntityId main_gw = probe.engine.cc_gateway(0);
  EntityId sink = 0, gw = 0;
  for (EntityId id : of_kind(EntityKind::N)) {
    EntityId best = 0;
    double best_d = 1e300;
    for (EntityId g : of_kind(EntityKind::Gateway)) {
      if (g == main_gw) continue;
      const double d = grid::distance(probe.world.node(id).position, probe.world.node(g).position);
      if (d < best_d) best_d = d, best = g;
    }
    if (best_d <= 200.0) {
      sink = id, gw = best;
      break;
    }
  }
  REQUIRE(gw != 0);
  auto s = spec(AttackKind::Sinkhole, {sink});
  s.start_time = 1.0;  // after the t = 0 round, before selection
  s.interval = 50.0;
  Rig rig({s});
  rig.adversary.install(400);
  rig.engine.start(400);
  rig.queue.run_until(5.0);
  CHECK(rig.engine.mu_forwarder(gw) == sink);
  CHECK(rig.adversary.log().inflated_adverts > 0);
  rig.queue.run_until(205.0);
  CHECK(rig.engine.server_table(1).blocked(sink));
  CHECK(rig.engine.server_table(1).tv(sink) == 0.0);
  CHECK(rig.engine.mu_forwarder(gw) != sink);
  CHECK(rig.adversary.log().bogus_frames_sent > 0);
  CHECK(rig.engine.stats().forged_rejected > 0);
  CHECK(rig.engine.stats().forged_accepted == 0);
}

TEST_CASE("foreign eavesdroppers decrypt nothing") {
  auto s = spec(AttackKind::Eavesdrop, {}, 6);
  s.foreign = true;
  Rig rig({s});
  rig.run(600);
  CHECK(rig.adversary.log().frames_overheard >= 1000);
  CHECK(rig.adversary.log().payloads_decrypted == 0);
  // never selected, never clustered
  for (const auto& o : rig.adversary.overrides()) {
    CHECK_FALSE(rig.engine.node(o.node).has_gbk);
    for (const auto& ev : rig.engine.selections()) {
      CHECK(ev.chosen != o.node);
    }
    for (const auto& c : rig.engine.clusters()) {
      CHECK(std::find(c.members.begin(), c.members.end(), o.node) == c.members.end());
    }
  }
}

namespace {

/// Independent key-coverage oracle: a compromised spy can read an EMD/DATA
/// frame only when it is the frame's intended receiver.
struct CoverageOracle : Adversary {
  using Adversary::Adversary;
  std::uint64_t expected = 0;
  const sim::World* world = nullptr;
  const sim::Radio* radio = nullptr;
  std::set<EntityId> spies;
  void on_air(EntityId from, EntityId to, const Message& msg, double now) override {
    if ((msg.type == MsgType::EMD || msg.type == MsgType::DATA) && spies.count(to) && to != from &&
        world->operational(to) &&
        grid::distance(world->node(to).position, world->node(from).position) <= radio->range(world->node(from).kind)) {
      ++expected;
    }
    Adversary::on_air(from, to, msg, now);
  }
};

}  // namespace

TEST_CASE("compromised eavesdroppers read only frames under their own keys") {
  const auto n_nodes = of_kind(EntityKind::N);
  auto s = spec(AttackKind::Eavesdrop, n_nodes);
  sim::Trace trace{false};
  sim::World world(layout14(), sim::EnergyModel{}, trace);
  sim::Radio radio(sim::RadioConfig{}, 1);
  sim::EventQueue queue;
  Engine engine(layout14(), {}, world, radio, queue, 1);
  CoverageOracle spy(engine, queue, radio, {s}, 1);
  spy.world = &world;
  spy.radio = &radio;
  spy.spies = {n_nodes.begin(), n_nodes.end()};
  spy.install(300);
  engine.start(300);
  queue.run_until(300);
  CHECK(spy.log().frames_overheard > 0);
  CHECK(spy.expected > 0);
  CHECK(spy.log().payloads_decrypted == spy.expected);
}

TEST_CASE("wormhole replays joins into distant regions; data then drops on range") {
  // the farthest-apart pair of N nodes in different regions
  const auto n_nodes = of_kind(EntityKind::N);
  EntityId a = 0, b = 0;
  double far = 0;
  for (EntityId i : n_nodes)
    for (EntityId j : n_nodes) {
      const double d = grid::distance(layout14().entities[i].position, layout14().entities[j].position);
      if (layout14().entities[i].region != layout14().entities[j].region && d > far) far = d, a = i, b = j;
    }
  auto count_range = [](const sim::Trace& t) {
    return std::count_if(t.records().begin(), t.records().end(), [](const sim::TraceRecord& r) {
      return r.kind == sim::TraceKind::Drop && r.reason == sim::DropReason::Range;
    });
  };
  ProtocolConfig baseline;
  baseline.defense = false;
  Rig clean({}, baseline);
  clean.run(200);
  Rig hole({spec(AttackKind::Wormhole, {a, b})}, baseline);
  hole.run(200);
  CHECK(hole.adversary.log().frames_tunnelled > 0);
  CHECK(count_range(hole.trace) > count_range(clean.trace));
}

TEST_CASE("false data: caught by NH-MAC under SERMT, corrupts readings in the baseline") {
  auto s = spec(AttackKind::FalseData, {}, 20);
  Rig sermt({s});
  sermt.run(300);
  CHECK(sermt.adversary.log().frames_tampered > 0);
  CHECK(sermt.engine.stats().integrity_failures > 0);

  ProtocolConfig cfg;
  cfg.defense = false;
  Rig base({s}, cfg);
  base.run(300);
  CHECK(base.adversary.log().frames_tampered > 0);
  CHECK(base.engine.stats().readings_delivered < base.engine.stats().readings_sent);
}

TEST_CASE("outcome rows") {
  Rig rig({spec(AttackKind::Drop, {}, 2)});
  rig.adversary.install(1);
  std::ostringstream out;
  rig.adversary.write(out);
  CHECK(out.str().find("ATTACK install DROP") != std::string::npos);
  CHECK(out.str().find("ATTACK payloads_decrypted 0") != std::string::npos);
}
