#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "sermt/grid/deployment.hpp"
#include "sermt/sim/event_queue.hpp"
#include "sermt/sim/radio.hpp"

using namespace sermt;
using namespace sermt::sim;

namespace {

grid::NetworkLayout layout_of(std::vector<std::pair<grid::EntityKind, grid::Vec2>> specs) {
  grid::NetworkLayout layout;
  grid::EntityId id = 0;
  for (auto [kind, pos] : specs) layout.entities.push_back(grid::EntitySeed{kind, id++, pos, 0, {}, {}});
  return layout;
}

}  // namespace

TEST_CASE("event queue ordering and boundaries") {
  EventQueue q;
  std::vector<int> fired;
  q.schedule(1.0, [&] { fired.push_back(1); });
  q.schedule(1.0, [&] { fired.push_back(2); });
  q.schedule(0.5, [&] { fired.push_back(0); });
  q.schedule(2.0, [&] { fired.push_back(3); });
  CHECK(q.run_until(0.0) == 0);
  CHECK(fired.empty());
  CHECK(q.run_until(1.0) == 3);
  CHECK(fired == std::vector<int>{0, 1, 2});
  CHECK(q.now() == 1.0);
  CHECK_THROWS_AS(q.schedule(0.9, [] {}), LogicFault);
  q.schedule(1.0, [&] { q.schedule_in(0.5, [&] { fired.push_back(4); }); });
  q.run_until(5.0);
  CHECK(fired == std::vector<int>{0, 1, 2, 4, 3});
  CHECK(q.pending() == 0);
}

TEST_CASE("energy formulas") {
  EnergyModel m;
  CHECK(energy_tx(m, 0, 100.0) == 0.0);
  CHECK(energy_rx(m, 0) == 0.0);
  // hand-evaluated: 800 * (100e-12 * 50^2 + 100e-9)
  CHECK(energy_tx(m, 800, 50.0) == doctest::Approx(2.8e-4).epsilon(1e-12));
  CHECK(energy_rx(m, 800) == doctest::Approx(1.2e-4).epsilon(1e-12));
  CHECK(energy_rx(m, 800) == energy_rx(m, 800));

  EnergyModel amp_only;
  amp_only.e_baseband = amp_only.e_frontend = 0.0;
  CHECK(energy_tx(amp_only, 100, 80.0) == doctest::Approx(4 * energy_tx(amp_only, 100, 40.0)));

  double prev = -1.0;
  for (int bits = 0; bits <= 2048; bits += 64)
    for (double d = 0.0; d <= 300.0; d += 25.0) {
      CHECK(energy_tx(m, bits, d) >= energy_tx(m, bits, std::max(0.0, d - 25.0)));
      (void)prev;
    }
  CHECK(mah_to_pj(1.0, 3.0) == 10'800'000'000'000);
  CHECK(pj_to_mah(mah_to_pj(150.0, 3.0), 3.0) == doctest::Approx(150.0));
}

TEST_CASE("battery rules") {
  Trace trace;
  EnergyModel m;
  World world(layout_of({{grid::EntityKind::N, {0, 0}},
                         {grid::EntityKind::ES, {10, 0}},
                         {grid::EntityKind::PDC, {20, 0}},
                         {grid::EntityKind::Gateway, {30, 0}}}),
              m, trace);
  const Picojoules start = mah_to_pj(150.0, m.volts);
  for (const auto& n : world.nodes()) {
    if (n.kind == grid::EntityKind::Gateway) {
      CHECK(n.battery.mains_powered);
    } else {
      CHECK(n.battery.remaining == start);
    }
  }

  // N debited to exactly zero dies permanently.
  world.debit(0, pj_to_joules(start), 0.0, TraceKind::Compute, "drain");
  CHECK(world.node(0).battery.remaining == 0);
  CHECK(world.node(0).dead);
  world.recharge_tick(0, 1e6, 1.0);
  CHECK(world.node(0).dead);
  CHECK_FALSE(world.operational(0));

  // ES recharge clamps to capacity; overdraw clamps to zero.
  world.recharge_tick(1, 1e9, 2.0);
  CHECK(world.node(1).battery.remaining == mah_to_pj(2000.0, m.volts));
  world.recharge_tick(1, 10.0, 3.0);
  CHECK(world.node(1).battery.remaining == mah_to_pj(2000.0, m.volts));
  world.debit(1, 1e9, 4.0, TraceKind::Compute, "drain");
  CHECK(world.node(1).battery.remaining == 0);
  CHECK_FALSE(world.node(1).dead);
  CHECK_FALSE(world.operational(1));
  world.recharge_tick(1, 1.0, 5.0);
  CHECK(world.operational(1));

  for (const auto& n : world.nodes()) CHECK(n.battery.conserved());
}

TEST_CASE("transmit outcomes") {
  Trace trace;
  EnergyModel m;
  const auto layout = layout_of({{grid::EntityKind::N, {0, 0}},
                                 {grid::EntityKind::N, {250, 0}},
                                 {grid::EntityKind::N, {251, 0}},
                                 {grid::EntityKind::N, {100, 0}}});
  World world(layout, m, trace);
  Radio radio(RadioConfig{}, 1);

  auto before = world.node(0).battery.remaining;
  auto r = radio.transmit(world, 0, 2, 800, "T", 0.0);
  CHECK_FALSE(r.delivered);
  CHECK(r.reason == DropReason::Range);
  CHECK(before - world.node(0).battery.remaining == joules_to_pj(energy_tx(m, 800, 250.0)));

  before = world.node(1).battery.remaining;
  r = radio.transmit(world, 0, 1, 800, "T", 0.0);  // exactly at range
  CHECK(r.delivered);
  CHECK(before - world.node(1).battery.remaining == joules_to_pj(energy_rx(m, 800)));

  RadioConfig lossy;
  lossy.loss_probability = 1.0;
  Radio always_lost(lossy, 1);
  before = world.node(3).battery.remaining;
  for (int i = 0; i < 20; ++i) CHECK(always_lost.transmit(world, 0, 3, 64, "T", 1.0).reason == DropReason::Loss);
  CHECK(world.node(3).battery.remaining == before);

  world.debit(3, 1e9, 2.0, TraceKind::Compute, "drain");
  CHECK(radio.transmit(world, 0, 3, 64, "T", 2.0).reason == DropReason::DeadReceiver);
  before = world.node(0).battery.remaining;
  CHECK(radio.transmit(world, 3, 0, 64, "T", 2.0).reason == DropReason::DeadSender);
  CHECK(world.node(0).battery.remaining == before);

  const auto phantom = world.add_phantom(grid::EntityKind::N, {5, 5}, 0);
  CHECK(radio.transmit(world, 0, phantom, 64, "T", 3.0).reason == DropReason::Adversarial);

  // dead node never appears as sender or receiver after its death record
  double death_time = -1;
  for (const auto& rec : trace.records()) {
    if (rec.kind == TraceKind::Death && rec.from == 3) death_time = rec.time;
    if (death_time >= 0 && rec.time > death_time) {
      CHECK_FALSE((rec.kind == TraceKind::Send && rec.from == 3));
      CHECK_FALSE((rec.kind == TraceKind::Receive && rec.from == 3));
    }
  }
  for (const auto& n : world.nodes()) CHECK(n.battery.conserved());
}

TEST_CASE("neighbors closed ball and symmetry") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  std::vector<std::pair<grid::EntityKind, grid::Vec2>> specs;
  specs.push_back({grid::EntityKind::N, {0, 0}});
  specs.push_back({grid::EntityKind::N, {150, 200}});  // exactly 250 m away
  specs.push_back({grid::EntityKind::N, {5000, 5000}});  // isolated
  for (int i = 0; i < 120; ++i) specs.push_back({grid::EntityKind::N, {u(rng), u(rng)}});
  Trace trace;
  World world(layout_of(specs), EnergyModel{}, trace);
  Radio radio(RadioConfig{}, 3);

  auto n0 = radio.neighbors(world, 0);
  CHECK(std::find(n0.begin(), n0.end(), 1u) != n0.end());
  CHECK(radio.neighbors(world, 2).empty());

  for (const auto& a : world.nodes()) {
    const auto na = radio.neighbors(world, a.id);
    for (const auto& b : world.nodes()) {
      if (a.id == b.id) continue;
      const double dx = a.position.x - b.position.x, dy = a.position.y - b.position.y;
      const bool oracle = std::sqrt(dx * dx + dy * dy) <= 250.0;
      const bool listed = std::find(na.begin(), na.end(), b.id) != na.end();
      CHECK(listed == oracle);
    }
  }
}

TEST_CASE("broadcast debits sender once") {
  Trace trace;
  EnergyModel m;
  World world(layout_of({{grid::EntityKind::Gateway, {0, 0}},
                         {grid::EntityKind::N, {100, 0}},
                         {grid::EntityKind::N, {0, 200}},
                         {grid::EntityKind::N, {400, 0}}}),
              m, trace);
  Radio radio(RadioConfig{}, 9);
  const auto got = radio.broadcast(world, 0, 512, "B", 0.0, nullptr);
  CHECK(got.size() == 2);
  CHECK(world.node(0).battery.debited == joules_to_pj(energy_tx(m, 512, 300.0)));
  CHECK(world.node(3).battery.debited == 0);
  CHECK(world.node(1).battery.debited == joules_to_pj(energy_rx(m, 512)));
}

TEST_CASE("trace determinism and export") {
  auto run = [](std::uint64_t seed) {
    Trace trace;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 600.0);
    std::vector<std::pair<grid::EntityKind, grid::Vec2>> specs;
    for (int i = 0; i < 40; ++i) specs.push_back({grid::EntityKind::N, {u(rng), u(rng)}});
    World world(layout_of(specs), EnergyModel{}, trace);
    RadioConfig cfg;
    cfg.loss_probability = 0.3;
    Radio radio(cfg, seed);
    EventQueue q;
    for (int k = 0; k < 200; ++k) {
      const auto a = static_cast<EntityId>(k % 40), b = static_cast<EntityId>((k * 7 + 3) % 40);
      q.schedule(k * 0.1, [&, a, b] { radio.transmit(world, a, b, 1024, "DATA", q.now()); });
    }
    q.run_until(100.0);
    std::ostringstream out;
    trace.write(out);
    return std::make_pair(trace.hash(), out.str());
  };
  const auto a = run(42), b = run(42), c = run(43);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(a.first != c.first);
  CHECK(a.second.find(" | SEND | ") != std::string::npos);
}
