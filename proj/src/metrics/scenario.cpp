#include "sermt/metrics/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <future>
#include <thread>

#include "sermt/grid/topology.hpp"

namespace sermt::metrics {

namespace {

// Everything the metrics need, accumulated from the trace as it streams.
struct TraceLedger {
  std::vector<sim::Picojoules> debited, recharged;
  std::uint64_t generated = 0, delivered = 0, delivered_bits = 0;

  void operator()(const sim::TraceRecord& r) {
    using sim::TraceKind;
    auto slot = [](std::vector<sim::Picojoules>& v, grid::EntityId id) -> sim::Picojoules& {
      if (v.size() <= id) v.resize(id + 1, 0);
      return v[id];
    };
    switch (r.kind) {
      case TraceKind::Send:
      case TraceKind::Receive:
      case TraceKind::Compute:
        slot(debited, r.from) += r.pj;
        break;
      case TraceKind::Recharge:
        slot(recharged, r.from) += r.pj;
        break;
      case TraceKind::Generate:
        generated += r.count;
        break;
      case TraceKind::Deliver:
        delivered += r.count;
        delivered_bits += r.bits;
        break;
      default:
        break;
    }
  }
  sim::Picojoules debit_of(grid::EntityId id) const { return id < debited.size() ? debited[id] : 0; }
  sim::Picojoules recharge_of(grid::EntityId id) const { return id < recharged.size() ? recharged[id] : 0; }
};

grid::NetworkLayout build_layout(const ScenarioConfig& c) {
  auto topo = grid::load_topology_file(c.topology);
  const auto radius = c.radius ? c.radius : topo.radius_threshold;
  if (!radius) throw ConfigError(fmt::format("{}: no radius in config or topology file", c.topology.string()));
  // Deployment depends on the seed only, never on the defense toggle.
  return grid::deploy_sensors(std::move(topo), *radius, {c.n_nodes, c.es_nodes},
                              protocol::derive_seed(*c.seed, 0xde91), c.box_margin);
}

Metrics run(const ScenarioConfig& c, const RunOptions& options) {
  const grid::NetworkLayout layout = build_layout(c);
  sim::Trace trace(options.trace_out != nullptr);
  TraceLedger ledger;
  trace.set_sink(std::ref(ledger));
  sim::World world(layout, c.energy, trace);
  sim::Radio radio(c.radio, protocol::derive_seed(*c.seed, 0x4ad1));
  sim::EventQueue queue;
  protocol::Engine engine(layout, c.protocol, world, radio, queue, *c.seed);
  adversary::Adversary adversary(engine, queue, radio, c.attacks, *c.seed);
  adversary.install(c.duration);
  engine.start(c.duration);
  queue.run_until(c.duration);

  Metrics m;
  m.packets_sent = ledger.generated;
  m.packets_delivered = ledger.delivered;
  m.drop_pct = m.packets_sent ? 100.0 * static_cast<double>(m.packets_sent - m.packets_delivered) /
                                    static_cast<double>(m.packets_sent)
                              : 0.0;
  m.throughput = static_cast<double>(ledger.delivered_bits) / c.duration;

  bool ok = ledger.generated == engine.stats().readings_sent && ledger.delivered == engine.stats().readings_delivered &&
            ledger.delivered_bits == engine.stats().delivered_bits && ledger.delivered <= ledger.generated;
  double consumed_mah = 0.0;
  std::size_t population = 0;
  for (const auto& n : world.nodes()) {
    const auto& b = n.battery;
    ok = ok && ledger.debit_of(n.id) == b.debited && ledger.recharge_of(n.id) == b.recharged;
    if (!b.mains_powered) ok = ok && b.initial - b.remaining == b.debited - b.recharged && b.remaining >= 0;
    if (n.id >= layout.entities.size()) continue;  // attacker-deployed
    m.ledger.push_back(NodeEnergy{n.id, n.kind, b.debited, b.recharged, b.mains_powered ? 0 : b.remaining, n.dead});
    if (n.kind == grid::EntityKind::N || n.kind == grid::EntityKind::ES) {
      consumed_mah += sim::pj_to_mah(b.debited, c.energy.volts);
      ++population;
    }
  }
  m.avg_bp = population ? consumed_mah / static_cast<double>(population) / (c.duration / 3600.0) : 0.0;
  m.conservation_ok = ok;
  m.trace_hash = trace.hash();
  m.trace_records = trace.size();
  m.protocol = engine.stats();
  m.attacks = adversary.log();
  m.installs = adversary.overrides();

  if (options.trace_out) {
    trace.write(*options.trace_out);
    adversary.write(*options.trace_out);
  }
  return m;
}

}  // namespace

Metrics run_scenario(const ScenarioConfig& c, const RunOptions& options) {
  const std::string where = fmt::format("scenario '{}' (seed {})", c.name, c.seed ? std::to_string(*c.seed) : "unset");
  try {
    validate(c);
    return run(c, options);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  } catch (const adversary::AttackError& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  } catch (const grid::GridError& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  } catch (const std::exception& e) {
    throw RuntimeFault(fmt::format("{}: {}", where, e.what()));
  }
}

std::vector<SweepRow> sweep(const ScenarioConfig& base, Vary vary, unsigned threads) {
  validate(base);
  std::vector<std::pair<double, bool>> points;
  if (vary == Vary::Malicious) {
    for (int m : base.sweep.malicious) points.insert(points.end(), {{m, true}, {m, false}});
  } else {
    for (double i : base.sweep.interval) points.insert(points.end(), {{i, true}, {i, false}});
  }
  auto config_for = [&](double value, bool defense) {
    ScenarioConfig c = base;
    c.protocol.defense = defense;
    for (auto& a : c.attacks) {
      if (vary == Vary::Malicious && !a.foreign) {
        a.targets.clear();
        a.count = static_cast<int>(value);
      } else if (vary == Vary::Interval) {
        a.interval = value;
      }
    }
    c.name = fmt::format("{}[{}={}{}]", base.name, vary == Vary::Malicious ? "malicious" : "interval", value,
                         defense ? "" : ",baseline");
    return c;
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<SweepRow> rows(points.size());
  std::vector<std::future<void>> pending;
  std::size_t next = 0;
  auto worker = [&](std::size_t i) {
    rows[i] = SweepRow{points[i].first, points[i].second, run_scenario(config_for(points[i].first, points[i].second))};
  };
  // At most `threads` runs in flight; rows land by index, whatever the finishing order.
  while (next < points.size() || !pending.empty()) {
    while (next < points.size() && pending.size() < threads) pending.push_back(std::async(std::launch::async, worker, next++));
    pending.front().get();
    pending.erase(pending.begin());
  }
  return rows;
}

}  // namespace sermt::metrics
