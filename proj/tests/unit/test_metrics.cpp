#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sermt/grid/topology.hpp"
#include "sermt/metrics/emit.hpp"
#include "sermt/metrics/report.hpp"

using namespace sermt;
using namespace sermt::metrics;

namespace {

const std::filesystem::path kConfigs = SERMT_CONFIG_DIR;
const std::filesystem::path kData = SERMT_DATA_DIR;

ScenarioConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, kData);
}

// Short clean run; enough for two trust rounds and every data path.
ScenarioConfig quick(double duration = 120.0) {
  auto c = parse("[scenario]\ntopology = ieee14.grid\nseed = 9\n");
  c.duration = duration;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse(R"(
# comment
[scenario]
name = t1
topology = ieee14.grid
seed = 42          ; trailing comment
duration = 300
defense = baseline

[radio]
loss_probability = 0.1

[attack]
kind = drop
count = 5

[attack]
kind = EAVESDROP
foreign = yes
count = 2

[sweep]
malicious = 1, 2 3
)");
  CHECK(c.name == "t1");
  CHECK(c.topology == kData / "ieee14.grid");
  CHECK(*c.seed == 42);
  CHECK(c.duration == 300.0);
  CHECK_FALSE(c.protocol.defense);
  CHECK(c.radio.loss_probability == 0.1);
  REQUIRE(c.attacks.size() == 2);
  CHECK(c.attacks[0].kind == adversary::AttackKind::Drop);
  CHECK(c.attacks[0].count == 5);
  CHECK(c.attacks[1].kind == adversary::AttackKind::Eavesdrop);
  CHECK(c.attacks[1].foreign);
  CHECK(c.sweep.malicious == std::vector<int>{1, 2, 3});
  CHECK(c.sweep.interval.size() == 10);  // default kept
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse("[scenario]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[nowhere]\n"), ConfigError);
  CHECK_THROWS_AS(parse("seed = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[scenario]\nseed = minus one\n"), ConfigError);
  CHECK_THROWS_AS(parse("[attack]\ncount = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse("[attack]\nkind = teleport\n"), ConfigError);
  CHECK_THROWS_AS(parse("[scenario\n"), ConfigError);
  CHECK_THROWS_AS(validate(parse("[scenario]\ntopology = ieee14.grid\n")), ConfigError);  // no seed
  CHECK_THROWS_AS(validate(parse("[scenario]\ntopology = missing.grid\nseed = 1\n")), ConfigError);
  CHECK_THROWS_AS(validate(parse("[scenario]\ntopology = ieee14.grid\nseed = 1\nduration = 0\n")), ConfigError);
  CHECK_THROWS_AS(validate(parse("[scenario]\ntopology = ieee14.grid\nseed = 1\n[protocol]\ntest_messages = 0\n")),
                  ConfigError);
  CHECK_THROWS_AS(load_config(kConfigs / "does-not-exist.ini"), ConfigError);

  // Attack errors surface as config errors once the scenario runs.
  auto c = quick(10.0);
  adversary::AttackSpec a;
  a.kind = adversary::AttackKind::Drop;
  a.targets = {0};  // an MU
  c.attacks = {a};
  CHECK_THROWS_AS(run_scenario(c), ConfigError);
}

TEST_CASE("SERMT_SEED overrides the file") {
  ::setenv("SERMT_SEED", "777", 1);
  const auto c = load_config(kConfigs / "ieee14.ini");
  ::unsetenv("SERMT_SEED");
  CHECK(*c.seed == 777);
  CHECK(*load_config(kConfigs / "ieee14.ini").seed == 1405);
  ::setenv("SERMT_SEED", "abc", 1);
  CHECK_THROWS_AS(load_config(kConfigs / "ieee14.ini"), ConfigError);
  ::unsetenv("SERMT_SEED");
}

TEST_CASE("shipped configs load") {
  for (const char* name : {"ieee14.ini", "ieee14_sinkhole.ini", "ieee14_flood.ini", "ieee118.ini"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(kConfigs / name));
  }
}

TEST_CASE("clean run: nothing dropped, ledger balances, deterministic") {
  const auto c = quick();
  const auto a = run_scenario(c);
  CHECK(a.packets_sent > 0);
  CHECK(a.packets_delivered == a.packets_sent);
  CHECK(a.drop_pct == 0.0);
  CHECK(a.throughput > 0.0);
  CHECK(a.avg_bp > 0.0);
  CHECK(a.conservation_ok);
  CHECK(a.protocol.plaintext_exposures == 0);
  const auto b = run_scenario(c);
  CHECK(a.trace_hash == b.trace_hash);
  CHECK(a.trace_records == b.trace_records);

  auto other = c;
  other.seed = 10;
  CHECK(run_scenario(other).trace_hash != a.trace_hash);
}

TEST_CASE("ledger totals match battery accounting") {
  auto c = quick();
  c.attacks.push_back({});
  c.attacks[0].kind = adversary::AttackKind::Flood;
  c.attacks[0].count = 3;
  c.attacks[0].interval = 2.0;
  const auto m = run_scenario(c);
  CHECK(m.conservation_ok);
  for (const auto& e : m.ledger) {
    if (e.kind == grid::EntityKind::N || e.kind == grid::EntityKind::ES) {
      CAPTURE(e.id);
      CHECK(e.debited >= 0);
      CHECK(e.remaining >= 0);
    }
  }
  CHECK(m.attacks.bogus_frames_sent > 0);
}

TEST_CASE("defense toggle does not move the deployment") {
  auto c = quick(30.0);
  std::ostringstream t1, t2;
  run_scenario(c, {&t1});
  c.protocol.defense = false;
  run_scenario(c, {&t2});
  // Entity positions are the first thing a trace can disagree on; compare the ledgers instead.
  auto on = quick(30.0);
  auto off = on;
  off.protocol.defense = false;
  const auto a = run_scenario(on), b = run_scenario(off);
  REQUIRE(a.ledger.size() == b.ledger.size());
  for (std::size_t i = 0; i < a.ledger.size(); ++i) CHECK(a.ledger[i].kind == b.ledger[i].kind);
  CHECK(a.packets_sent == b.packets_sent);
}

TEST_CASE("sweep shape and byte-identical CSV") {
  auto c = quick(60.0);
  c.attacks.push_back({});
  c.attacks[0].kind = adversary::AttackKind::Drop;
  const auto rows = sweep(c, Vary::Malicious, 4);
  REQUIRE(rows.size() == 14);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].sweep_value == c.sweep.malicious[i / 2]);
    CHECK(rows[i].defense == (i % 2 == 0));
    CHECK(rows[i].metrics.installs.size() == static_cast<std::size_t>(c.sweep.malicious[i / 2]));
  }
  const auto dir = std::filesystem::temp_directory_path() / "sermt_test_metrics";
  std::filesystem::create_directories(dir);
  emit(rows, Format::Csv, dir / "a.csv", Vary::Malicious);
  emit(sweep(c, Vary::Malicious, 1), Format::Csv, dir / "b.csv", Vary::Malicious);
  const auto a = slurp(dir / "a.csv");
  CHECK(a == slurp(dir / "b.csv"));
  CHECK(std::count(a.begin(), a.end(), '\n') == 15);
  CHECK(a.rfind("sweep_value,defense,drop_pct,throughput,avg_bp\n", 0) == 0);

  auto ic = quick(40.0);
  ic.sweep.interval = {2, 4};
  ic.attacks.push_back({});
  ic.attacks[0].kind = adversary::AttackKind::Flood;
  ic.attacks[0].count = 2;
  const auto irows = sweep(ic, Vary::Interval);
  REQUIRE(irows.size() == 4);
  CHECK(irows[0].metrics.attacks.bogus_frames_sent > irows[2].metrics.attacks.bogus_frames_sent);
  std::filesystem::remove_all(dir);
}

TEST_CASE("svg output") {
  SweepRow r;
  r.sweep_value = 5;
  r.metrics.drop_pct = 12.5;
  std::ostringstream one;
  write_svg(one, {r}, chart_for(Vary::Malicious));
  const auto s = one.str();
  CHECK(s.find("<polyline") == std::string::npos);
  auto count = [](const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
    return n;
  };
  CHECK(count(s, "<circle") == 1);
  CHECK(s.find("Packet drop") != std::string::npos);

  SweepRow r2 = r, b1 = r, b2 = r;
  r2.sweep_value = 10;
  b1.defense = b2.defense = false;
  b2.sweep_value = 10;
  std::ostringstream two;
  write_svg(two, {r, b1, r2, b2}, chart_for(Vary::Interval));
  CHECK(count(two.str(), "<polyline") == 2);
  CHECK(count(two.str(), "<circle") == 4);
}

TEST_CASE("emit failures") {
  CHECK_THROWS_AS(emit({}, Format::Csv, "/tmp/never.csv", Vary::Malicious), RuntimeFault);
  CHECK_THROWS_AS(emit({SweepRow{}}, Format::Svg, "/nonexistent-dir/x.svg", Vary::Malicious), RuntimeFault);
}

TEST_CASE("topology report") {
  const auto s = summarize(grid::load_topology_file(kData / "ieee14.grid"), 430.0);
  CHECK(s.substations.size() == 11);
  CHECK(s.regions.size() == 4);
  const auto text = topology_report(s);
  CHECK(text.find("substations  11") != std::string::npos);
  CHECK(text.find("holds") != std::string::npos);
}

TEST_CASE("baseline survives a foreign wormhole endpoint as cluster head") {
  // Seed 7 lets an unknown wormhole node win a head election in the baseline.
  auto c = load_config(kConfigs / "ieee14.ini");
  c.seed = 7;
  c.protocol.defense = false;
  c.attacks = {adversary::AttackSpec{}};
  c.attacks[0].kind = adversary::AttackKind::Wormhole;
  c.attacks[0].count = 4;
  c.attacks[0].foreign = true;
  c.duration = 60.0;
  Metrics m;
  REQUIRE_NOTHROW(m = run_scenario(c));
  CHECK(m.conservation_ok);
}

TEST_CASE("clean shipped scenario over the full 600 s drops nothing") {
  auto c = load_config(kConfigs / "ieee14.ini");
  c.attacks.clear();
  const auto m = run_scenario(c);
  CHECK(c.duration == 600.0);
  CHECK(m.drop_pct == 0.0);
  CHECK(m.protocol.alarms == 0);
  CHECK(m.conservation_ok);
}

TEST_CASE("IEEE 118 scenario builds and completes") {
  const auto c = load_config(kConfigs / "ieee118.ini");
  const auto m = run_scenario(c);
  std::size_t n = 0, es = 0, pdc = 0;
  for (const auto& e : m.ledger) {
    n += e.kind == grid::EntityKind::N;
    es += e.kind == grid::EntityKind::ES;
    pdc += e.kind == grid::EntityKind::PDC;
  }
  CHECK(n == 500);
  CHECK(es == 300);
  CHECK(pdc == 8);
  CHECK(c.energy.initial_battery == 150.0);
  CHECK(m.packets_sent > 0);
  CHECK(m.conservation_ok);
}
