// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "sermt/crypto/ecc.hpp"
#include "sermt/crypto/hash_chain.hpp"
#include "sermt/crypto/rc5.hpp"
#include "sermt/grid/topology.hpp"
#include "sermt/metrics/report.hpp"
#include "sermt/metrics/scenario.hpp"
#include "sermt/protocol/formulas.hpp"
#include "sermt/protocol/routing.hpp"

using namespace sermt;

namespace {

const std::string kData = SERMT_DATA_DIR;
const std::string kConfigs = SERMT_CONFIG_DIR;
const std::string kCli = SERMT_CLI;

// Collects failed sub-checks; a criterion passes when none failed.
struct Checks {
  std::vector<std::string> failed;
  std::vector<std::string> notes;
  void expect(bool ok, std::string what) {
    if (!ok) failed.push_back(std::move(what));
  }
  void note(std::string what) { notes.push_back(std::move(what)); }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct CliResult {
  int status = -1;
  std::string out;
  double seconds = 0.0;
};

CliResult cli(const std::string& args) {
  CliResult r;
  const auto t0 = std::chrono::steady_clock::now();
  FILE* p = ::popen(fmt::format("'{}' {} 2>&1", kCli, args).c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), p)) r.out += buf.data();
  r.status = ::pclose(p);
  r.seconds = seconds_since(t0);
  return r;
}

bool contains(const std::vector<grid::BusId>& v, grid::BusId b) { return std::find(v.begin(), v.end(), b) != v.end(); }

std::string buses(const grid::Substation& s) {
  std::string out;
  for (auto b : s.bus_ids) out += fmt::format("{}{}", out.empty() ? "" : ",", b);
  return "{" + out + "}";
}

double rel_err(double got, double want) {
  if (got == want) return 0.0;
  return std::abs(got - want) / std::max(std::abs(want), std::numeric_limits<double>::min());
}

// ---------------------------------------------------------------- 1, 2

void structure_14(Checks& c) {
  const auto run = cli(fmt::format("topo '{}/ieee14.grid' --report", kData));
  c.expect(run.status == 0, "sermt topo exit status");
  c.expect(run.seconds < 1.0, fmt::format("runtime {:.3f} s >= 1 s", run.seconds));
  c.expect(run.out.find("substations  11 ") != std::string::npos, "report does not list 11 substations");

  auto topo = grid::load_topology_file(kData + "/ieee14.grid");
  const auto s = metrics::summarize(topo, *topo.radius_threshold);
  c.expect(s.substations.size() == 11, fmt::format("{} substations, want 11", s.substations.size()));
  const auto& main = s.substations.at(s.control_centers.main - 1);
  const auto& backup = s.substations.at(s.control_centers.backup - 1);
  c.expect(s.control_centers.main == 1, fmt::format("main CC S{} {} (connectivity {}), want S1", main.id, buses(main),
                                                    main.connectivity));
  c.expect(s.control_centers.backup == 2, fmt::format("backup CC S{} {} (connectivity {}), want S2", backup.id,
                                                      buses(backup), backup.connectivity));
  c.expect(s.regions.size() == 4, fmt::format("{} regions, want 4", s.regions.size()));
  c.expect(!s.regions.empty() && s.regions[0].seed == 4,
           fmt::format("first region seeded from S{}, want S4", s.regions.empty() ? 0 : s.regions[0].seed));
  c.note(fmt::format("{:.3f} s", run.seconds));
}

void structure_118(Checks& c) {
  const auto run = cli(fmt::format("topo '{}/ieee118.grid' --report", kData));
  c.expect(run.status == 0, "sermt topo exit status");
  c.expect(run.seconds < 2.0, fmt::format("runtime {:.3f} s >= 2 s", run.seconds));
  c.expect(run.out.find("holds") != std::string::npos, "merge-count identity not reported as holding");

  auto topo = grid::load_topology_file(kData + "/ieee118.grid");
  const auto s = metrics::summarize(topo, *topo.radius_threshold);
  c.expect(s.substations.size() == 107, fmt::format("{} substations, want 107", s.substations.size()));
  std::size_t merged = 0;
  for (const auto& sub : s.substations) merged += sub.bus_ids.size() - 1;
  c.expect(s.topology.buses.size() - s.substations.size() == merged, "merge-count identity violated");
  const auto& main = s.substations.at(s.control_centers.main - 1);
  const auto& backup = s.substations.at(s.control_centers.backup - 1);
  const bool main_ok = contains(main.bus_ids, 68) && contains(main.bus_ids, 69) && contains(main.bus_ids, 116);
  const bool backup_ok = contains(backup.bus_ids, 17) && contains(backup.bus_ids, 30);
  c.expect(main_ok, fmt::format("main CC S{} {} (connectivity {}), want the {{68,69,116}} substation", main.id,
                                buses(main), main.connectivity));
  c.expect(backup_ok, fmt::format("backup CC S{} {}, want the {{17,30}} substation", backup.id, buses(backup)));
  c.note(fmt::format("{:.3f} s", run.seconds));
}

// ---------------------------------------------------------------- 3

void formulas(Checks& c) {
  using namespace protocol;
  std::mt19937_64 rng(0x5e27);
  std::uniform_int_distribution<std::uint32_t> sent(1, 1000);
  std::uniform_real_distribution<double> bp(0.0, 200.0), tv(0.0, 100.0), dist(1.0, 500.0);
  std::uniform_int_distribution<int> conn(0, 12), size(1, 12);
  double worst = 0.0;
  int argmax_miss = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::uint32_t s = sent(rng);
    const std::uint32_t d = std::uniform_int_distribution<std::uint32_t>(0, s)(rng);
    worst = std::max(worst, rel_err(compute_trust(d, s), 100.0 * d / s));

    const double b = bp(rng), t = tv(rng), k = conn(rng), D = dist(rng);
    worst = std::max(worst, rel_err(forwarding_score(b, t, k), b * t * k));
    worst = std::max(worst, rel_err(candidate_value(b, t, k), b * t * k));
    const double w = route_weight(D, b, t);
    if (b * t == 0.0) {
      c.expect(std::isinf(w), "route weight finite at BP*TV = 0");
    } else {
      worst = std::max(worst, rel_err(w, D / (b * t)));
    }

    // argmax by direct evaluation, ties to the lower ID
    std::vector<Candidate> cands;
    const int n = size(rng);
    for (int j = 0; j < n; ++j) cands.push_back({static_cast<EntityId>(100 - 7 * j), bp(rng), tv(rng), double(conn(rng))});
    if (i % 5 == 0) cands.push_back(cands.front()), cands.back().id = 3;  // forced tie
    EntityId best = 0;
    double best_v = -1.0;
    for (const auto& x : cands) {
      const double v = x.bp * x.tv * x.connectivity;
      if (v > best_v || (v == best_v && x.id < best)) best_v = v, best = x.id;
    }
    argmax_miss += *select_forwarder(cands) != best;
    argmax_miss += *elect_cluster_head(cands) != best;
  }
  c.expect(worst <= 1e-12, fmt::format("max relative error {:.3g}", worst));
  c.expect(argmax_miss == 0, fmt::format("{} argmax disagreements", argmax_miss));
  c.expect(!is_trusted(40.0) && !is_trusted(compute_trust(4, 10)), "TV = 40 counted as trusted");
  c.expect(is_trusted(std::nextafter(40.0, 41.0)), "TV just above 40 not trusted");
  c.note(fmt::format("max rel err {:.3g}", worst));
}

// ---------------------------------------------------------------- 4

crypto::Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
  crypto::Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng());
  return b;
}

void crypto_suite(Checks& c) {
  using namespace crypto;
  // ECDH symmetry, every scalar pair on the toy curve
  const Curve toy(toy_curve());
  int pairs = 0, sym = 0;
  for (int a = 1; a < 19; ++a)
    for (int b = 1; b < 19; ++b, ++pairs) {
      const auto ka = keypair_from_private(toy, a), kb = keypair_from_private(toy, b);
      sym += derive_shared_secret(toy, a, kb.public_key) == derive_shared_secret(toy, b, ka.public_key);
    }
  c.expect(sym == pairs, fmt::format("ECDH symmetric on {}/{} toy pairs", sym, pairs));

  // RC5-32/12/16 published vector
  const Rc5 rc5(from_hex("915f4619be41b2516355a50110a9ce91"));
  Rc5Block pt{};
  const Bytes p = from_hex("21a5dbee154b8f6d");
  std::copy(p.begin(), p.end(), pt.begin());
  c.expect(to_hex(rc5.encrypt_block(pt)) == "f7c013ac5b2b8952", "RC5 reference vector");

  // round trips
  std::mt19937_64 rng(0xc0de);
  const Curve curve(secp112r1());
  const KeyPair server = generate_keypair(curve, 99);
  int rt_fail = 0;
  for (int i = 0; i < 1000; ++i) {
    const Bytes msg = random_bytes(rng, rng() % 300);
    const Bytes key = random_bytes(rng, kRc5KeySize);
    rt_fail += rc5_decrypt(key, rc5_encrypt(key, msg)) != msg;
    rt_fail += ecc_decrypt(curve, server.private_key, ecc_encrypt(curve, server.public_key, msg, rng())) != msg;
  }
  c.expect(rt_fail == 0, fmt::format("{} round-trip failures", rt_fail));

  // chains up to 64: with K_j the newest accepted key, exactly K_1..K_{j-1} verify
  int chain_wrong = 0;
  for (std::size_t len = 1; len <= 64; ++len) {
    const HashChain chain = build_hash_chain(to_bytes(fmt::format("chain-{}", len)), len);
    ChainVerifier v(chain.anchor(), 64);
    for (std::size_t j = len; j >= 1; --j) {
      if (j < len && !v.accept(chain.key(j), false).accepted) ++chain_wrong;
      for (std::size_t i = 1; i <= len; ++i) chain_wrong += v.peek(chain.key(i), false).accepted != (i < j);
    }
  }
  c.expect(chain_wrong == 0, fmt::format("{} hash-chain verdicts wrong", chain_wrong));

  const HashChain chain = build_hash_chain(to_bytes("forgery-target"), 64);
  const ChainVerifier v(chain.anchor(), 64);
  int forged = 0;
  for (int i = 0; i < 10000; ++i) forged += v.peek(random_bytes(rng, kDigestSize), false).accepted;
  c.expect(forged == 0, fmt::format("{} of 10000 forgeries accepted", forged));
  c.note(fmt::format("{} toy ECDH pairs, 2000 round trips, chains 1..64, 10000 forgeries", pairs));
}

// ---------------------------------------------------------------- 5

void routing(Checks& c) {
  using namespace protocol;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(0x40e7);
  std::uniform_int_distribution<int> size(2, 10);
  std::uniform_real_distribution<double> coord(0.0, 300.0), bp(0.0, 150.0), unit(0.0, 1.0);
  const double range = 150.0, inf = std::numeric_limits<double>::infinity();
  int disagree = 0, routed = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = static_cast<std::size_t>(size(rng));
    std::vector<double> x(n), y(n), b(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = coord(rng), y[i] = coord(rng), b[i] = bp(rng);
      t[i] = unit(rng) < 0.15 ? 0.0 : 100.0 * unit(rng);  // some untrusted relays with TV 0
    }
    std::vector<std::vector<double>> w(n, std::vector<double>(n, inf));
    Graph g(n);
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = 0; v < n; ++v) {
        const double d = std::hypot(x[u] - x[v], y[u] - y[v]);
        if (u == v || d > range) continue;
        w[u][v] = route_weight(d, b[v], t[v]);  // cost of handing the frame to v
        g.add_edge(u, v, w[u][v]);
      }
    // oracle: every simple path from 0 to n-1
    double best = inf;
    std::vector<std::size_t> cur{0};
    std::vector<bool> used(n, false);
    used[0] = true;
    std::function<void(double)> dfs = [&](double cost) {
      if (cur.back() == n - 1) {
        best = std::min(best, cost);
        return;
      }
      for (std::size_t v = 0; v < n; ++v) {
        if (used[v] || std::isinf(w[cur.back()][v])) continue;
        used[v] = true;
        cur.push_back(v);
        dfs(cost + w[cur[cur.size() - 2]][v]);
        cur.pop_back();
        used[v] = false;
      }
    };
    dfs(0.0);
    const auto got = shortest_path(g, 0, n - 1);
    if (std::isinf(best)) {
      disagree += got.has_value();
      continue;
    }
    ++routed;
    if (!got) {
      ++disagree;
      continue;
    }
    double along = 0.0;
    for (std::size_t k = 1; k < got->nodes.size(); ++k) along += w[got->nodes[k - 1]][got->nodes[k]];
    disagree += rel_err(got->cost, best) > 1e-12 || rel_err(along, best) > 1e-12;
  }
  const double secs = seconds_since(t0);
  c.expect(disagree == 0, fmt::format("{} of 500 graphs disagree", disagree));
  c.expect(secs < 30.0, fmt::format("runtime {:.2f} s >= 30 s", secs));
  c.note(fmt::format("{} routable graphs", routed));
}

// ---------------------------------------------------------------- 6, 7, 8

std::vector<metrics::SweepRow> g_sweep_rows;  // every run from 6 and 7, re-checked by 8

void scaled_shape(Checks& c, const metrics::ScenarioConfig& cfg, const metrics::Metrics& m) {
  std::size_t n = 0, es = 0, pdc = 0;
  for (const auto& e : m.ledger) {
    n += e.kind == grid::EntityKind::N;
    es += e.kind == grid::EntityKind::ES;
    pdc += e.kind == grid::EntityKind::PDC;
  }
  c.expect(n == 60 && es == 30 && pdc == 4 && cfg.duration == 600.0,
           fmt::format("{}: {} N, {} ES, {} PDC, {} s", cfg.name, n, es, pdc, cfg.duration));
}

void defense_efficacy(Checks& c) {
  const auto t0 = std::chrono::steady_clock::now();
  for (const char* file : {"ieee14.ini", "ieee14_sinkhole.ini"}) {
    const auto cfg = metrics::load_config(kConfigs + "/" + file);
    const auto rows = metrics::sweep(cfg, metrics::Vary::Malicious);
    scaled_shape(c, cfg, rows.front().metrics);
    std::string curve;
    for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
      const auto& s = rows[i];
      const auto& b = rows[i + 1];
      c.expect(s.defense && !b.defense && s.sweep_value == b.sweep_value, "sweep row order");
      c.expect(s.metrics.drop_pct <= b.metrics.drop_pct,
               fmt::format("{} count {}: SERMT {:.2f}% > baseline {:.2f}%", cfg.attacks[0].kind == adversary::AttackKind::Drop
                                                                                ? "DROP" : "SINKHOLE",
                           s.sweep_value, s.metrics.drop_pct, b.metrics.drop_pct));
      if (s.sweep_value == 35) {
        c.expect(s.metrics.drop_pct < b.metrics.drop_pct, fmt::format("{} count 35: no gap", file));
        curve = fmt::format("{:.1f}% vs {:.1f}%", s.metrics.drop_pct, b.metrics.drop_pct);
      }
      g_sweep_rows.push_back(s);
      g_sweep_rows.push_back(b);
    }
    c.note(fmt::format("{} @35 {}", to_string(cfg.attacks[0].kind), curve));
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 120.0, fmt::format("runtime {:.1f} s >= 120 s", secs));
}

void energy_trend(Checks& c) {
  const auto cfg = metrics::load_config(kConfigs + "/ieee14_flood.ini");
  const auto rows = metrics::sweep(cfg, metrics::Vary::Interval);
  scaled_shape(c, cfg, rows.front().metrics);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
    const auto& s = rows[i];
    const auto& b = rows[i + 1];
    c.expect(s.metrics.avg_bp >= b.metrics.avg_bp,
             fmt::format("interval {}: SERMT {:.4f} < baseline {:.4f}", s.sweep_value, s.metrics.avg_bp, b.metrics.avg_bp));
    c.expect(s.metrics.avg_bp <= prev, fmt::format("SERMT avg_bp rises at interval {}", s.sweep_value));
    prev = s.metrics.avg_bp;
    g_sweep_rows.push_back(s);
    g_sweep_rows.push_back(b);
  }
  c.note(fmt::format("SERMT {:.3f} -> {:.3f} mAh/h", rows.front().metrics.avg_bp, rows[rows.size() - 2].metrics.avg_bp));
}

adversary::AttackSpec attack(adversary::AttackKind kind, int count, bool foreign = false) {
  adversary::AttackSpec a;
  a.kind = kind;
  a.count = count;
  a.foreign = foreign;
  return a;
}

void conservation(Checks& c) {
  using adversary::AttackKind;
  int bad = 0;
  for (const auto& r : g_sweep_rows) bad += !r.metrics.conservation_ok;
  c.expect(bad == 0, fmt::format("{} of {} sweep runs fail the ledger", bad, g_sweep_rows.size()));

  const auto base = metrics::load_config(kConfigs + "/ieee14.ini");
  std::vector<metrics::ScenarioConfig> suite;
  auto add = [&](std::vector<adversary::AttackSpec> attacks, bool defense, std::uint64_t seed) {
    auto cfg = base;
    cfg.attacks = std::move(attacks);
    cfg.protocol.defense = defense;
    cfg.seed = seed;
    suite.push_back(cfg);
  };
  add({}, true, 1);
  add({}, false, 2);
  add({attack(AttackKind::Drop, 35)}, true, 3);
  add({attack(AttackKind::Drop, 35)}, false, 3);
  add({attack(AttackKind::Sinkhole, 20)}, true, 4);
  add({attack(AttackKind::Flood, 5)}, true, 5);
  add({attack(AttackKind::Sybil, 10)}, true, 6);
  add({attack(AttackKind::Wormhole, 4, true)}, false, 7);
  add({attack(AttackKind::Eavesdrop, 5, true)}, true, 8);
  add({attack(AttackKind::FalseData, 10)}, true, 9);

  const auto t0 = std::chrono::steady_clock::now();
  int mismatched = 0, unbalanced = 0;
  for (const auto& cfg : suite) {
    const auto a = metrics::run_scenario(cfg);
    const auto b = metrics::run_scenario(cfg);
    mismatched += a.trace_hash != b.trace_hash || a.trace_records != b.trace_records;
    unbalanced += !a.conservation_ok + !b.conservation_ok;
  }
  const double secs = seconds_since(t0);
  c.expect(mismatched == 0, fmt::format("{} of 10 scenario pairs hash differently", mismatched));
  c.expect(unbalanced == 0, fmt::format("{} of 20 runs fail the ledger", unbalanced));
  c.expect(secs < 60.0, fmt::format("20-run suite {:.1f} s >= 60 s", secs));
  c.note(fmt::format("20 runs {:.1f} s, {} sweep runs", secs, g_sweep_rows.size()));
}

// ---------------------------------------------------------------- 9

void security(Checks& c) {
  using adversary::AttackKind;
  auto cfg = metrics::load_config(kConfigs + "/ieee14.ini");
  cfg.attacks = {attack(AttackKind::Drop, 8),     attack(AttackKind::Sinkhole, 5),
                 attack(AttackKind::Sybil, 4),    attack(AttackKind::Flood, 3),
                 attack(AttackKind::FalseData, 4), attack(AttackKind::Wormhole, 2, true),
                 attack(AttackKind::Eavesdrop, 6, true)};
  const auto m = metrics::run_scenario(cfg);
  c.expect(m.protocol.plaintext_exposures == 0, fmt::format("{} plaintext exposures", m.protocol.plaintext_exposures));
  c.expect(m.attacks.frames_overheard > 0, "eavesdroppers overheard nothing (vacuous)");
  c.expect(m.attacks.payloads_decrypted == 0,
           fmt::format("key-less eavesdroppers decrypted {} payloads", m.attacks.payloads_decrypted));
  c.expect(m.protocol.forged_accepted == 0, fmt::format("{} forged control messages accepted", m.protocol.forged_accepted));
  c.expect(m.attacks.bogus_frames_sent > 0, "no forged traffic injected (vacuous)");
  int trusted = 0;
  for (const auto& o : m.installs) {
    if (o.node >= m.ledger.size()) continue;  // attacker-deployed node
    const auto k = m.ledger[o.node].kind;
    trusted += !(k == grid::EntityKind::N || k == grid::EntityKind::ES || k == grid::EntityKind::PDC);
  }
  c.expect(trusted == 0, fmt::format("{} installs on trusted equipment", trusted));

  // Naming a gateway or server as a target is refused outright.
  int refused = 0, tried = 0;
  for (const auto& e : m.ledger) {
    if (e.kind != grid::EntityKind::Gateway && e.kind != grid::EntityKind::Server) continue;
    auto bad = cfg;
    bad.duration = 1.0;
    bad.attacks = {attack(AttackKind::Drop, 0)};
    bad.attacks[0].targets = {e.id};
    ++tried;
    try {
      metrics::run_scenario(bad);
    } catch (const metrics::ConfigError&) {
      ++refused;
    }
  }
  c.expect(tried > 0 && refused == tried, fmt::format("{} of {} gateway/server targets refused", refused, tried));
  c.note(fmt::format("{} installs, {} frames overheard, {} forged rejected", m.installs.size(), m.attacks.frames_overheard,
                     m.protocol.forged_rejected));
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Checks&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "IEEE 14 structure", structure_14},     {2, "IEEE 118 structure", structure_118},
      {3, "formula conformance", formulas},       {4, "crypto suite", crypto_suite},
      {5, "routing oracle", routing},             {6, "defense efficacy (drop sweep)", defense_efficacy},
      {7, "energy trend (flood sweep)", energy_trend}, {8, "conservation and determinism", conservation},
      {9, "security invariants", security},
  };
  int failures = 0;
  for (const auto& cr : criteria) {
    Checks c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(c);
    } catch (const std::exception& e) {
      c.failed.push_back(fmt::format("exception: {}", e.what()));
    }
    const double secs = seconds_since(t0);
    const bool pass = c.failed.empty();
    failures += !pass;
    std::string detail;
    for (const auto& s : pass ? c.notes : c.failed) detail += (detail.empty() ? "" : "; ") + s;
    std::printf("%s  criterion %d  %-32s %8.2f s  %s\n", pass ? "PASS" : "FAIL", cr.id, cr.name, secs, detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
