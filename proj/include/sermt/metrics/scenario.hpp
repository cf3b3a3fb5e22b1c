#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sermt/adversary/adversary.hpp"
#include "sermt/metrics/config.hpp"

namespace sermt::metrics {

struct NodeEnergy {
  grid::EntityId id = 0;
  grid::EntityKind kind = grid::EntityKind::N;
  sim::Picojoules debited = 0;
  sim::Picojoules recharged = 0;
  sim::Picojoules remaining = 0;  // 0 for mains-powered equipment
  bool dead = false;
};

struct Metrics {
  std::uint64_t packets_sent = 0;  // readings generated
  std::uint64_t packets_delivered = 0;
  double drop_pct = 0.0;
  double throughput = 0.0;  // delivered payload bits per simulated second
  double avg_bp = 0.0;      // mAh consumed per hour, averaged over every N and ES node
  bool conservation_ok = false;
  std::uint64_t trace_hash = 0;
  std::uint64_t trace_records = 0;
  protocol::ProtocolStats protocol;
  adversary::AttackOutcomeLog attacks;
  std::vector<adversary::Override> installs;
  std::vector<NodeEnergy> ledger;  // deployed entities, by ID
};

struct RunOptions {
  std::ostream* trace_out = nullptr;  // full event log plus ATTACK rows
};

/// Deploys, runs and measures one scenario. Every metric is computed from
/// the trace stream, then cross-checked against protocol counters and the
/// batteries; conservation_ok reports the outcome.
Metrics run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

enum class Vary { Malicious, Interval };

struct SweepRow {
  double sweep_value = 0.0;
  bool defense = true;
  Metrics metrics;
};

/// One run per sweep point per defense toggle, executed in parallel and
/// returned in sweep order (SERMT before baseline at each point).
/// Malicious: every non-foreign attack section takes the point as its
/// count. Interval: every attack section takes it as its interval.
std::vector<SweepRow> sweep(const ScenarioConfig& config, Vary vary, unsigned threads = 0);

}  // namespace sermt::metrics
