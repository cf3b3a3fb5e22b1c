#include "sermt/metrics/report.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "sermt/grid/pmu_placement.hpp"

namespace sermt::metrics {

TopologySummary summarize(grid::GridTopology topology, double radius) {
  TopologySummary s;
  s.substations = grid::partition_substations(topology);
  s.regions = grid::divide_regions(s.substations, radius);
  s.control_centers = grid::select_control_centers(s.substations);
  s.pmu_buses = grid::place_pmus(topology);
  s.topology = std::move(topology);
  s.radius = radius;
  return s;
}

std::string topology_report(const TopologySummary& s) {
  std::string out;
  std::size_t transformers = 0;
  for (const auto& b : s.topology.branches) transformers += b.is_transformer;
  out += fmt::format("buses        {}\n", s.topology.buses.size());
  out += fmt::format("branches     {} ({} transformers)\n", s.topology.branches.size(), transformers);

  // Merge-count identity: every substation of k buses absorbs k - 1 of them.
  std::size_t merged = 0;
  for (const auto& sub : s.substations) merged += sub.bus_ids.size() - 1;
  const bool identity = s.topology.buses.size() - s.substations.size() == merged;
  out += fmt::format("substations  {}   (buses - substations = {} = sum(size - 1): {})\n", s.substations.size(),
                     s.topology.buses.size() - s.substations.size(), identity ? "holds" : "VIOLATED");
  for (const auto& sub : s.substations) {
    if (sub.bus_ids.size() > 1 || s.substations.size() <= 20) {
      out += fmt::format("  S{:<4} buses {:<16} connectivity {}\n", sub.id, fmt::format("{{{}}}", fmt::join(sub.bus_ids, ",")),
                         sub.connectivity);
    }
  }
  if (s.substations.size() > 20) out += "  (single-bus substations omitted)\n";

  const auto& cc = s.control_centers;
  auto buses_of = [&](grid::SubstationId id) { return fmt::format("{{{}}}", fmt::join(s.substations.at(id - 1).bus_ids, ",")); };
  out += fmt::format("main CC      S{} buses {} connectivity {}\n", cc.main, buses_of(cc.main),
                     s.substations.at(cc.main - 1).connectivity);
  out += fmt::format("backup CC    S{} buses {} connectivity {}\n", cc.backup, buses_of(cc.backup),
                     s.substations.at(cc.backup - 1).connectivity);

  out += fmt::format("regions      {}   (radius {:g} m)\n", s.regions.size(), s.radius);
  for (const auto& r : s.regions) {
    out += fmt::format("  R{:<3} seed S{:<4} substations {{{}}}\n", r.id, r.seed, fmt::join(r.substation_ids, ","));
  }
  out += fmt::format("PMUs         {}   buses {{{}}}\n", s.pmu_buses.size(), fmt::join(s.pmu_buses, ","));
  return out;
}

}  // namespace sermt::metrics
