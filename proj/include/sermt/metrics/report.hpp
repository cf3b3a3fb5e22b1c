#pragma once

#include <string>

#include "sermt/grid/deployment.hpp"

namespace sermt::metrics {

struct TopologySummary {
  grid::GridTopology topology;
  std::vector<grid::Substation> substations;
  std::vector<grid::Region> regions;
  grid::ControlCenters control_centers;
  std::set<grid::BusId> pmu_buses;
  double radius = 0.0;
};

/// Substations, regions, CC choice and PMU placement for a grid, no sensors.
TopologySummary summarize(grid::GridTopology topology, double radius);

/// Human-readable `sermt topo --report` text.
std::string topology_report(const TopologySummary& s);

}  // namespace sermt::metrics
