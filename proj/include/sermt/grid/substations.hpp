#pragma once

#include <vector>

#include "sermt/grid/topology.hpp"

namespace sermt::grid {

struct Substation {
  SubstationId id = 0;
  std::vector<BusId> bus_ids;  // ascending
  Vec2 position;               // centroid of member buses
  /// Non-transformer branches joining this substation to another one.
  int connectivity = 0;
};

/// Connected components of the transformer-only subgraph; IDs 1..k in
/// ascending order of each component's minimum bus ID.
std::vector<Substation> partition_substations(const GridTopology& topology);

/// Substation holding `bus`, or 0.
SubstationId substation_of(const std::vector<Substation>& substations, BusId bus);

struct ControlCenters {
  SubstationId main = 0;
  SubstationId backup = 0;
};

/// Highest and second-highest connectivity; ties go to the lower ID.
/// Throws GridError(Config) with fewer than two substations.
ControlCenters select_control_centers(const std::vector<Substation>& substations);

}  // namespace sermt::grid
