#pragma once

#include <set>

#include "sermt/grid/topology.hpp"

namespace sermt::grid {

/// Greedy dominating-set cover of the bus graph: repeatedly place a PMU at the
/// bus whose closed neighbourhood observes the most unobserved buses (lower
/// bus ID on ties) until every bus is observed.
std::set<BusId> place_pmus(const GridTopology& topology);

/// True iff every bus carries a PMU or is joined by a branch to one.
bool observes_all(const GridTopology& topology, const std::set<BusId>& pmus);

}  // namespace sermt::grid
