#include "sermt/grid/pmu_placement.hpp"

#include <map>

namespace sermt::grid {
namespace {

std::map<BusId, std::set<BusId>> closed_neighbourhoods(const GridTopology& topology) {
  std::map<BusId, std::set<BusId>> nbr;
  for (const auto& bus : topology.buses) nbr[bus.id].insert(bus.id);
  for (const auto& br : topology.branches) {
    nbr[br.from].insert(br.to);
    nbr[br.to].insert(br.from);
  }
  return nbr;
}

}  // namespace

std::set<BusId> place_pmus(const GridTopology& topology) {
  const auto nbr = closed_neighbourhoods(topology);
  std::set<BusId> observed;
  std::set<BusId> pmus;
  while (observed.size() < nbr.size()) {
    BusId best = 0;
    std::size_t best_gain = 0;
    for (const auto& [bus, hood] : nbr) {  // ascending bus ID
      std::size_t gain = 0;
      for (BusId b : hood) gain += observed.contains(b) ? 0 : 1;
      if (gain > best_gain) {
        best_gain = gain;
        best = bus;
      }
    }
    pmus.insert(best);
    observed.insert(nbr.at(best).begin(), nbr.at(best).end());
  }
  return pmus;
}

bool observes_all(const GridTopology& topology, const std::set<BusId>& pmus) {
  const auto nbr = closed_neighbourhoods(topology);
  for (const auto& [bus, hood] : nbr) {
    bool seen = false;
    for (BusId b : hood) seen = seen || pmus.contains(b);
    if (!seen) return false;
  }
  return true;
}

}  // namespace sermt::grid
