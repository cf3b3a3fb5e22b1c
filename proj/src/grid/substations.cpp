#include "sermt/grid/substations.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace sermt::grid {
namespace {

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::vector<Substation> partition_substations(const GridTopology& topology) {
  std::vector<BusId> ids;
  for (const auto& bus : topology.buses) ids.push_back(bus.id);
  std::sort(ids.begin(), ids.end());
  std::map<BusId, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;

  DisjointSet sets(ids.size());
  for (const auto& br : topology.branches) {
    if (br.is_transformer) sets.unite(index.at(br.from), index.at(br.to));
  }

  // Roots are the minimum member index, so visiting buses in ascending order
  // numbers substations by their minimum bus ID.
  std::map<std::size_t, SubstationId> root_to_id;
  std::vector<Substation> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::size_t root = sets.find(i);
    auto [it, inserted] = root_to_id.try_emplace(root, static_cast<SubstationId>(out.size() + 1));
    if (inserted) out.push_back(Substation{it->second, {}, {}, 0});
    out[it->second - 1].bus_ids.push_back(ids[i]);
  }

  std::map<BusId, SubstationId> sub_of;
  for (auto& s : out) {
    Vec2 sum;
    for (BusId b : s.bus_ids) {
      const Vec2 p = topology.bus(b).position;
      sum.x += p.x;
      sum.y += p.y;
      sub_of[b] = s.id;
    }
    s.position = Vec2{sum.x / s.bus_ids.size(), sum.y / s.bus_ids.size()};
  }
  for (const auto& br : topology.branches) {
    if (br.is_transformer) continue;
    const SubstationId a = sub_of.at(br.from);
    const SubstationId b = sub_of.at(br.to);
    if (a == b) continue;
    ++out[a - 1].connectivity;
    ++out[b - 1].connectivity;
  }
  return out;
}

SubstationId substation_of(const std::vector<Substation>& substations, BusId bus) {
  for (const auto& s : substations) {
    if (std::binary_search(s.bus_ids.begin(), s.bus_ids.end(), bus)) return s.id;
  }
  return 0;
}

ControlCenters select_control_centers(const std::vector<Substation>& substations) {
  if (substations.size() < 2) {
    throw GridError(GridError::Kind::Config, "control-center selection needs at least two substations");
  }
  std::vector<const Substation*> ranked;
  for (const auto& s : substations) ranked.push_back(&s);
  std::sort(ranked.begin(), ranked.end(), [](const Substation* a, const Substation* b) {
    if (a->connectivity != b->connectivity) return a->connectivity > b->connectivity;
    return a->id < b->id;
  });
  return ControlCenters{ranked[0]->id, ranked[1]->id};
}

}  // namespace sermt::grid
