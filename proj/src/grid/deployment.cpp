#include "sermt/grid/deployment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <ostream>
#include <random>

#include "sermt/grid/pmu_placement.hpp"

namespace sermt::grid {

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::N: return "N";
    case EntityKind::ES: return "ES";
    case EntityKind::PDC: return "PDC";
    case EntityKind::MU: return "MU";
    case EntityKind::PMU: return "PMU";
    case EntityKind::Gateway: return "GW";
    case EntityKind::Server: return "SERVER";
  }
  return "?";
}

std::size_t NetworkLayout::count(EntityKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(entities.begin(), entities.end(), [kind](const EntitySeed& e) { return e.kind == kind; }));
}

BoundingBox region_box(const GridTopology& topology, const std::vector<Substation>& substations,
                       const Region& region, double margin) {
  BoundingBox box{{1e300, 1e300}, {-1e300, -1e300}};
  for (SubstationId sid : region.substation_ids) {
    for (BusId b : substations.at(static_cast<std::size_t>(sid - 1)).bus_ids) {
      const Vec2 p = topology.bus(b).position;
      box.min = {std::min(box.min.x, p.x), std::min(box.min.y, p.y)};
      box.max = {std::max(box.max.x, p.x), std::max(box.max.y, p.y)};
    }
  }
  box.min = {box.min.x - margin, box.min.y - margin};
  box.max = {box.max.x + margin, box.max.y + margin};
  return box;
}

namespace {

// [0, 1) from the top 53 bits; independent of the standard library's
// distribution implementations.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<int> split_by_area(int total, const std::vector<BoundingBox>& boxes) {
  double area_sum = 0;
  for (const auto& b : boxes) area_sum += b.area();
  std::vector<int> share(boxes.size(), 0);
  int assigned = 0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    share[i] = area_sum > 0 ? static_cast<int>(total * boxes[i].area() / area_sum) : 0;
    assigned += share[i];
  }
  for (std::size_t i = 0; assigned < total; i = (i + 1) % boxes.size(), ++assigned) ++share[i];
  return share;
}

}  // namespace

NetworkLayout deploy_sensors(GridTopology topology, double radius_threshold, DeploymentCounts counts,
                             std::uint64_t rng_seed, double box_margin) {
  if (counts.n_nodes < 0 || counts.es_nodes < 0) {
    throw GridError(GridError::Kind::Config, "node counts must be non-negative");
  }
  NetworkLayout layout;
  layout.substations = partition_substations(topology);
  layout.regions = divide_regions(layout.substations, radius_threshold);
  layout.control_centers = select_control_centers(layout.substations);
  layout.pmu_buses = place_pmus(topology);
  for (const auto& r : layout.regions) {
    layout.region_boxes.push_back(region_box(topology, layout.substations, r, box_margin));
  }
  layout.topology = std::move(topology);

  auto add = [&layout](EntityKind kind, Vec2 pos, RegionId region, std::optional<SubstationId> sub,
                       std::optional<BusId> bus) {
    const auto id = static_cast<EntityId>(layout.entities.size());
    layout.entities.push_back(EntitySeed{kind, id, pos, region, sub, bus});
    return id;
  };
  auto region_of_bus = [&layout](BusId b) {
    const SubstationId sid = substation_of(layout.substations, b);
    return std::pair{sid, region_of(layout.regions, sid)};
  };

  std::vector<Bus> buses = layout.topology.buses;
  std::sort(buses.begin(), buses.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; });
  for (const auto& bus : buses) {
    auto [sid, rid] = region_of_bus(bus.id);
    add(EntityKind::MU, bus.position, rid, sid, bus.id);
  }
  for (BusId b : layout.pmu_buses) {
    auto [sid, rid] = region_of_bus(b);
    add(EntityKind::PMU, layout.topology.bus(b).position, rid, sid, b);
  }
  for (const auto& s : layout.substations) {
    add(EntityKind::Gateway, s.position, region_of(layout.regions, s.id), s.id, std::nullopt);
  }
  for (SubstationId sid : {layout.control_centers.main, layout.control_centers.backup}) {
    add(EntityKind::Server, layout.substation(sid).position, region_of(layout.regions, sid), sid, std::nullopt);
  }

  std::mt19937_64 rng(rng_seed);
  const std::vector<int> n_share = split_by_area(counts.n_nodes, layout.region_boxes);
  const std::vector<int> es_share = split_by_area(counts.es_nodes, layout.region_boxes);
  for (std::size_t r = 0; r < layout.regions.size(); ++r) {
    const BoundingBox& box = layout.region_boxes[r];
    const RegionId rid = layout.regions[r].id;
    for (auto [kind, n] : {std::pair{EntityKind::N, n_share[r]}, std::pair{EntityKind::ES, es_share[r]}}) {
      for (int k = 0; k < n; ++k) {
        const double x = box.min.x + unit(rng) * (box.max.x - box.min.x);
        const double y = box.min.y + unit(rng) * (box.max.y - box.min.y);
        add(kind, Vec2{x, y}, rid, std::nullopt, std::nullopt);
      }
    }
  }

  for (auto& region : layout.regions) {
    Vec2 c;
    for (SubstationId sid : region.substation_ids) {
      c.x += layout.substation(sid).position.x;
      c.y += layout.substation(sid).position.y;
    }
    const double n = static_cast<double>(region.substation_ids.size());
    region.pdc_id = add(EntityKind::PDC, Vec2{c.x / n, c.y / n}, region.id, std::nullopt, std::nullopt);
  }
  return layout;
}

void write_deployment(std::ostream& out, const NetworkLayout& layout) {
  for (const auto& e : layout.entities) {
    out << fmt::format("{} {} {} {:.3f} {:.3f}\n", to_string(e.kind), e.id, e.region, e.position.x, e.position.y);
  }
}

}  // namespace sermt::grid
