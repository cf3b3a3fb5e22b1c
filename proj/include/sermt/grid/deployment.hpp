#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "sermt/grid/regions.hpp"

namespace sermt::grid {

enum class EntityKind { N, ES, PDC, MU, PMU, Gateway, Server };

std::string_view to_string(EntityKind kind);

struct EntitySeed {
  EntityKind kind = EntityKind::N;
  EntityId id = 0;
  Vec2 position;
  RegionId region = 0;
  std::optional<SubstationId> substation;
  std::optional<BusId> bus;
};

struct DeploymentCounts {
  int n_nodes = 0;
  int es_nodes = 0;
};

struct BoundingBox {
  Vec2 min;
  Vec2 max;
  double area() const { return (max.x - min.x) * (max.y - min.y); }
  bool contains(const Vec2& p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
};

/// Everything the protocol needs to know about the physical network.
struct NetworkLayout {
  GridTopology topology;
  std::vector<Substation> substations;
  std::vector<Region> regions;
  ControlCenters control_centers;
  std::set<BusId> pmu_buses;
  std::vector<BoundingBox> region_boxes;  // index = region id - 1
  std::vector<EntitySeed> entities;       // index = entity id

  std::size_t count(EntityKind kind) const;
  const Region& region(RegionId id) const { return regions.at(static_cast<std::size_t>(id - 1)); }
  const Substation& substation(SubstationId id) const {
    return substations.at(static_cast<std::size_t>(id - 1));
  }
};

/// Bounding box of the region's bus positions, grown by `margin` on every side.
BoundingBox region_box(const GridTopology& topology, const std::vector<Substation>& substations,
                       const Region& region, double margin);

/// Entity numbering, in deployment order: one MU per bus, PMUs, one gateway
/// per substation, main and backup servers, then region by region the N
/// nodes followed by the ES nodes, and finally one PDC per region at the
/// centroid of its substations. N/ES counts are split in proportion to
/// region box area (floor, remainders to lower region IDs) and placed
/// uniformly inside the box. Deterministic for a given rng_seed.
NetworkLayout deploy_sensors(GridTopology topology, double radius_threshold, DeploymentCounts counts,
                             std::uint64_t rng_seed, double box_margin);

/// `kind id region x y` per entity.
void write_deployment(std::ostream& out, const NetworkLayout& layout);

}  // namespace sermt::grid
