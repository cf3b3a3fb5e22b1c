#pragma once

#include <optional>
#include <vector>

#include "sermt/grid/substations.hpp"

namespace sermt::grid {

struct Region {
  RegionId id = 0;
  std::vector<SubstationId> substation_ids;  // ascending
  SubstationId seed = 0;
  std::optional<EntityId> pdc_id;
};

/// Indices of points on the convex hull boundary, including points that lie
/// on a hull edge. Fewer than three distinct points are all on the border.
std::vector<std::size_t> convex_hull_members(const std::vector<Vec2>& points);

/// Region growing: the first seed is the unassigned border substation of
/// maximum connectivity; every unassigned substation within radius_threshold
/// (inclusive) of the seed joins its region; the next seed is the unassigned
/// substation closest to the previous seed. Ties resolve to the lower ID.
std::vector<Region> divide_regions(const std::vector<Substation>& substations, double radius_threshold);

RegionId region_of(const std::vector<Region>& regions, SubstationId substation);

}  // namespace sermt::grid
