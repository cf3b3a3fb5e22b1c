#include "sermt/grid/regions.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace sermt::grid {
namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  return cross(a, b, p) == 0.0 && std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

}  // namespace

std::vector<std::size_t> convex_hull_members(const std::vector<Vec2>& points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(points[a].x, points[a].y, a) < std::tie(points[b].x, points[b].y, b);
  });

  // Andrew's monotone chain over distinct positions, strict turns only.
  std::vector<std::size_t> hull;
  for (int pass = 0; pass < 2; ++pass) {
    const std::size_t base = hull.size();
    for (std::size_t k = 0; k < order.size(); ++k) {
      const std::size_t i = pass == 0 ? order[k] : order[order.size() - 1 - k];
      while (hull.size() >= base + 2 &&
             cross(points[hull[hull.size() - 2]], points[hull.back()], points[i]) <= 0.0) {
        hull.pop_back();
      }
      hull.push_back(i);
    }
    hull.pop_back();
  }

  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool border = hull.size() < 3;
    for (std::size_t e = 0; !border && e < hull.size(); ++e) {
      border = on_segment(points[i], points[hull[e]], points[hull[(e + 1) % hull.size()]]);
    }
    if (border) members.push_back(i);
  }
  return members;
}

std::vector<Region> divide_regions(const std::vector<Substation>& substations, double radius_threshold) {
  if (!(radius_threshold > 0)) throw GridError(GridError::Kind::Config, "radius_threshold must be positive");
  std::vector<const Substation*> unassigned;
  for (const auto& s : substations) unassigned.push_back(&s);
  std::sort(unassigned.begin(), unassigned.end(),
            [](const Substation* a, const Substation* b) { return a->id < b->id; });

  std::vector<Region> regions;
  const Substation* previous = nullptr;
  while (!unassigned.empty()) {
    const Substation* seed = nullptr;
    if (previous == nullptr) {
      std::vector<Vec2> pts;
      for (const auto* s : unassigned) pts.push_back(s->position);
      for (std::size_t i : convex_hull_members(pts)) {
        const Substation* s = unassigned[i];
        if (!seed || s->connectivity > seed->connectivity ||
            (s->connectivity == seed->connectivity && s->id < seed->id)) {
          seed = s;
        }
      }
    } else {
      double best = std::numeric_limits<double>::infinity();
      for (const auto* s : unassigned) {
        const double d = distance(s->position, previous->position);
        if (d < best) {
          best = d;
          seed = s;
        }
      }
    }

    Region region;
    region.id = static_cast<RegionId>(regions.size() + 1);
    region.seed = seed->id;
    std::vector<const Substation*> rest;
    for (const auto* s : unassigned) {
      if (distance(s->position, seed->position) <= radius_threshold) {
        region.substation_ids.push_back(s->id);
      } else {
        rest.push_back(s);
      }
    }
    regions.push_back(std::move(region));
    unassigned = std::move(rest);
    previous = seed;
  }
  return regions;
}

RegionId region_of(const std::vector<Region>& regions, SubstationId substation) {
  for (const auto& r : regions) {
    if (std::find(r.substation_ids.begin(), r.substation_ids.end(), substation) != r.substation_ids.end()) {
      return r.id;
    }
  }
  return 0;
}

}  // namespace sermt::grid
