#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "sermt/grid/types.hpp"

namespace sermt::grid {

struct Bus {
  BusId id = 0;
  Vec2 position;
};

struct Branch {
  BusId from = 0;
  BusId to = 0;
  bool is_transformer = false;
};

struct GridTopology {
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  /// Calibrated region radius carried by the file, if any.
  std::optional<double> radius_threshold;

  const Bus& bus(BusId id) const;
};

/// Line grammar:
///   BUS <id> <x> <y>
///   BRANCH <from> <to> <T|L>
///   RADIUS <meters>          (optional)
/// Blank lines and lines starting with '#' are ignored.
/// Throws GridError(Parse) with the line number, or GridError(Validation).
GridTopology load_topology(std::istream& in);
GridTopology load_topology(std::string_view text);
GridTopology load_topology_file(const std::filesystem::path& path);

/// Duplicate bus IDs, dangling or self-loop branches, non-finite positions
/// and an empty bus list are rejected.
void validate_topology(const GridTopology& topology);

}  // namespace sermt::grid
