#include "sermt/grid/topology.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace sermt::grid {

const Bus& GridTopology::bus(BusId id) const {
  auto it = std::find_if(buses.begin(), buses.end(), [id](const Bus& b) { return b.id == id; });
  if (it == buses.end()) throw GridError(GridError::Kind::Validation, fmt::format("unknown bus {}", id));
  return *it;
}

namespace {

[[noreturn]] void parse_error(int line_no, const std::string& msg) {
  throw GridError(GridError::Kind::Parse, fmt::format("line {}: {}", line_no, msg));
}

}  // namespace

GridTopology load_topology(std::istream& in) {
  GridTopology topo;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string keyword;
    if (!(fields >> keyword) || keyword.front() == '#') continue;
    if (keyword == "BUS") {
      Bus bus;
      if (!(fields >> bus.id >> bus.position.x >> bus.position.y)) parse_error(line_no, "expected BUS <id> <x> <y>");
      topo.buses.push_back(bus);
    } else if (keyword == "BRANCH") {
      Branch br;
      std::string kind;
      if (!(fields >> br.from >> br.to >> kind) || (kind != "T" && kind != "L")) {
        parse_error(line_no, "expected BRANCH <from> <to> <T|L>");
      }
      br.is_transformer = kind == "T";
      topo.branches.push_back(br);
    } else if (keyword == "RADIUS") {
      double r = 0;
      if (!(fields >> r) || !(r > 0)) parse_error(line_no, "expected RADIUS <positive meters>");
      topo.radius_threshold = r;
    } else {
      parse_error(line_no, fmt::format("unknown keyword '{}'", keyword));
    }
    std::string extra;
    if (fields >> extra && extra.front() != '#') parse_error(line_no, fmt::format("trailing token '{}'", extra));
  }
  validate_topology(topo);
  return topo;
}

GridTopology load_topology(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_topology(in);
}

GridTopology load_topology_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GridError(GridError::Kind::Parse, fmt::format("cannot open topology file {}", path.string()));
  return load_topology(in);
}

void validate_topology(const GridTopology& topology) {
  if (topology.buses.empty()) throw GridError(GridError::Kind::Validation, "topology has no buses");
  std::unordered_set<BusId> ids;
  for (const auto& bus : topology.buses) {
    if (!ids.insert(bus.id).second) {
      throw GridError(GridError::Kind::Validation, fmt::format("duplicate bus {}", bus.id));
    }
    if (!std::isfinite(bus.position.x) || !std::isfinite(bus.position.y)) {
      throw GridError(GridError::Kind::Validation, fmt::format("bus {} has a non-finite position", bus.id));
    }
  }
  for (const auto& br : topology.branches) {
    for (BusId end : {br.from, br.to}) {
      if (!ids.contains(end)) {
        throw GridError(GridError::Kind::Validation,
                        fmt::format("branch {}-{} references missing bus {}", br.from, br.to, end));
      }
    }
    if (br.from == br.to) {
      throw GridError(GridError::Kind::Validation, fmt::format("branch {}-{} is a self loop", br.from, br.to));
    }
  }
}

}  // namespace sermt::grid
