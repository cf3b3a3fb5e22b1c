#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sermt::grid {

using BusId = int;
using SubstationId = int;
using RegionId = int;
using EntityId = std::uint32_t;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double distance(const Vec2& a, const Vec2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

class GridError : public std::runtime_error {
 public:
  enum class Kind { Parse, Validation, Config };
  GridError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace sermt::grid
