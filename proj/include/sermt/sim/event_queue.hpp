#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace sermt::sim {

class LogicFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Events fire in (time, sequence) order; the sequence counter makes equal
/// times fire in scheduling order.
class EventQueue {
 public:
  using Action = std::function<void()>;

  /// Throws LogicFault when at_time is earlier than now().
  void schedule(double at_time, Action action);
  void schedule_in(double delay, Action action) { schedule(now_ + delay, std::move(action)); }

  /// Fires every event with time <= t_end, then advances the clock to t_end.
  /// Returns the number of events fired.
  std::size_t run_until(double t_end);

  double now() const { return now_; }
  std::size_t pending() const { return heap_.size(); }

 private:
  struct Entry {
    double time;
    std::uint64_t sequence;
    Action action;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.sequence > b.sequence;
    }
  };

  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::uint64_t next_sequence_ = 0;
  double now_ = 0.0;
};

}  // namespace sermt::sim
