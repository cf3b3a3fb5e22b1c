#include "sermt/sim/event_queue.hpp"

#include <fmt/format.h>

namespace sermt::sim {

void EventQueue::schedule(double at_time, Action action) {
  if (at_time < now_) {
    throw LogicFault(fmt::format("event scheduled at t={} but the clock is already at t={}", at_time, now_));
  }
  heap_.push(Entry{at_time, next_sequence_++, std::move(action)});
}

std::size_t EventQueue::run_until(double t_end) {
  std::size_t fired = 0;
  while (!heap_.empty() && heap_.top().time <= t_end) {
    Entry entry = heap_.top();
    heap_.pop();
    now_ = entry.time;
    entry.action();
    ++fired;
  }
  if (t_end > now_) now_ = t_end;
  return fired;
}

}  // namespace sermt::sim
