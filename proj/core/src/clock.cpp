#include "ghs/clock.hpp"

namespace ghs {

TimePoint SystemClock::now() const {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(
      std::chrono::system_clock::now());
}

bool SystemClock::sleep_until(TimePoint deadline, std::stop_token stop) {
  std::unique_lock lock(mutex_);
  // system_clock deadline; the predicate only reacts to stop requests
  cv_.wait_until(lock, stop, deadline, [] { return false; });
  return !stop.stop_requested();
}

TimePoint SimulatedClock::now() const {
  std::lock_guard lock(mutex_);
  return now_;
}

bool SimulatedClock::sleep_until(TimePoint deadline, std::stop_token stop) {
  std::unique_lock lock(mutex_);
  if (stop.stop_requested()) return false;
  if (mode_ == Mode::AutoAdvance) {
    if (deadline > now_) now_ = deadline;
    cv_.notify_all();
    return true;
  }
  ++sleepers_;
  cv_.notify_all();
  bool reached = cv_.wait(lock, stop, [&] { return now_ >= deadline; });
  --sleepers_;
  cv_.notify_all();
  return reached;
}

void SimulatedClock::advance(std::chrono::milliseconds d) {
  std::lock_guard lock(mutex_);
  now_ += d;
  cv_.notify_all();
}

void SimulatedClock::set(TimePoint t) {
  std::lock_guard lock(mutex_);
  now_ = t;
  cv_.notify_all();
}

int SimulatedClock::sleepers() const {
  std::lock_guard lock(mutex_);
  return sleepers_;
}

}  // namespace ghs
