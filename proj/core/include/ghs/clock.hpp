#pragma once

#include <condition_variable>
#include <mutex>
#include <stop_token>

#include "ghs/time.hpp"

namespace ghs {

/// Injected time source. Everything time-based (rate windows, backoff,
/// scheduling) goes through this so tests can run on simulated time.
class Clock {
 public:
  virtual ~Clock() = default;

  virtual TimePoint now() const = 0;

  /// Blocks until `deadline` or until `stop` is requested. Returns false
  /// when woken by the stop request.
  virtual bool sleep_until(TimePoint deadline, std::stop_token stop = {}) = 0;

  bool sleep_for(std::chrono::milliseconds d, std::stop_token stop = {}) {
    return sleep_until(now() + d, std::move(stop));
  }

  Instant now_instant() const { return to_instant(now()); }
};

class SystemClock final : public Clock {
 public:
  TimePoint now() const override;
  bool sleep_until(TimePoint deadline, std::stop_token stop = {}) override;

 private:
  std::mutex mutex_;
  std::condition_variable_any cv_;
};

/// Deterministic clock. In AutoAdvance mode a sleep simply moves time
/// forward to the deadline; in Manual mode sleepers block until some other
/// thread calls advance() or set().
class SimulatedClock final : public Clock {
 public:
  enum class Mode { AutoAdvance, Manual };

  explicit SimulatedClock(TimePoint start, Mode mode = Mode::AutoAdvance)
      : now_(start), mode_(mode) {}
  explicit SimulatedClock(Instant start, Mode mode = Mode::AutoAdvance)
      : SimulatedClock(TimePoint{start}, mode) {}

  TimePoint now() const override;
  bool sleep_until(TimePoint deadline, std::stop_token stop = {}) override;

  void advance(std::chrono::milliseconds d);
  void set(TimePoint t);

  /// Number of threads currently blocked in sleep_until (Manual mode).
  int sleepers() const;

 private:
  mutable std::mutex mutex_;
  std::condition_variable_any cv_;
  TimePoint now_;
  Mode mode_;
  int sleepers_ = 0;
};

}  // namespace ghs
