#pragma once

#include <functional>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "ghs/clock.hpp"
#include "ghs/orchestrator.hpp"
#include "ghs/store.hpp"

namespace ghs {

inline constexpr Seconds kDefaultCyclePeriod = std::chrono::hours{6};

/// Store-backed exclusive lease: at most one scheduler drives mining for a
/// deployment. revoke() wakes a sleeping scheduler and ends its loop.
class SchedulerLease {
 public:
  SchedulerLease(RepositoryStore& store, Clock& clock, std::string owner,
                 Seconds ttl = std::chrono::hours{13}, std::string name = "scheduler");
  ~SchedulerLease();

  SchedulerLease(const SchedulerLease&) = delete;
  SchedulerLease& operator=(const SchedulerLease&) = delete;

  /// Acquires or renews. Returns false when another owner holds it or after
  /// revoke().
  bool acquire();
  bool held() const;
  void revoke();
  bool revoked() const { return stop_.stop_requested(); }
  std::stop_token stop_token() const { return stop_.get_token(); }
  const std::string& owner() const { return owner_; }

 private:
  RepositoryStore& store_;
  Clock& clock_;
  std::string owner_;
  std::string name_;
  Seconds ttl_;
  std::stop_source stop_;
};

struct CycleRecord {
  Instant started;
  Instant finished;
  int passes_ok = 0;
  int passes_failed = 0;
};

struct ScheduleOptions {
  Seconds period = kDefaultCyclePeriod;
  /// No cycle starts at or after this instant.
  std::optional<Instant> stop_at;
  /// Stop after this many cycles.
  std::optional<int> max_cycles;
};

using PassFn = std::function<void(const std::string& language, Instant now)>;

/// Runs one pass per configured language every `period`, measured from the
/// start of the previous cycle. A cycle that overruns is followed
/// immediately by the next, never concurrently. A failing pass is logged and
/// the cycle moves on to the next language.
std::vector<CycleRecord> schedule_loop(const LanguageConfig& languages, const PassFn& pass,
                                       Clock& clock, SchedulerLease& lease,
                                       const ScheduleOptions& options = {});

}  // namespace ghs
