#include "ghs/scheduler.hpp"

#include <spdlog/spdlog.h>

#include "ghs/error.hpp"

namespace ghs {

SchedulerLease::SchedulerLease(RepositoryStore& store, Clock& clock, std::string owner,
                               Seconds ttl, std::string name)
    : store_(store), clock_(clock), owner_(std::move(owner)), name_(std::move(name)), ttl_(ttl) {}

SchedulerLease::~SchedulerLease() {
  try {
    store_.release_lease(name_, owner_);
  } catch (const std::exception& e) {
    spdlog::warn("lease release failed: {}", e.what());
  }
}

bool SchedulerLease::acquire() {
  if (revoked()) return false;
  return store_.try_acquire_lease(name_, owner_, clock_.now_instant(), ttl_);
}

bool SchedulerLease::held() const {
  if (revoked()) return false;
  auto holder = store_.lease_holder(name_, clock_.now_instant());
  return holder && *holder == owner_;
}

void SchedulerLease::revoke() {
  stop_.request_stop();
  store_.release_lease(name_, owner_);
}

std::vector<CycleRecord> schedule_loop(const LanguageConfig& languages, const PassFn& pass,
                                       Clock& clock, SchedulerLease& lease,
                                       const ScheduleOptions& options) {
  std::vector<CycleRecord> cycles;
  while (true) {
    if (options.max_cycles && static_cast<int>(cycles.size()) >= *options.max_cycles) break;
    const Instant start = clock.now_instant();
    if (options.stop_at && start >= *options.stop_at) break;
    if (!lease.acquire()) {
      spdlog::warn("scheduler lease not held by {}, stopping", lease.owner());
      break;
    }

    CycleRecord cycle{start, start};
    bool lost = false;
    for (const auto& language : languages.languages()) {
      if (!lease.held()) {
        lost = true;
        break;
      }
      try {
        pass(language, clock.now_instant());
        ++cycle.passes_ok;
      } catch (const CancelledError&) {
        lost = true;
        break;
      } catch (const std::exception& e) {
        ++cycle.passes_failed;
        spdlog::error("{}: pass failed: {}", language, e.what());
      }
    }
    cycle.finished = clock.now_instant();
    cycles.push_back(cycle);
    if (lost) break;

    const Instant next = start + options.period;
    if (clock.now_instant() < next) {
      if (!clock.sleep_until(TimePoint{next}, lease.stop_token())) break;
    }
  }
  return cycles;
}

}  // namespace ghs
