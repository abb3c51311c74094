#include "ghs/rate_governor.hpp"

#include <algorithm>

#include "ghs/error.hpp"

namespace ghs {

void RateBudget::prune(TimePoint now) {
  while (!spent.empty() && spent.front() + window <= now) spent.pop_front();
}

bool RateBudget::has_room(TimePoint now) {
  prune(now);
  return static_cast<int>(spent.size()) < limit_per_window;
}

TimePoint RateBudget::reset_at(TimePoint now) {
  prune(now);
  if (static_cast<int>(spent.size()) < limit_per_window) return now;
  // The grant that must expire before another fits.
  return spent[spent.size() - static_cast<std::size_t>(limit_per_window)] + window;
}

RateGovernor::RateGovernor(std::vector<std::string> tokens, Clock& clock, Options options)
    : clock_(clock), options_(options) {
  if (tokens.empty()) throw UsageError("token pool needs at least one token");
  for (auto& t : tokens) {
    TokenState s;
    s.credential = std::move(t);
    s.budget.limit_per_window = options.limit_per_window;
    s.budget.window = options.window;
    tokens_.push_back(std::move(s));
  }
}

std::optional<std::size_t> RateGovernor::pick_token(TimePoint now) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto& t = tokens_[i];
    if (t.disabled) continue;
    if (t.deferred_until && *t.deferred_until > now) continue;
    if (!t.budget.has_room(now)) continue;
    // least recently used first
    if (!best || t.last_grant_seq < tokens_[*best].last_grant_seq) best = i;
  }
  return best;
}

std::optional<TimePoint> RateGovernor::earliest_availability(TimePoint now) {
  std::optional<TimePoint> earliest;
  for (auto& t : tokens_) {
    if (t.disabled) continue;
    TimePoint at = t.budget.reset_at(now);
    if (t.deferred_until) at = std::max(at, *t.deferred_until);
    if (!earliest || at < *earliest) earliest = at;
  }
  return earliest;
}

Permit RateGovernor::acquire() {
  std::unique_lock lock(mutex_);
  const std::uint64_t ticket = next_ticket_++;
  auto stop = stop_.get_token();
  for (;;) {
    if (stop.stop_requested()) throw CancelledError();
    if (ticket != serving_) {
      cv_.wait(lock, stop, [&] { return ticket == serving_; });
      continue;
    }
    const TimePoint now = clock_.now();
    if (auto idx = pick_token(now)) {
      auto& t = tokens_[*idx];
      t.budget.spent.push_back(now);
      t.last_grant_seq = ++grant_seq_;
      if (options_.keep_history) t.history.push_back(now);
      ++serving_;
      cv_.notify_all();
      return Permit{*idx, t.credential, now};
    }
    auto wake = earliest_availability(now);
    if (!wake) {
      // every token disabled; let the next waiter observe the same
      ++serving_;
      cv_.notify_all();
      throw AuthError("all tokens have been rejected by the backend");
    }
    lock.unlock();
    clock_.sleep_until(*wake, stop);
    lock.lock();
  }
}

void RateGovernor::shutdown() {
  stop_.request_stop();
  std::lock_guard lock(mutex_);
  cv_.notify_all();
}

void RateGovernor::defer(std::size_t token, TimePoint until) {
  std::lock_guard lock(mutex_);
  auto& t = tokens_.at(token);
  if (!t.deferred_until || *t.deferred_until < until) t.deferred_until = until;
  cv_.notify_all();
}

void RateGovernor::disable(std::size_t token) {
  std::lock_guard lock(mutex_);
  tokens_.at(token).disabled = true;
  cv_.notify_all();
}

void RateGovernor::observe(std::size_t token, const RateHeaders& headers) {
  if (headers.remaining > 0) return;
  defer(token, headers.reset);
}

std::vector<TimePoint> RateGovernor::history(std::size_t token) const {
  std::lock_guard lock(mutex_);
  return tokens_.at(token).history;
}

std::uint64_t RateGovernor::granted() const {
  std::lock_guard lock(mutex_);
  return grant_seq_;
}

}  // namespace ghs
