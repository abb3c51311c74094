#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "ghs/clock.hpp"

namespace ghs {

/// Rolling-window request budget of one credential.
struct RateBudget {
  int limit_per_window = 30;
  std::chrono::milliseconds window = std::chrono::seconds{60};
  std::deque<TimePoint> spent;  // grants inside the current window, oldest first

  void prune(TimePoint now);
  bool has_room(TimePoint now);
  /// Earliest instant at which one more request fits.
  TimePoint reset_at(TimePoint now);
};

/// Server-reported quota, as carried by X-RateLimit-* headers.
struct RateHeaders {
  std::int64_t limit = 0;
  std::int64_t remaining = 0;
  TimePoint reset{};
};

struct Permit {
  std::size_t token = 0;
  std::string credential;
  TimePoint granted_at{};
};

/// Hands out search-request permits across a pool of tokens. Each token is
/// held to `limit_per_window` grants in any rolling window. Callers are
/// served strictly in arrival order; the head of the line sleeps on the
/// injected clock until the earliest token frees up.
class RateGovernor {
 public:
  struct Options {
    int limit_per_window = 30;
    std::chrono::milliseconds window = std::chrono::seconds{60};
    bool keep_history = false;
  };

  /// Throws UsageError when `tokens` is empty.
  RateGovernor(std::vector<std::string> tokens, Clock& clock, Options options);
  RateGovernor(std::vector<std::string> tokens, Clock& clock)
      : RateGovernor(std::move(tokens), clock, Options{}) {}

  RateGovernor(const RateGovernor&) = delete;
  RateGovernor& operator=(const RateGovernor&) = delete;

  /// Blocks until a permit is available. Throws CancelledError after
  /// shutdown() and AuthError when every token has been disabled.
  Permit acquire();

  void shutdown();

  /// Retry-after hook: the token is not used again before `until`.
  void defer(std::size_t token, TimePoint until);

  /// The backend rejected this token's credential.
  void disable(std::size_t token);

  /// Feeds server-reported quota back; an exhausted quota defers the token.
  void observe(std::size_t token, const RateHeaders& headers);

  std::size_t token_count() const { return tokens_.size(); }
  Clock& clock() { return clock_; }

  /// Every grant ever made to `token` (requires Options::keep_history).
  std::vector<TimePoint> history(std::size_t token) const;
  std::uint64_t granted() const;

 private:
  struct TokenState {
    std::string credential;
    RateBudget budget;
    std::optional<TimePoint> deferred_until;
    bool disabled = false;
    std::uint64_t last_grant_seq = 0;
    std::vector<TimePoint> history;
  };

  std::optional<std::size_t> pick_token(TimePoint now);
  std::optional<TimePoint> earliest_availability(TimePoint now);

  std::vector<TokenState> tokens_;
  Clock& clock_;
  Options options_;

  mutable std::mutex mutex_;
  std::condition_variable_any cv_;
  std::stop_source stop_;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t serving_ = 0;
  std::uint64_t grant_seq_ = 0;
};

}  // namespace ghs
