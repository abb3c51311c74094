#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

#include "ghs/forge.hpp"
#include "ghs/rate_governor.hpp"

namespace ghs {

struct RetryPolicy {
  std::chrono::milliseconds base_delay = std::chrono::seconds{2};
  int max_attempts = 3;
  /// Consecutive rate-limit refusals tolerated before giving up.
  int max_rate_limited = 20;
};

/// Search-API invoker: every request goes through the governor, transient
/// failures are retried with exponential backoff, and page indices past the
/// result cap are refused before anything is sent.
class ForgeClient {
 public:
  ForgeClient(ForgeBackend& backend, RateGovernor& governor, RetryPolicy retry = {})
      : backend_(backend), governor_(governor), retry_(retry) {}

  Count count_matching(const SearchCriteria& criteria);

  /// Throws CapViolation for page_index outside [1, 10].
  SearchPage fetch_page(const SearchCriteria& criteria, int page_index);

  std::uint64_t requests_sent() const { return requests_.load(); }
  int max_page_requested() const { return max_page_.load(); }

 private:
  template <typename Call>
  auto with_retries(Call&& call);

  ForgeBackend& backend_;
  RateGovernor& governor_;
  RetryPolicy retry_;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<int> max_page_{0};
};

}  // namespace ghs
