#include "ghs/forge_client.hpp"

#include <spdlog/spdlog.h>

#include "ghs/error.hpp"

namespace ghs {

template <typename Call>
auto ForgeClient::with_retries(Call&& call) {
  int transient_failures = 0;
  int rate_limited = 0;
  for (;;) {
    Permit permit = governor_.acquire();
    ++requests_;
    try {
      auto result = call(permit.credential);
      if (result.rate) governor_.observe(permit.token, *result.rate);
      return result;
    } catch (const TransientError& e) {
      if (++transient_failures >= retry_.max_attempts) throw;
      auto delay = retry_.base_delay * (1 << (transient_failures - 1));
      spdlog::warn("search request failed ({}), retrying in {} ms", e.what(), delay.count());
      governor_.clock().sleep_for(delay);
    } catch (const RateLimitedError& e) {
      if (++rate_limited > retry_.max_rate_limited) throw;
      auto until = e.retry_at().value_or(permit.granted_at + std::chrono::seconds{60});
      spdlog::info("token {} rate limited until {}", permit.token,
                   format_instant(to_instant(until)));
      governor_.defer(permit.token, until);
    } catch (const AuthError& e) {
      spdlog::error("token {} rejected: {}", permit.token, e.what());
      governor_.disable(permit.token);
      // acquire() throws once no usable token remains
    }
  }
}

Count ForgeClient::count_matching(const SearchCriteria& criteria) {
  const std::string query = build_query(criteria);
  return with_retries([&](const std::string& credential) {
           return backend_.count(query, credential);
         })
      .total_count;
}

SearchPage ForgeClient::fetch_page(const SearchCriteria& criteria, int page_index) {
  if (page_index < 1 || page_index > kMaxPageIndex) {
    throw CapViolation("page index " + std::to_string(page_index) + " outside [1, " +
                       std::to_string(kMaxPageIndex) + "]");
  }
  const std::string query = build_query(criteria);
  int seen = max_page_.load();
  while (page_index > seen && !max_page_.compare_exchange_weak(seen, page_index)) {
  }
  return with_retries([&](const std::string& credential) {
    return backend_.page(query, page_index, credential);
  });
}

}  // namespace ghs
