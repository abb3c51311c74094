#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ghs/domain.hpp"
#include "ghs/rate_governor.hpp"

namespace ghs {

inline constexpr int kPageSize = 100;
inline constexpr int kMaxPageIndex = 10;
inline constexpr Count kResultCap = Count{kPageSize} * kMaxPageIndex;

/// The search-API-sourced subset of a repository's characteristics.
struct RepoSummary {
  std::string name;
  std::optional<std::string> license;
  std::optional<std::string> default_branch;
  Count stars = 0;
  Count forks = 0;
  bool is_fork = false;
  Count size = 0;
  Instant created_at{};
  std::optional<Instant> pushed_at;
  std::optional<Instant> updated_at;
  std::optional<std::string> homepage;
  std::string main_language;
  bool has_wiki = false;
  bool archived = false;

  bool operator==(const RepoSummary&) const = default;
};

/// Search API item shape (`full_name`, `stargazers_count`, `license.name`, ...).
nlohmann::json summary_to_wire(const RepoSummary& s);
/// Throws ValidationError on items missing identity fields.
RepoSummary summary_from_wire(const nlohmann::json& item);

struct SearchPage {
  Count total_count = 0;
  std::vector<RepoSummary> items;
  int page_index = 1;
  std::optional<RateHeaders> rate;
};

struct CountResult {
  Count total_count = 0;
  std::optional<RateHeaders> rate;
};

/// Abstract search backend: the synthetic forge and the HTTP adapter both
/// implement this. Backends signal failures with TransientError,
/// AuthError, RateLimitedError, CapViolation or MalformedQuery.
class ForgeBackend {
 public:
  virtual ~ForgeBackend() = default;
  virtual CountResult count(const std::string& query, const std::string& credential) = 0;
  virtual SearchPage page(const std::string& query, int index, const std::string& credential) = 0;
};

// --- query grammar ---------------------------------------------------------
//
//   fork:true+is:public+language:<L>+<field>:<from>..<to>+stars:>=<n>
//
// Language values are percent-encoded (C++ → C%2B%2B). Ranges are
// half-open [from, to). Bounds render as dates when both fall on
// midnight, as full UTC timestamps otherwise. The stars qualifier is omitted
// when the threshold is 0.

std::string build_query(const SearchCriteria& criteria);

struct ParsedQuery {
  std::string language;
  IntervalField field = IntervalField::Created;
  TimeInterval interval{};
  Count min_stars = 0;
  bool include_forks = false;
  bool public_only = false;
};

/// Throws MalformedQuery.
ParsedQuery parse_query(std::string_view query);

/// The real forge reads `a..b` as inclusive. Rewrites our half-open range
/// to `a..(b - 1s)` in full timestamps. Throws MalformedQuery.
std::string to_inclusive_query(std::string_view query);

/// Inverse of to_inclusive_query; a date-only upper bound covers its whole
/// day. Throws MalformedQuery.
std::string from_inclusive_query(std::string_view query);

}  // namespace ghs
