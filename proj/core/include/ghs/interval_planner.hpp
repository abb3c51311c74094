#pragma once

#include <functional>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ghs/domain.hpp"
#include "ghs/forge.hpp"

namespace ghs {

/// Freshness buffer between "now" and the end of any mining window; the
/// forge's search index lags behind newly created repositories.
inline constexpr Seconds kFreshnessBuffer = std::chrono::hours{2};

inline constexpr Seconds kMinGranularity{1};

/// Window to mine for `language`: from the forge epoch (no checkpoint) or
/// from the checkpoint, up to now minus the freshness buffer. nullopt means
/// there is nothing to mine.
std::optional<TimeInterval> seed_interval(const std::string& language,
                                          const std::optional<MiningCheckpoint>& checkpoint,
                                          Instant now);

/// [start, mid) and [mid, end) with mid = start + floor(duration / 2).
/// nullopt when the interval is shorter than two seconds.
std::optional<std::pair<TimeInterval, TimeInterval>> split(const TimeInterval& interval);

/// Pending intervals ordered oldest first, plus the leaves already done.
/// Pending and processed intervals together always partition the seed.
class IntervalQueue {
 public:
  struct Entry {
    TimeInterval interval;
    int depth = 0;
    bool operator<(const Entry& o) const { return interval.start < o.interval.start; }
  };

  explicit IntervalQueue(const TimeInterval& seed);

  bool empty() const { return pending_.empty(); }
  Entry pop();
  void push(const Entry& e) { pending_.insert(e); }
  void mark_processed(const TimeInterval& leaf) { processed_.push_back(leaf); }

  const TimeInterval& seed() const { return seed_; }
  std::vector<TimeInterval> pending() const;
  const std::vector<TimeInterval>& processed() const { return processed_; }

  /// True when pending ∪ processed covers the seed with no gaps or overlaps.
  bool partitions_seed() const;

 private:
  TimeInterval seed_;
  std::set<Entry> pending_;
  std::vector<TimeInterval> processed_;
};

struct PlannerLimits {
  Count result_cap = kResultCap;
  int page_size = kPageSize;
};

struct LeafResult {
  TimeInterval interval;
  Count count = 0;
  Count delivered = 0;
  bool truncated = false;
  int depth = 0;
};

struct EnumerationReport {
  Count leaves = 0;
  Count splits = 0;
  Count items_delivered = 0;
  Count count_requests = 0;
  Count page_requests = 0;
  int max_depth = 0;
  std::vector<TimeInterval> truncated_leaves;
};

nlohmann::json report_to_json(const EnumerationReport& r);

using CountFn = std::function<Count(const SearchCriteria&)>;
using PageFn = std::function<SearchPage(const SearchCriteria&, int page_index)>;

struct EnumerationHooks {
  std::function<void(const RepoSummary&, const TimeInterval& leaf)> on_item;
  /// Runs after every item of the leaf has been handed to on_item.
  std::function<void(const LeafResult&)> on_leaf_complete;
  /// Observes the queue between steps.
  std::function<void(const IntervalQueue&)> on_step;
};

/// Exhaustively enumerates the repositories matching `criteria` whose
/// interval field lies in `seed`. Intervals counting more than the result
/// cap are bisected; leaves are paged and delivered oldest first. A leaf at
/// minimum granularity that still exceeds the cap delivers its first
/// `result_cap` items and is reported as truncated.
EnumerationReport enumerate(const TimeInterval& seed, const SearchCriteria& criteria,
                            const CountFn& counter, const PageFn& pager,
                            const EnumerationHooks& hooks, PlannerLimits limits = {});

}  // namespace ghs
