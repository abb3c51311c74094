#include "ghs/interval_planner.hpp"

#include <algorithm>
#include <unordered_set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "ghs/error.hpp"

namespace ghs {

std::optional<TimeInterval> seed_interval(const std::string& language,
                                          const std::optional<MiningCheckpoint>& checkpoint,
                                          Instant now) {
  const Instant end = now - kFreshnessBuffer;
  Instant start = kForgeEpoch;
  if (checkpoint) {
    if (!checkpoint->language.empty() && checkpoint->language != language) {
      throw ValidationError("checkpoint", "belongs to " + checkpoint->language + ", not " + language);
    }
    start = checkpoint->last_mined_until;
  }
  if (start >= end) return std::nullopt;
  return TimeInterval{start, end};
}

std::optional<std::pair<TimeInterval, TimeInterval>> split(const TimeInterval& interval) {
  const Seconds duration = interval.duration();
  if (duration < 2 * kMinGranularity) return std::nullopt;
  const Instant mid = interval.start + duration / 2;
  return std::pair{TimeInterval{interval.start, mid}, TimeInterval{mid, interval.end}};
}

IntervalQueue::IntervalQueue(const TimeInterval& seed) : seed_(seed) {
  pending_.insert(Entry{seed, 0});
}

IntervalQueue::Entry IntervalQueue::pop() {
  auto it = pending_.begin();
  Entry e = *it;
  pending_.erase(it);
  return e;
}

std::vector<TimeInterval> IntervalQueue::pending() const {
  std::vector<TimeInterval> out;
  out.reserve(pending_.size());
  for (const auto& e : pending_) out.push_back(e.interval);
  return out;
}

bool IntervalQueue::partitions_seed() const {
  std::vector<TimeInterval> all = processed_;
  for (const auto& e : pending_) all.push_back(e.interval);
  std::sort(all.begin(), all.end(),
            [](const TimeInterval& a, const TimeInterval& b) { return a.start < b.start; });
  Instant cursor = seed_.start;
  for (const auto& i : all) {
    if (i.start != cursor || !(i.start < i.end)) return false;
    cursor = i.end;
  }
  return cursor == seed_.end;
}

nlohmann::json report_to_json(const EnumerationReport& r) {
  nlohmann::json truncated = nlohmann::json::array();
  for (const auto& t : r.truncated_leaves) {
    truncated.push_back({{"start", format_instant(t.start)}, {"end", format_instant(t.end)}});
  }
  return {{"leaves", r.leaves},
          {"splits", r.splits},
          {"items_delivered", r.items_delivered},
          {"count_requests", r.count_requests},
          {"page_requests", r.page_requests},
          {"max_depth", r.max_depth},
          {"truncated_leaves", truncated}};
}

EnumerationReport enumerate(const TimeInterval& seed, const SearchCriteria& criteria,
                            const CountFn& counter, const PageFn& pager,
                            const EnumerationHooks& hooks, PlannerLimits limits) {
  EnumerationReport report;
  IntervalQueue queue(seed);
  if (hooks.on_step) hooks.on_step(queue);

  while (!queue.empty()) {
    const IntervalQueue::Entry entry = queue.pop();
    const SearchCriteria leaf_criteria = criteria.with_interval(entry.interval);
    const Count count = counter(leaf_criteria);
    ++report.count_requests;
    report.max_depth = std::max(report.max_depth, entry.depth);

    if (count > limits.result_cap) {
      if (auto halves = split(entry.interval)) {
        queue.push({halves->first, entry.depth + 1});
        queue.push({halves->second, entry.depth + 1});
        ++report.splits;
        if (hooks.on_step) hooks.on_step(queue);
        continue;
      }
    }

    LeafResult leaf{entry.interval, count, 0, count > limits.result_cap, entry.depth};
    if (leaf.truncated) {
      spdlog::warn("{} matches {} repositories at minimum granularity; only the first {} "
                   "are retrievable",
                   to_string(entry.interval), count, limits.result_cap);
      report.truncated_leaves.push_back(entry.interval);
    }

    const Count wanted = std::min(count, limits.result_cap);
    std::unordered_set<std::string> delivered_names;
    for (int page = 1; leaf.delivered < wanted; ++page) {
      SearchPage result = pager(leaf_criteria, page);
      ++report.page_requests;
      for (const auto& item : result.items) {
        if (leaf.delivered >= wanted) break;
        if (!delivered_names.insert(item.name).second) continue;
        if (hooks.on_item) hooks.on_item(item, entry.interval);
        ++leaf.delivered;
      }
      // short page: the backend has nothing further for this interval
      if (static_cast<int>(result.items.size()) < limits.page_size) break;
      if (page * limits.page_size >= limits.result_cap) break;
    }

    report.items_delivered += leaf.delivered;
    ++report.leaves;
    queue.mark_processed(entry.interval);
    if (hooks.on_leaf_complete) hooks.on_leaf_complete(leaf);
    if (hooks.on_step) hooks.on_step(queue);
  }
  return report;
}

}  // namespace ghs
