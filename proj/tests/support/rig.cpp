#include "rig.hpp"

#include <algorithm>

#include "ghs/interval_planner.hpp"

namespace ghs::testing {

MiningRig::MiningRig(std::uint64_t seed, const PopulationParams& params,
                     std::vector<std::string> languages, std::unique_ptr<RepositoryStore> s,
                     std::set<std::string> failing_pages, OrchestratorOptions options)
    : population(generate(seed, params)),
      clock(kRigNow),
      forge(population, clock),
      governor({"token-a", "token-b"}, clock, RateGovernor::Options{30, std::chrono::seconds{60}, true}),
      client(forge, governor),
      scraper(population, std::move(failing_pages)),
      store(s ? std::move(s) : std::make_unique<SqliteStore>(":memory:")),
      orchestrator(client, scraper, *store, LanguageConfig(std::move(languages)), options) {}

std::set<std::string> MiningRig::expected_names(const std::string& language, Instant now) const {
  ParsedQuery q;
  q.language = language;
  q.field = IntervalField::Created;
  q.interval = TimeInterval::make(kForgeEpoch, now - kFreshnessBuffer);
  q.min_stars = kMinStars;
  q.include_forks = true;
  q.public_only = true;
  std::set<std::string> out;
  for (const auto* s : oracle(population, q)) out.insert(s->name);
  return out;
}

PopulationParams small_params(std::size_t size, TimeDistribution d) {
  PopulationParams p;
  p.size = size;
  p.distribution = d;
  return p;
}

std::set<std::string> stored_names(const RepositoryStore& store) {
  std::set<std::string> out;
  store.scan({}, SortSpec{Column::Name, false}, [&](const RepositoryRecord& r) {
    out.insert(r.name);
    return true;
  });
  return out;
}

std::vector<RepositoryRecord> stored_records(const RepositoryStore& store) {
  std::vector<RepositoryRecord> out;
  store.scan({}, SortSpec{Column::Name, false}, [&](const RepositoryRecord& r) {
    out.push_back(r);
    return true;
  });
  return out;
}

int max_in_window(const std::vector<TimePoint>& grants, std::chrono::milliseconds window) {
  std::vector<TimePoint> sorted = grants;
  std::sort(sorted.begin(), sorted.end());
  int best = 0;
  std::size_t lo = 0;
  for (std::size_t hi = 0; hi < sorted.size(); ++hi) {
    while (sorted[hi] - sorted[lo] >= window) ++lo;
    best = std::max(best, static_cast<int>(hi - lo + 1));
  }
  return best;
}

}  // namespace ghs::testing
