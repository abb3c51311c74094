#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ghs/clock.hpp"
#include "ghs/forge.hpp"
#include "ghs/page_extractor.hpp"

namespace ghs {

enum class TimeDistribution { Uniform, Bursty, SingleInstant };
std::string_view to_string(TimeDistribution d);
/// Throws ValidationError.
TimeDistribution time_distribution_from(std::string_view name);

struct PopulationParams {
  std::size_t size = 1000;
  Instant start = std::chrono::sys_days{std::chrono::year{2012} / 1 / 1};
  Instant end = std::chrono::sys_days{std::chrono::year{2024} / 1 / 1};
  TimeDistribution distribution = TimeDistribution::Uniform;
  /// Bursty: share of repos that fall into one of `bursts` narrow clusters.
  int bursts = 6;
  double burst_fraction = 0.7;
  Seconds burst_width = std::chrono::hours{2};
  /// Language → weight.
  std::vector<std::pair<std::string, double>> languages{{"Java", 1.0}};
  /// Share of repos with at least 10 stars; the rest get 0..9.
  double qualifying_fraction = 0.8;
  double fork_fraction = 0.1;
  double license_fraction = 0.7;

  /// Throws ValidationError.
  void validate() const;
};

struct SyntheticRepo {
  RepoSummary summary;
  PageMetrics pages;
};

struct SyntheticPopulation {
  std::uint64_t seed = 0;
  PopulationParams params;
  std::vector<SyntheticRepo> repos;
};

/// Pure function of (seed, params).
SyntheticPopulation generate(std::uint64_t seed, const PopulationParams& params);

bool matches(const RepoSummary& s, const ParsedQuery& q);

/// Linear scan, in delivery order (created_at, then name).
std::vector<const RepoSummary*> oracle(const SyntheticPopulation& population,
                                       const ParsedQuery& q);

struct SyntheticForgeOptions {
  int page_size = kPageSize;
  int max_page_index = kMaxPageIndex;
  /// Per-credential rolling window enforced by the forge itself.
  bool enforce_rate_limit = true;
  int limit_per_window = 30;
  std::chrono::milliseconds window = std::chrono::seconds{60};
  /// Empty accepts any credential.
  std::set<std::string> valid_credentials;
  /// Seeded failure injection.
  std::uint64_t failure_seed = 0;
  double transient_failure_rate = 0.0;
  double rate_limit_failure_rate = 0.0;
  std::chrono::milliseconds latency{0};
};

struct ForgeRequest {
  std::string credential;
  TimePoint at;
  /// 0 for count requests.
  int page_index = 0;
};

/// In-process forge backend over a generated population: exact counts,
/// 100-item pages in (created_at, name) order, refusal past page 10, and
/// rolling-window rate headers.
class SyntheticForge final : public ForgeBackend {
 public:
  SyntheticForge(const SyntheticPopulation& population, Clock& clock,
                 SyntheticForgeOptions options = {});

  CountResult count(const std::string& query, const std::string& credential) override;
  SearchPage page(const std::string& query, int index, const std::string& credential) override;

  /// Every request received, accepted or not.
  std::vector<ForgeRequest> requests() const;
  std::size_t request_count() const;

  const SyntheticPopulation& population() const { return population_; }

 private:
  struct Index {
    std::vector<const RepoSummary*> by_created;
    std::vector<const RepoSummary*> by_pushed;
  };

  RateHeaders admit_request(const std::string& credential, int page_index);
  std::vector<const RepoSummary*> matching(const ParsedQuery& q) const;

  const SyntheticPopulation& population_;
  Clock& clock_;
  SyntheticForgeOptions options_;
  std::unordered_map<std::string, Index> index_;

  mutable std::mutex mutex_;
  std::mt19937_64 failure_rng_;
  std::map<std::string, std::deque<TimePoint>> windows_;
  std::vector<ForgeRequest> log_;
};

/// Serves generated page metrics directly, standing in for HTML scraping.
class SyntheticPageScraper final : public PageScraper {
 public:
  explicit SyntheticPageScraper(const SyntheticPopulation& population,
                                std::set<std::string> failing = {});
  ScrapeResult scrape(const std::string& repo_name) override;

 private:
  std::unordered_map<std::string, const PageMetrics*> pages_;
  std::set<std::string> failing_;
};

}  // namespace ghs
