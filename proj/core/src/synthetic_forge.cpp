#include "ghs/synthetic_forge.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ghs/error.hpp"

namespace ghs {

namespace {

// Distribution helpers on raw engine output so a seed generates the same
// population with any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::int64_t below(std::int64_t n) {
    return n <= 0 ? 0 : static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(n));
  }
  bool chance(double p) { return unit() < p; }
  /// Pareto-like tail starting at `floor`.
  std::int64_t heavy(std::int64_t floor, double alpha, std::int64_t cap) {
    double u = std::max(unit(), 1e-12);
    double v = static_cast<double>(floor) * std::pow(u, -1.0 / alpha);
    return std::min<std::int64_t>(cap, static_cast<std::int64_t>(v));
  }

 private:
  std::mt19937_64 engine_;
};

constexpr std::array<const char*, 6> kLicenses{"MIT License", "Apache License 2.0",
                                               "GNU General Public License v3.0",
                                               "BSD 3-Clause \"New\" or \"Revised\" License",
                                               "Mozilla Public License 2.0", "The Unlicense"};

std::string hex_sha(Rng& rng) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(40, '0');
  for (auto& c : out) c = kHex[rng.below(16)];
  return out;
}

bool delivery_order(const RepoSummary* a, const RepoSummary* b) {
  if (a->created_at != b->created_at) return a->created_at < b->created_at;
  return a->name < b->name;
}

Instant field_value(const RepoSummary& s, IntervalField f) {
  if (f == IntervalField::Created) return s.created_at;
  return s.pushed_at.value_or(s.created_at);
}

}  // namespace

std::string_view to_string(TimeDistribution d) {
  switch (d) {
    case TimeDistribution::Uniform: return "uniform";
    case TimeDistribution::Bursty: return "bursty";
    case TimeDistribution::SingleInstant: return "single";
  }
  return "uniform";
}

TimeDistribution time_distribution_from(std::string_view name) {
  if (name == "uniform") return TimeDistribution::Uniform;
  if (name == "bursty") return TimeDistribution::Bursty;
  if (name == "single") return TimeDistribution::SingleInstant;
  throw ValidationError("distribution", "expected uniform, bursty or single");
}

void PopulationParams::validate() const {
  if (!(start < end) && distribution != TimeDistribution::SingleInstant) {
    throw ValidationError("end", "must be after start");
  }
  if (start < kForgeEpoch) throw ValidationError("start", "precedes the forge epoch");
  if (languages.empty()) throw ValidationError("languages", "at least one language required");
  double total = 0;
  for (const auto& [name, weight] : languages) {
    if (name.empty() || weight < 0) throw ValidationError("languages", "bad language weight");
    total += weight;
  }
  if (total <= 0) throw ValidationError("languages", "weights sum to zero");
  auto fraction = [](const char* field, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(field, "must be within [0, 1]");
  };
  fraction("qualifying_fraction", qualifying_fraction);
  fraction("fork_fraction", fork_fraction);
  fraction("license_fraction", license_fraction);
  fraction("burst_fraction", burst_fraction);
  if (bursts < 1) throw ValidationError("bursts", "must be positive");
  if (burst_width <= Seconds{0}) throw ValidationError("burst_width", "must be positive");
}

SyntheticPopulation generate(std::uint64_t seed, const PopulationParams& params) {
  params.validate();
  SyntheticPopulation pop;
  pop.seed = seed;
  pop.params = params;
  pop.repos.reserve(params.size);

  Rng rng(seed);
  const std::int64_t span = (params.end - params.start).count();
  std::vector<Instant> centers;
  for (int b = 0; b < params.bursts; ++b) {
    centers.push_back(params.start + Seconds{rng.below(std::max<std::int64_t>(span, 1))});
  }
  double total_weight = 0;
  for (const auto& [_, w] : params.languages) total_weight += w;

  for (std::size_t i = 0; i < params.size; ++i) {
    SyntheticRepo repo;
    RepoSummary& s = repo.summary;
    s.name = "owner" + std::to_string(rng.below(5000)) + "/repo-" + std::to_string(i);

    double pick = rng.unit() * total_weight;
    s.main_language = params.languages.back().first;
    for (const auto& [name, w] : params.languages) {
      if (pick < w) {
        s.main_language = name;
        break;
      }
      pick -= w;
    }

    switch (params.distribution) {
      case TimeDistribution::Uniform:
        s.created_at = params.start + Seconds{rng.below(span)};
        break;
      case TimeDistribution::Bursty:
        if (rng.chance(params.burst_fraction)) {
          Instant c = centers[static_cast<std::size_t>(rng.below(params.bursts))];
          s.created_at = std::min(params.end - Seconds{1},
                                  c + Seconds{rng.below(params.burst_width.count())});
        } else {
          s.created_at = params.start + Seconds{rng.below(span)};
        }
        break;
      case TimeDistribution::SingleInstant:
        s.created_at = params.start;
        break;
    }
    const std::int64_t tail = std::max<std::int64_t>((params.end - s.created_at).count(), 0);
    s.pushed_at = s.created_at + Seconds{rng.below(tail)};
    s.updated_at = *s.pushed_at + Seconds{rng.below(3600)};

    s.stars = rng.chance(params.qualifying_fraction) ? rng.heavy(kMinStars, 1.2, 400000)
                                                      : rng.below(kMinStars);
    s.forks = rng.below(s.stars / 4 + 1);
    s.is_fork = rng.chance(params.fork_fraction);
    s.size = rng.heavy(16, 0.9, 4000000);
    if (rng.chance(params.license_fraction)) {
      s.license = kLicenses[static_cast<std::size_t>(rng.below(kLicenses.size()))];
    }
    s.default_branch = rng.chance(0.6) ? "main" : "master";
    if (rng.chance(0.3)) s.homepage = "https://" + s.name.substr(0, s.name.find('/')) + ".example.org";
    s.has_wiki = rng.chance(0.5);
    s.archived = rng.chance(0.03);

    PageMetrics& p = repo.pages;
    p.commits = rng.heavy(1, 0.8, 2000000);
    p.last_commit_sha = hex_sha(rng);
    p.last_commit = *s.pushed_at;
    p.branches = 1 + rng.below(40);
    p.contributors = rng.heavy(1, 1.1, 5000);
    p.releases = rng.below(120);
    p.watchers = rng.below(s.stars / 8 + 2);
    p.total_issues = rng.below(3000);
    p.open_issues = rng.below(*p.total_issues + 1);
    p.total_pull_requests = rng.below(2000);
    p.open_pull_requests = rng.below(*p.total_pull_requests + 1);
    for (Column c : page_columns()) p.provenance[c] = Provenance::Primary;

    pop.repos.push_back(std::move(repo));
  }
  return pop;
}

bool matches(const RepoSummary& s, const ParsedQuery& q) {
  if (s.main_language != q.language) return false;
  if (!q.include_forks && s.is_fork) return false;
  if (s.stars < q.min_stars) return false;
  return q.interval.contains(field_value(s, q.field));
}

std::vector<const RepoSummary*> oracle(const SyntheticPopulation& population,
                                       const ParsedQuery& q) {
  std::vector<const RepoSummary*> out;
  for (const auto& r : population.repos) {
    if (matches(r.summary, q)) out.push_back(&r.summary);
  }
  std::sort(out.begin(), out.end(), delivery_order);
  return out;
}

SyntheticForge::SyntheticForge(const SyntheticPopulation& population, Clock& clock,
                               SyntheticForgeOptions options)
    : population_(population),
      clock_(clock),
      options_(std::move(options)),
      failure_rng_(options_.failure_seed) {
  for (const auto& r : population_.repos) {
    auto& idx = index_[r.summary.main_language];
    idx.by_created.push_back(&r.summary);
    idx.by_pushed.push_back(&r.summary);
  }
  for (auto& [_, idx] : index_) {
    std::sort(idx.by_created.begin(), idx.by_created.end(), delivery_order);
    std::sort(idx.by_pushed.begin(), idx.by_pushed.end(),
              [](const RepoSummary* a, const RepoSummary* b) {
                return field_value(*a, IntervalField::Pushed) <
                       field_value(*b, IntervalField::Pushed);
              });
  }
}

std::vector<const RepoSummary*> SyntheticForge::matching(const ParsedQuery& q) const {
  std::vector<const RepoSummary*> out;
  auto it = index_.find(q.language);
  if (it == index_.end()) return out;
  const auto& list = q.field == IntervalField::Created ? it->second.by_created
                                                       : it->second.by_pushed;
  auto first = std::lower_bound(list.begin(), list.end(), q.interval.start,
                                [&](const RepoSummary* s, Instant t) {
                                  return field_value(*s, q.field) < t;
                                });
  for (auto i = first; i != list.end() && field_value(**i, q.field) < q.interval.end; ++i) {
    if (matches(**i, q)) out.push_back(*i);
  }
  if (q.field != IntervalField::Created) std::sort(out.begin(), out.end(), delivery_order);
  return out;
}

RateHeaders SyntheticForge::admit_request(const std::string& credential, int page_index) {
  if (options_.latency.count() > 0) clock_.sleep_for(options_.latency);
  std::lock_guard lock(mutex_);
  const TimePoint now = clock_.now();
  log_.push_back(ForgeRequest{credential, now, page_index});

  if (!options_.valid_credentials.empty() && !options_.valid_credentials.contains(credential)) {
    throw AuthError("bad credentials");
  }
  auto& window = windows_[credential];
  while (!window.empty() && window.front() + options_.window <= now) window.pop_front();

  if (options_.transient_failure_rate > 0 || options_.rate_limit_failure_rate > 0) {
    double draw = static_cast<double>(failure_rng_() >> 11) * 0x1.0p-53;
    if (draw < options_.transient_failure_rate) throw TransientError("injected server error");
    draw -= options_.transient_failure_rate;
    if (draw < options_.rate_limit_failure_rate) {
      throw RateLimitedError(now + options_.window, "injected rate-limit refusal");
    }
  }
  if (options_.enforce_rate_limit) {
    if (static_cast<int>(window.size()) >= options_.limit_per_window) {
      throw RateLimitedError(window.front() + options_.window,
                             "rate limit exceeded for this credential");
    }
  }
  window.push_back(now);
  RateHeaders h;
  h.limit = options_.limit_per_window;
  h.remaining = std::max<std::int64_t>(0, options_.limit_per_window - static_cast<int>(window.size()));
  h.reset = window.front() + options_.window;
  return h;
}

CountResult SyntheticForge::count(const std::string& query, const std::string& credential) {
  RateHeaders h = admit_request(credential, 0);
  ParsedQuery q = parse_query(query);
  return CountResult{static_cast<Count>(matching(q).size()), h};
}

SearchPage SyntheticForge::page(const std::string& query, int index, const std::string& credential) {
  RateHeaders h = admit_request(credential, index);
  ParsedQuery q = parse_query(query);
  if (index < 1 || index > options_.max_page_index) {
    throw CapViolation("only the first " +
                       std::to_string(options_.max_page_index * options_.page_size) +
                       " search results are available");
  }
  auto all = matching(q);
  SearchPage out;
  out.total_count = static_cast<Count>(all.size());
  out.page_index = index;
  out.rate = h;
  const std::size_t begin = static_cast<std::size_t>(index - 1) * options_.page_size;
  for (std::size_t i = begin; i < all.size() && i < begin + options_.page_size; ++i) {
    out.items.push_back(*all[i]);
  }
  return out;
}

std::vector<ForgeRequest> SyntheticForge::requests() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::size_t SyntheticForge::request_count() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

SyntheticPageScraper::SyntheticPageScraper(const SyntheticPopulation& population,
                                           std::set<std::string> failing)
    : failing_(std::move(failing)) {
  for (const auto& r : population.repos) pages_[r.summary.name] = &r.pages;
}

ScrapeResult SyntheticPageScraper::scrape(const std::string& repo_name) {
  ScrapeResult out;
  auto it = pages_.find(repo_name);
  if (it == pages_.end() || failing_.contains(repo_name)) {
    out.page_error = true;
    out.error = "no pages for " + repo_name;
    return out;
  }
  out.metrics = *it->second;
  return out;
}

}  // namespace ghs
