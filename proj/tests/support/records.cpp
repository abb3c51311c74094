#include "records.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace ghs::testing {

namespace {

using namespace std::chrono;

constexpr std::array<const char*, 6> kOwners{"apache", "google", "Mozilla", "acme", "octo", "rust-lang"};
constexpr std::array<const char*, 8> kWords{"commons", "Lang", "parser", "http", "core", "tools", "engine", "kit"};
constexpr std::array<const char*, 5> kLicenses{"MIT License", "Apache License 2.0", "GPL-3.0", "BSD-3-Clause", "mit license"};
constexpr std::array<const char*, 5> kLanguages{"Java", "Python", "C++", "JavaScript", "Kotlin"};

const Instant kFrom = sys_days{year{2008} / 1 / 1};

template <typename T>
T pick(std::mt19937_64& rng, const T* items, std::size_t n) {
  return items[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)];
}

bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

Count small_count(std::mt19937_64& rng, Count hi) {
  return std::uniform_int_distribution<Count>(0, hi)(rng);
}

Instant some_instant(std::mt19937_64& rng) {
  return kFrom + Seconds{std::uniform_int_distribution<std::int64_t>(0, 16LL * 365 * 86400)(rng)};
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::optional<Count> maybe(std::mt19937_64& rng, Count hi, double absent = 0.15) {
  if (chance(rng, absent)) return std::nullopt;
  return small_count(rng, hi);
}

bool in_range(const std::optional<Count>& v, const CountRange& r) {
  if (!r.active()) return true;
  if (!v) return false;
  return (!r.min || *v >= *r.min) && (!r.max || *v <= *r.max);
}

bool in_range(const std::optional<Instant>& v, const InstantRange& r) {
  if (!r.active()) return true;
  if (!v) return false;
  return (!r.min || *v >= *r.min) && (!r.max || *v <= *r.max);
}

CountRange random_count_range(std::mt19937_64& rng, Count hi) {
  CountRange r;
  if (chance(rng, 0.5)) r.min = small_count(rng, hi);
  if (chance(rng, 0.5)) r.max = small_count(rng, hi);
  if (r.min && r.max && *r.min > *r.max) std::swap(r.min, r.max);
  return r;
}

}  // namespace

RepositoryRecord random_record(std::mt19937_64& rng, std::size_t index) {
  RepositoryRecord r;
  r.name = std::string{pick(rng, kOwners.data(), kOwners.size())} + "/" +
           pick(rng, kWords.data(), kWords.size()) + "-" + std::to_string(index);
  r.commits = maybe(rng, 5000);
  if (!chance(rng, 0.2)) {
    std::string sha;
    for (int i = 0; i < 40; ++i) sha.push_back("0123456789abcdef"[small_count(rng, 15)]);
    r.last_commit_sha = sha;
  }
  if (!chance(rng, 0.2)) r.last_commit = some_instant(rng);
  if (!chance(rng, 0.3)) r.license = pick(rng, kLicenses.data(), kLicenses.size());
  r.branches = maybe(rng, 60);
  if (!chance(rng, 0.1)) r.default_branch = chance(rng, 0.5) ? "main" : "master";
  r.contributors = maybe(rng, 400);
  r.releases = maybe(rng, 80);
  r.watchers = maybe(rng, 900);
  r.stars = maybe(rng, 20000, 0.05);
  r.forks = maybe(rng, 3000, 0.05);
  if (!chance(rng, 0.05)) r.is_fork_project = chance(rng, 0.2);
  r.size = maybe(rng, 500000, 0.05);
  r.created_at = some_instant(rng);
  if (!chance(rng, 0.1)) r.pushed_at = r.created_at + Seconds{small_count(rng, 86400 * 400)};
  if (!chance(rng, 0.1)) r.updated_at = r.created_at + Seconds{small_count(rng, 86400 * 400)};
  if (chance(rng, 0.3)) r.homepage = "https://" + std::to_string(index) + ".example.org";
  r.main_language = pick(rng, kLanguages.data(), kLanguages.size());
  if (!chance(rng, 0.15)) {
    r.total_issues = small_count(rng, 800);
    if (!chance(rng, 0.1)) r.open_issues = small_count(rng, *r.total_issues);
  }
  if (!chance(rng, 0.15)) {
    r.total_pull_requests = small_count(rng, 800);
    if (!chance(rng, 0.1)) r.open_pull_requests = small_count(rng, *r.total_pull_requests);
  }
  if (!chance(rng, 0.05)) r.has_wiki = chance(rng, 0.6);
  if (!chance(rng, 0.05)) r.archived = chance(rng, 0.1);
  r.last_crawled_at = sys_days{year{2024} / 3 / 1};
  return r;
}

std::vector<RepositoryRecord> random_records(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::vector<RepositoryRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_record(rng, i));
  return out;
}

RepoFilter random_filter(std::mt19937_64& rng) {
  RepoFilter f;
  if (chance(rng, 0.3)) {
    std::string w = chance(rng, 0.5) ? pick(rng, kOwners.data(), kOwners.size())
                                     : pick(rng, kWords.data(), kWords.size());
    // mixed case on purpose; matching ignores case
    if (chance(rng, 0.5)) w = lower(w);
    else if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    f.name_contains = w.substr(0, 1 + small_count(rng, static_cast<Count>(w.size()) - 1));
  }
  if (chance(rng, 0.2)) f.license_equals = pick(rng, kLicenses.data(), kLicenses.size());
  if (chance(rng, 0.3)) f.language_equals = lower(pick(rng, kLanguages.data(), kLanguages.size()));
  if (chance(rng, 0.3)) f.commits = random_count_range(rng, 5000);
  if (chance(rng, 0.2)) f.contributors = random_count_range(rng, 400);
  if (chance(rng, 0.2)) f.issues = random_count_range(rng, 800);
  if (chance(rng, 0.2)) f.pulls = random_count_range(rng, 800);
  if (chance(rng, 0.15)) f.branches = random_count_range(rng, 60);
  if (chance(rng, 0.15)) f.releases = random_count_range(rng, 80);
  if (chance(rng, 0.3)) f.stars = random_count_range(rng, 20000);
  if (chance(rng, 0.15)) f.watchers = random_count_range(rng, 900);
  if (chance(rng, 0.15)) f.forks = random_count_range(rng, 3000);
  auto instant_range = [&] {
    InstantRange r;
    if (chance(rng, 0.6)) r.min = some_instant(rng);
    if (chance(rng, 0.6)) r.max = some_instant(rng);
    if (r.min && r.max && *r.min > *r.max) std::swap(r.min, r.max);
    return r;
  };
  if (chance(rng, 0.25)) f.created_between = instant_range();
  if (chance(rng, 0.2)) f.last_commit_between = instant_range();
  f.exclude_forks = chance(rng, 0.2);
  f.only_with_license = chance(rng, 0.2);
  f.only_with_open_issues = chance(rng, 0.2);
  f.exclude_archived = chance(rng, 0.2);
  return f;
}

bool oracle_matches(const RepoFilter& f, const RepositoryRecord& r) {
  if (f.name_contains && lower(r.name).find(lower(*f.name_contains)) == std::string::npos) return false;
  if (f.license_equals && (!r.license || lower(*r.license) != lower(*f.license_equals))) return false;
  if (f.language_equals && lower(r.main_language) != lower(*f.language_equals)) return false;
  if (!in_range(r.commits, f.commits)) return false;
  if (!in_range(r.contributors, f.contributors)) return false;
  if (!in_range(r.total_issues, f.issues)) return false;
  if (!in_range(r.total_pull_requests, f.pulls)) return false;
  if (!in_range(r.branches, f.branches)) return false;
  if (!in_range(r.releases, f.releases)) return false;
  if (!in_range(r.stars, f.stars)) return false;
  if (!in_range(r.watchers, f.watchers)) return false;
  if (!in_range(r.forks, f.forks)) return false;
  if (!in_range(std::optional<Instant>{r.created_at}, f.created_between)) return false;
  if (!in_range(r.last_commit, f.last_commit_between)) return false;
  if (f.exclude_forks && r.is_fork_project.value_or(false)) return false;
  if (f.only_with_license && !r.license) return false;
  if (f.only_with_open_issues && !(r.open_issues && *r.open_issues > 0)) return false;
  if (f.exclude_archived && r.archived.value_or(false)) return false;
  return true;
}

bool oracle_before(const RepositoryRecord& a, const RepositoryRecord& b, SortSpec sort) {
  if (sort.column == Column::Name) return sort.descending ? a.name > b.name : a.name < b.name;
  FieldValue va = get_field(a, sort.column);
  FieldValue vb = get_field(b, sort.column);
  bool absent_a = std::holds_alternative<std::monostate>(va);
  bool absent_b = std::holds_alternative<std::monostate>(vb);
  if (absent_a != absent_b) return absent_b;
  if (!absent_a && va != vb) return sort.descending ? vb < va : va < vb;
  return a.name < b.name;
}

std::vector<RepositoryRecord> oracle_query(const std::vector<RepositoryRecord>& all,
                                           const RepoFilter& f, SortSpec sort) {
  std::vector<RepositoryRecord> out;
  for (const auto& r : all) {
    if (oracle_matches(f, r)) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return oracle_before(a, b, sort); });
  return out;
}

std::vector<std::string> names_of(const std::vector<RepositoryRecord>& rows) {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.name);
  return out;
}

RepositoryRecord sample_record(const std::string& name) {
  RepositoryRecord r;
  r.name = name;
  r.commits = 1234;
  r.last_commit_sha = "9fceb02d0ae598e95dc970b74767f19372d61af8";
  r.last_commit = sys_days{year{2023} / 5 / 1} + hours{12} + minutes{34} + seconds{56};
  r.license = "Apache License 2.0";
  r.branches = 12;
  r.default_branch = "master";
  r.contributors = 45;
  r.releases = 7;
  r.watchers = 120;
  r.stars = 2300;
  r.forks = 310;
  r.is_fork_project = false;
  r.size = 10240;
  r.created_at = sys_days{year{2012} / 3 / 15};
  r.pushed_at = sys_days{year{2023} / 5 / 1} + hours{12};
  r.updated_at = sys_days{year{2023} / 5 / 2};
  r.homepage = "https://commons.apache.org/lang";
  r.main_language = "Java";
  r.total_issues = 1089;
  r.open_issues = 57;
  r.total_pull_requests = 2060;
  r.open_pull_requests = 12;
  r.has_wiki = true;
  r.archived = false;
  return r;
}

std::vector<RepositoryRecord> export_seed_records() {
  RepositoryRecord widgets;
  widgets.name = "acme/widgets";
  widgets.license = "BSD 3-Clause \"New\" or \"Revised\" License";
  widgets.default_branch = "main";
  widgets.watchers = 0;
  widgets.stars = 10;
  widgets.forks = 0;
  widgets.is_fork_project = true;
  widgets.size = 0;
  widgets.created_at = sys_days{year{2019} / 7 / 4} + hours{8} + minutes{9} + seconds{10};
  widgets.homepage = "https://acme.example/a,b";
  widgets.main_language = "C++";
  widgets.total_issues = 0;
  widgets.open_issues = 0;
  widgets.has_wiki = false;
  widgets.archived = true;

  RepositoryRecord kit;
  kit.name = "zeta/tool.kit";
  kit.commits = 98765;
  kit.last_commit_sha = "0123456789abcdef0123456789abcdef01234567";
  kit.last_commit = sys_days{year{2024} / 2 / 29} + hours{23} + minutes{59} + seconds{59};
  kit.branches = 1;
  kit.default_branch = "trunk";
  kit.contributors = 5000;
  kit.releases = 0;
  kit.watchers = 3;
  kit.stars = 1500000;
  kit.forks = 12;
  kit.is_fork_project = false;
  kit.size = 1;
  kit.created_at = sys_days{year{2008} / 2 / 8};
  kit.pushed_at = kit.last_commit;
  kit.updated_at = sys_days{year{2024} / 3 / 1};
  kit.main_language = "Objective-C";
  kit.total_issues = 12;
  kit.open_issues = 12;
  kit.total_pull_requests = 0;
  kit.open_pull_requests = 0;
  kit.has_wiki = true;
  kit.archived = false;

  return {sample_record(), widgets, kit};
}

}  // namespace ghs::testing
