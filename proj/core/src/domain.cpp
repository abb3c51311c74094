#include "ghs/domain.hpp"

#include <algorithm>
#include <limits>

#include <nlohmann/json.hpp>

#include "ghs/error.hpp"

namespace ghs {

using nlohmann::json;

namespace {

constexpr std::array<ColumnInfo, kColumnCount> kColumns{{
    {Column::Name, "name", ColumnKind::Text, MiningSource::SearchApi},
    {Column::Commits, "commits", ColumnKind::Count, MiningSource::LandingPage},
    {Column::LastCommitSha, "last_commits_sha", ColumnKind::Text, MiningSource::LandingPage},
    {Column::LastCommit, "last_commits", ColumnKind::Time, MiningSource::LandingPage},
    {Column::License, "license", ColumnKind::Text, MiningSource::SearchApi},
    {Column::Branches, "branches", ColumnKind::Count, MiningSource::LandingPage},
    {Column::DefaultBranch, "default_branch", ColumnKind::Text, MiningSource::SearchApi},
    {Column::Contributors, "contributors", ColumnKind::Count, MiningSource::LandingPage},
    {Column::Releases, "releases", ColumnKind::Count, MiningSource::LandingPage},
    {Column::Watchers, "watchers", ColumnKind::Count, MiningSource::LandingPage},
    {Column::Stars, "stars", ColumnKind::Count, MiningSource::SearchApi},
    {Column::Forks, "forks", ColumnKind::Count, MiningSource::SearchApi},
    {Column::IsForkProject, "is_fork_project", ColumnKind::Flag, MiningSource::SearchApi},
    {Column::Size, "size", ColumnKind::Count, MiningSource::SearchApi},
    {Column::CreatedAt, "created_at", ColumnKind::Time, MiningSource::SearchApi},
    {Column::PushedAt, "pushed_at", ColumnKind::Time, MiningSource::SearchApi},
    {Column::UpdatedAt, "updated_at", ColumnKind::Time, MiningSource::SearchApi},
    {Column::Homepage, "homepage", ColumnKind::Text, MiningSource::SearchApi},
    {Column::MainLanguage, "main_language", ColumnKind::Text, MiningSource::SearchApi},
    {Column::TotalIssues, "total_issues", ColumnKind::Count, MiningSource::IssuesPage},
    {Column::OpenIssues, "open_issues", ColumnKind::Count, MiningSource::IssuesPage},
    {Column::TotalPullRequests, "total_pull_requests", ColumnKind::Count, MiningSource::PullsPage},
    {Column::OpenPullRequests, "open_pull_requests", ColumnKind::Count, MiningSource::PullsPage},
    {Column::HasWiki, "has_wiki", ColumnKind::Flag, MiningSource::SearchApi},
    {Column::Archived, "archived", ColumnKind::Flag, MiningSource::SearchApi},
}};

template <typename T>
FieldValue wrap(const std::optional<T>& v) {
  if (!v) return std::monostate{};
  return *v;
}

template <typename T>
void unwrap(std::optional<T>& dst, FieldValue v) {
  if (std::holds_alternative<std::monostate>(v)) {
    dst.reset();
  } else {
    dst = std::get<T>(std::move(v));
  }
}

bool is_lower_hex(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
}

FieldValue read_raw(const json& raw, const ColumnInfo& info) {
  auto it = raw.find(info.name);
  if (it == raw.end() || it->is_null()) return std::monostate{};
  const json& v = *it;
  const std::string field{info.name};
  switch (info.kind) {
    case ColumnKind::Count: {
      if (v.is_number_unsigned()) {
        auto u = v.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(std::numeric_limits<Count>::max())) {
          throw ValidationError(field, "count out of range");
        }
        return static_cast<Count>(u);
      }
      if (v.is_number_integer()) {
        auto n = v.get<std::int64_t>();
        if (n < 0) throw ValidationError(field, "count must be non-negative");
        return n;
      }
      throw ValidationError(field, "expected an integer");
    }
    case ColumnKind::Text: {
      if (!v.is_string()) throw ValidationError(field, "expected a string");
      auto s = v.get<std::string>();
      if (s.empty()) return std::monostate{};
      return s;
    }
    case ColumnKind::Time: {
      if (!v.is_string()) throw ValidationError(field, "expected an ISO-8601 string");
      auto t = parse_instant(v.get<std::string>());
      if (!t) throw ValidationError(field, "malformed instant");
      return *t;
    }
    case ColumnKind::Flag:
      if (!v.is_boolean()) throw ValidationError(field, "expected a boolean");
      return v.get<bool>();
  }
  return std::monostate{};
}

}  // namespace

const std::array<ColumnInfo, kColumnCount>& columns() { return kColumns; }

const ColumnInfo& column_info(Column c) {
  return kColumns[static_cast<std::size_t>(c)];
}

std::optional<Column> column_by_name(std::string_view name) {
  for (const auto& info : kColumns) {
    if (info.name == name) return info.column;
  }
  return std::nullopt;
}

FieldValue get_field(const RepositoryRecord& r, Column c) {
  switch (c) {
    case Column::Name: return r.name;
    case Column::Commits: return wrap(r.commits);
    case Column::LastCommitSha: return wrap(r.last_commit_sha);
    case Column::LastCommit: return wrap(r.last_commit);
    case Column::License: return wrap(r.license);
    case Column::Branches: return wrap(r.branches);
    case Column::DefaultBranch: return wrap(r.default_branch);
    case Column::Contributors: return wrap(r.contributors);
    case Column::Releases: return wrap(r.releases);
    case Column::Watchers: return wrap(r.watchers);
    case Column::Stars: return wrap(r.stars);
    case Column::Forks: return wrap(r.forks);
    case Column::IsForkProject: return wrap(r.is_fork_project);
    case Column::Size: return wrap(r.size);
    case Column::CreatedAt: return r.created_at;
    case Column::PushedAt: return wrap(r.pushed_at);
    case Column::UpdatedAt: return wrap(r.updated_at);
    case Column::Homepage: return wrap(r.homepage);
    case Column::MainLanguage: return r.main_language;
    case Column::TotalIssues: return wrap(r.total_issues);
    case Column::OpenIssues: return wrap(r.open_issues);
    case Column::TotalPullRequests: return wrap(r.total_pull_requests);
    case Column::OpenPullRequests: return wrap(r.open_pull_requests);
    case Column::HasWiki: return wrap(r.has_wiki);
    case Column::Archived: return wrap(r.archived);
  }
  return std::monostate{};
}

void set_field(RepositoryRecord& r, Column c, FieldValue v) {
  switch (c) {
    case Column::Name: r.name = std::get<std::string>(std::move(v)); break;
    case Column::Commits: unwrap(r.commits, std::move(v)); break;
    case Column::LastCommitSha: unwrap(r.last_commit_sha, std::move(v)); break;
    case Column::LastCommit: unwrap(r.last_commit, std::move(v)); break;
    case Column::License: unwrap(r.license, std::move(v)); break;
    case Column::Branches: unwrap(r.branches, std::move(v)); break;
    case Column::DefaultBranch: unwrap(r.default_branch, std::move(v)); break;
    case Column::Contributors: unwrap(r.contributors, std::move(v)); break;
    case Column::Releases: unwrap(r.releases, std::move(v)); break;
    case Column::Watchers: unwrap(r.watchers, std::move(v)); break;
    case Column::Stars: unwrap(r.stars, std::move(v)); break;
    case Column::Forks: unwrap(r.forks, std::move(v)); break;
    case Column::IsForkProject: unwrap(r.is_fork_project, std::move(v)); break;
    case Column::Size: unwrap(r.size, std::move(v)); break;
    case Column::CreatedAt: r.created_at = std::get<Instant>(v); break;
    case Column::PushedAt: unwrap(r.pushed_at, std::move(v)); break;
    case Column::UpdatedAt: unwrap(r.updated_at, std::move(v)); break;
    case Column::Homepage: unwrap(r.homepage, std::move(v)); break;
    case Column::MainLanguage: r.main_language = std::get<std::string>(std::move(v)); break;
    case Column::TotalIssues: unwrap(r.total_issues, std::move(v)); break;
    case Column::OpenIssues: unwrap(r.open_issues, std::move(v)); break;
    case Column::TotalPullRequests: unwrap(r.total_pull_requests, std::move(v)); break;
    case Column::OpenPullRequests: unwrap(r.open_pull_requests, std::move(v)); break;
    case Column::HasWiki: unwrap(r.has_wiki, std::move(v)); break;
    case Column::Archived: unwrap(r.archived, std::move(v)); break;
  }
}

bool same_characteristics(const RepositoryRecord& a, const RepositoryRecord& b) {
  RepositoryRecord x = a;
  RepositoryRecord y = b;
  x.last_crawled_at.reset();
  y.last_crawled_at.reset();
  return x == y;
}

bool is_valid_repo_name(std::string_view name) {
  auto slash = name.find('/');
  if (slash == std::string_view::npos || slash == 0 || slash + 1 == name.size()) {
    return false;
  }
  if (name.find('/', slash + 1) != std::string_view::npos) return false;
  return std::none_of(name.begin(), name.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  });
}

bool is_valid_sha(std::string_view sha) {
  return sha.size() == 40 && std::all_of(sha.begin(), sha.end(), is_lower_hex);
}

void check_record(const RepositoryRecord& r) {
  if (!is_valid_repo_name(r.name)) {
    throw ValidationError("name", "expected owner/repo, got '" + r.name + "'");
  }
  if (r.main_language.empty()) throw ValidationError("main_language", "required");
  if (r.last_commit_sha && !is_valid_sha(*r.last_commit_sha)) {
    throw ValidationError("last_commits_sha", "expected 40 lowercase hex characters");
  }
  for (const auto& info : kColumns) {
    if (info.kind != ColumnKind::Count) continue;
    auto v = get_field(r, info.column);
    if (auto* n = std::get_if<Count>(&v); n && *n < 0) {
      throw ValidationError(std::string{info.name}, "count must be non-negative");
    }
  }
  if (r.open_issues && r.total_issues && *r.open_issues > *r.total_issues) {
    throw ValidationError("open_issues", "exceeds total_issues");
  }
  if (r.open_pull_requests && r.total_pull_requests &&
      *r.open_pull_requests > *r.total_pull_requests) {
    throw ValidationError("open_pull_requests", "exceeds total_pull_requests");
  }
}

RepositoryRecord validate_record(const json& raw) {
  if (!raw.is_object()) throw ValidationError("record", "expected an object");
  RepositoryRecord r;
  for (const auto& info : kColumns) {
    FieldValue v = read_raw(raw, info);
    bool required = info.column == Column::Name || info.column == Column::MainLanguage ||
                    info.column == Column::CreatedAt;
    if (required && std::holds_alternative<std::monostate>(v)) {
      throw ValidationError(std::string{info.name}, "required");
    }
    set_field(r, info.column, std::move(v));
  }
  if (auto it = raw.find("last_crawled_at"); it != raw.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError("last_crawled_at", "expected a string");
    auto t = parse_instant(it->get<std::string>());
    if (!t) throw ValidationError("last_crawled_at", "malformed instant");
    r.last_crawled_at = *t;
  }
  check_record(r);
  return r;
}

json record_to_json(const RepositoryRecord& r) {
  json out = json::object();
  for (const auto& info : kColumns) {
    std::string key{info.name};
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::monostate>) {
            out[key] = nullptr;
          } else if constexpr (std::is_same_v<T, Instant>) {
            out[key] = format_instant(v);
          } else {
            out[key] = v;
          }
        },
        get_field(r, info.column));
  }
  return out;
}

TimeInterval TimeInterval::make(Instant start, Instant end) {
  if (!(start < end)) {
    throw ValidationError("interval", "start must precede end: " + format_instant(start) +
                                          " .. " + format_instant(end));
  }
  return TimeInterval{start, end};
}

std::string to_string(const TimeInterval& i) {
  return "[" + format_instant(i.start) + ", " + format_instant(i.end) + ")";
}

std::string_view to_string(IntervalField f) {
  return f == IntervalField::Created ? "created" : "pushed";
}

std::optional<IntervalField> interval_field_from(std::string_view s) {
  if (s == "created") return IntervalField::Created;
  if (s == "pushed") return IntervalField::Pushed;
  return std::nullopt;
}

void check_criteria(const SearchCriteria& c) {
  if (c.language.empty()) throw ValidationError("language", "required");
  if (c.min_stars < 0) throw ValidationError("min_stars", "must be non-negative");
  if (!(c.interval.start < c.interval.end)) {
    throw ValidationError("interval", "empty interval " + to_string(c.interval));
  }
}

const std::array<CountFilterField, 9>& count_filter_fields() {
  static const std::array<CountFilterField, 9> kFields{{
      {"commits", &RepoFilter::commits, Column::Commits},
      {"contributors", &RepoFilter::contributors, Column::Contributors},
      {"issues", &RepoFilter::issues, Column::TotalIssues},
      {"pulls", &RepoFilter::pulls, Column::TotalPullRequests},
      {"branches", &RepoFilter::branches, Column::Branches},
      {"releases", &RepoFilter::releases, Column::Releases},
      {"stars", &RepoFilter::stars, Column::Stars},
      {"watchers", &RepoFilter::watchers, Column::Watchers},
      {"forks", &RepoFilter::forks, Column::Forks},
  }};
  return kFields;
}

const std::array<InstantFilterField, 2>& instant_filter_fields() {
  static const std::array<InstantFilterField, 2> kFields{{
      {"created", &RepoFilter::created_between, Column::CreatedAt},
      {"lastCommit", &RepoFilter::last_commit_between, Column::LastCommit},
  }};
  return kFields;
}

void check_filter(const RepoFilter& f) {
  for (const auto& field : count_filter_fields()) {
    const CountRange& r = f.*field.range;
    if (r.min && *r.min < 0) throw ValidationError(std::string{field.param} + "Min", "negative");
    if (r.max && *r.max < 0) throw ValidationError(std::string{field.param} + "Max", "negative");
    if (r.min && r.max && *r.min > *r.max) {
      throw RangeError(std::string{field.param}, "min exceeds max");
    }
  }
  for (const auto& field : instant_filter_fields()) {
    const InstantRange& r = f.*field.range;
    if (r.min && r.max && *r.min > *r.max) {
      throw RangeError(std::string{field.param}, "min exceeds max");
    }
  }
}

json report_to_json(const MiningReport& r) {
  json truncated = json::array();
  for (const auto& leaf : r.truncated_leaves) {
    truncated.push_back({{"start", format_instant(leaf.start)}, {"end", format_instant(leaf.end)}});
  }
  return {
      {"language", r.language},
      {"window_start", format_instant(r.window.start)},
      {"window_end", format_instant(r.window.end)},
      {"empty_window", r.empty_window},
      {"field", std::string{to_string(r.field)}},
      {"seen", r.seen},
      {"admitted", r.admitted},
      {"persisted", r.persisted},
      {"page_errors", r.page_errors},
      {"leaves", r.leaves},
      {"splits", r.splits},
      {"truncated_leaves", truncated},
      {"started_at", format_instant(r.started_at)},
      {"duration_ms", r.duration_ms},
  };
}

MiningReport report_from_json(const json& j) {
  MiningReport r;
  r.language = j.at("language").get<std::string>();
  r.window.start = parse_instant(j.at("window_start").get<std::string>()).value();
  r.window.end = parse_instant(j.at("window_end").get<std::string>()).value();
  r.empty_window = j.value("empty_window", false);
  r.field = interval_field_from(j.value("field", "created")).value_or(IntervalField::Created);
  r.seen = j.at("seen").get<Count>();
  r.admitted = j.at("admitted").get<Count>();
  r.persisted = j.at("persisted").get<Count>();
  r.page_errors = j.at("page_errors").get<Count>();
  r.leaves = j.value("leaves", Count{0});
  r.splits = j.value("splits", Count{0});
  for (const auto& leaf : j.value("truncated_leaves", json::array())) {
    r.truncated_leaves.push_back({parse_instant(leaf.at("start").get<std::string>()).value(),
                                  parse_instant(leaf.at("end").get<std::string>()).value()});
  }
  r.started_at = parse_instant(j.at("started_at").get<std::string>()).value();
  r.duration_ms = j.value("duration_ms", std::int64_t{0});
  return r;
}

}  // namespace ghs
