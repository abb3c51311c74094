#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ghs/time.hpp"

namespace ghs {

using Count = std::int64_t;

/// The 25 stored characteristics, in their canonical column order. The
/// enumerator order is the export column order.
enum class Column : int {
  Name,
  Commits,
  LastCommitSha,
  LastCommit,
  License,
  Branches,
  DefaultBranch,
  Contributors,
  Releases,
  Watchers,
  Stars,
  Forks,
  IsForkProject,
  Size,
  CreatedAt,
  PushedAt,
  UpdatedAt,
  Homepage,
  MainLanguage,
  TotalIssues,
  OpenIssues,
  TotalPullRequests,
  OpenPullRequests,
  HasWiki,
  Archived,
};

inline constexpr std::size_t kColumnCount = 25;

enum class ColumnKind { Text, Count, Time, Flag };

/// Where a column's value is mined from.
enum class MiningSource { SearchApi, LandingPage, IssuesPage, PullsPage };

struct ColumnInfo {
  Column column;
  std::string_view name;  // wire / header name
  ColumnKind kind;
  MiningSource source;
};

const std::array<ColumnInfo, kColumnCount>& columns();
const ColumnInfo& column_info(Column c);
std::optional<Column> column_by_name(std::string_view name);

/// One repository's latest snapshot. Every characteristic except the three
/// identity fields may be absent: absence means "not observed", which is
/// different from a measured zero.
struct RepositoryRecord {
  std::string name;
  std::optional<Count> commits;
  std::optional<std::string> last_commit_sha;
  std::optional<Instant> last_commit;
  std::optional<std::string> license;
  std::optional<Count> branches;
  std::optional<std::string> default_branch;
  std::optional<Count> contributors;
  std::optional<Count> releases;
  std::optional<Count> watchers;
  std::optional<Count> stars;
  std::optional<Count> forks;
  std::optional<bool> is_fork_project;
  std::optional<Count> size;  // kilobytes, as reported
  Instant created_at{};
  std::optional<Instant> pushed_at;
  std::optional<Instant> updated_at;
  std::optional<std::string> homepage;
  std::string main_language;
  std::optional<Count> total_issues;
  std::optional<Count> open_issues;
  std::optional<Count> total_pull_requests;
  std::optional<Count> open_pull_requests;
  std::optional<bool> has_wiki;
  std::optional<bool> archived;

  std::optional<Instant> last_crawled_at;

  bool operator==(const RepositoryRecord&) const = default;
};

using FieldValue = std::variant<std::monostate, Count, std::string, Instant, bool>;

FieldValue get_field(const RepositoryRecord& r, Column c);
void set_field(RepositoryRecord& r, Column c, FieldValue v);

/// True when the 25 characteristics match, ignoring bookkeeping.
bool same_characteristics(const RepositoryRecord& a, const RepositoryRecord& b);

bool is_valid_repo_name(std::string_view name);
bool is_valid_sha(std::string_view sha);

/// Builds a record from a raw field map keyed by column name. Requires
/// `name`, `main_language` and `created_at`; null or missing optional fields
/// become absent. Throws ValidationError on any malformed input.
RepositoryRecord validate_record(const nlohmann::json& raw);

/// Checks the record invariants; throws ValidationError.
void check_record(const RepositoryRecord& r);

/// All 25 columns, absent as null, instants ISO-8601.
nlohmann::json record_to_json(const RepositoryRecord& r);

// --- time intervals --------------------------------------------------------

/// Half-open UTC interval [start, end).
struct TimeInterval {
  Instant start{};
  Instant end{};

  /// Throws ValidationError unless start < end.
  static TimeInterval make(Instant start, Instant end);

  Seconds duration() const { return end - start; }
  bool contains(Instant t) const { return start <= t && t < end; }

  bool operator==(const TimeInterval&) const = default;
};

std::string to_string(const TimeInterval& i);

// --- search criteria -------------------------------------------------------

enum class IntervalField { Created, Pushed };

std::string_view to_string(IntervalField f);
std::optional<IntervalField> interval_field_from(std::string_view s);

inline constexpr Count kMinStars = 10;

struct SearchCriteria {
  std::string language;
  TimeInterval interval;
  IntervalField interval_field = IntervalField::Created;
  Count min_stars = kMinStars;
  bool include_forks = true;
  bool public_only = true;

  SearchCriteria with_interval(const TimeInterval& i) const {
    SearchCriteria c = *this;
    c.interval = i;
    return c;
  }
};

void check_criteria(const SearchCriteria& c);

// --- checkpoints -----------------------------------------------------------

struct MiningCheckpoint {
  std::string language;
  Instant last_mined_until{};
  bool completed_initial_pass = false;

  bool operator==(const MiningCheckpoint&) const = default;
};

// --- filters ---------------------------------------------------------------

struct CountRange {
  std::optional<Count> min;
  std::optional<Count> max;
  bool active() const { return min || max; }
  bool operator==(const CountRange&) const = default;
};

struct InstantRange {
  std::optional<Instant> min;
  std::optional<Instant> max;
  bool active() const { return min || max; }
  bool operator==(const InstantRange&) const = default;
};

/// The researcher-facing query. All present clauses are conjoined.
struct RepoFilter {
  std::optional<std::string> name_contains;
  std::optional<std::string> license_equals;
  std::optional<std::string> language_equals;

  CountRange commits;
  CountRange contributors;
  CountRange issues;
  CountRange pulls;
  CountRange branches;
  CountRange releases;
  CountRange stars;
  CountRange watchers;
  CountRange forks;

  InstantRange created_between;
  InstantRange last_commit_between;

  bool exclude_forks = false;
  bool only_with_license = false;
  bool only_with_open_issues = false;
  bool exclude_archived = false;

  bool operator==(const RepoFilter&) const = default;
};

struct CountFilterField {
  std::string_view param;  // commits, issues, ...
  CountRange RepoFilter::*range;
  Column column;
};

struct InstantFilterField {
  std::string_view param;  // created, lastCommit
  InstantRange RepoFilter::*range;
  Column column;
};

const std::array<CountFilterField, 9>& count_filter_fields();
const std::array<InstantFilterField, 2>& instant_filter_fields();

/// Throws RangeError naming the first range with min > max.
void check_filter(const RepoFilter& f);

// --- mining report ---------------------------------------------------------

struct MiningReport {
  std::string language;
  TimeInterval window{};
  bool empty_window = false;
  IntervalField field = IntervalField::Created;
  Count seen = 0;
  Count admitted = 0;
  Count persisted = 0;
  Count page_errors = 0;
  Count leaves = 0;
  Count splits = 0;
  std::vector<TimeInterval> truncated_leaves;
  Instant started_at{};
  std::int64_t duration_ms = 0;
};

nlohmann::json report_to_json(const MiningReport& r);
MiningReport report_from_json(const nlohmann::json& j);

}  // namespace ghs
