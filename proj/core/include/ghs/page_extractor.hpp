#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ghs/domain.hpp"
#include "ghs/html.hpp"

namespace ghs {

enum class PageKind { Landing, Issues, Pulls };
std::string_view to_string(PageKind k);

/// Raw metrics a page can display. Issue and pull totals are derived as
/// open + closed.
enum class Metric {
  Commits,
  LastCommitSha,
  LastCommit,
  Branches,
  Contributors,
  Releases,
  Watchers,
  OpenIssues,
  ClosedIssues,
  OpenPullRequests,
  ClosedPullRequests,
};

std::string_view to_string(Metric m);
std::optional<Metric> metric_from(std::string_view name);
PageKind page_of(Metric m);

enum class ParseRule { Count, IsoDate, Sha };

/// Parses "1234", "1,234", "2.1k", "3M". Anything else is nullopt.
std::optional<Count> parse_abbreviated_count(std::string_view token);

/// Finds the first number-like token in free text and parses it.
std::optional<Count> parse_count_in_text(std::string_view text);

/// First run of exactly 40 lowercase hex characters.
std::optional<std::string> find_sha(std::string_view text);

struct SelectorEntry {
  html::Selector selector;
  ParseRule rule = ParseRule::Count;
  std::optional<std::string> attribute;  // read this attribute instead of text
};

/// Metric → ordered selector list. Loaded from a versioned config document:
///
///   {"version": N, "metrics": {"commits": [{"selector": "...",
///     "rule": "count", "attribute": "..."}], ...}}
struct SelectorSpec {
  int version = 0;
  std::map<Metric, std::vector<SelectorEntry>> entries;

  /// Throws ValidationError on unknown metrics, rules or bad selectors, and
  /// when some metric has no selector.
  static SelectorSpec from_json(const nlohmann::json& doc);
  static SelectorSpec load(const std::filesystem::path& path);
};

enum class Provenance { Absent, Primary, Fallback };
std::string_view to_string(Provenance p);

/// Page-sourced characteristics. Each may be absent.
struct PageMetrics {
  std::optional<Count> commits;
  std::optional<std::string> last_commit_sha;
  std::optional<Instant> last_commit;
  std::optional<Count> branches;
  std::optional<Count> contributors;
  std::optional<Count> releases;
  std::optional<Count> watchers;
  std::optional<Count> total_issues;
  std::optional<Count> open_issues;
  std::optional<Count> total_pull_requests;
  std::optional<Count> open_pull_requests;

  std::map<Column, Provenance> provenance;

  PageMetrics();

  /// Copies every field that `other` provides for `kind`.
  void merge(const PageMetrics& other, PageKind kind);

  /// Expected-file shape: {"commits": 1234 | null, ..., "provenance": {...}}.
  nlohmann::json to_json() const;

  bool operator==(const PageMetrics&) const = default;
};

/// Page-sourced columns, in column order.
const std::vector<Column>& page_columns(PageKind kind);
const std::vector<Column>& page_columns();

struct OpenTotal {
  std::optional<Count> total;
  std::optional<Count> open;
};

/// Throws ExtractionError when the document is structurally empty.
PageMetrics extract_landing(const html::Document& doc, const SelectorSpec& spec,
                            Provenance provenance = Provenance::Primary);
OpenTotal extract_issue_counts(const html::Document& doc, const SelectorSpec& spec);
OpenTotal extract_pull_counts(const html::Document& doc, const SelectorSpec& spec);

/// Extraction for any page kind, provenance applied to present fields.
PageMetrics extract_page(const html::Document& doc, PageKind kind, const SelectorSpec& spec,
                         Provenance provenance);

// --- fetching --------------------------------------------------------------

class DocumentFetcher {
 public:
  virtual ~DocumentFetcher() = default;
  /// Returns the page body; throws FetchError.
  virtual std::string fetch(const std::string& url) = 0;
};

/// Reads `url` as a path relative to a root directory.
class FileFetcher final : public DocumentFetcher {
 public:
  explicit FileFetcher(std::filesystem::path root) : root_(std::move(root)) {}
  std::string fetch(const std::string& url) override;

 private:
  std::filesystem::path root_;
};

/// Wraps another fetcher and fails for selected URLs.
class FailingFetcher final : public DocumentFetcher {
 public:
  FailingFetcher(DocumentFetcher& inner, std::set<std::string> failing)
      : inner_(inner), failing_(std::move(failing)) {}
  std::string fetch(const std::string& url) override;

 private:
  DocumentFetcher& inner_;
  std::set<std::string> failing_;
};

/// Fast static fetch + parse, with a slower fallback fetcher consulted only
/// when the primary path errs. Fallback sessions are capacity-limited.
class PageExtractor {
 public:
  static constexpr std::ptrdiff_t kMaxFallbackSessions = 64;

  PageExtractor(const SelectorSpec& spec, DocumentFetcher& primary, DocumentFetcher* fallback,
                int max_fallback_sessions = 1);

  /// Throws ExtractionError when both strategies fail.
  PageMetrics extract_with_fallback(const std::string& url, PageKind kind);

  std::uint64_t primary_failures() const { return primary_failures_.load(); }
  std::uint64_t fallback_invocations() const { return fallback_invocations_.load(); }

 private:
  PageMetrics run(DocumentFetcher& fetcher, const std::string& url, PageKind kind,
                  Provenance provenance);

  const SelectorSpec& spec_;
  DocumentFetcher& primary_;
  DocumentFetcher* fallback_;
  std::counting_semaphore<kMaxFallbackSessions> fallback_slots_;
  std::atomic<std::uint64_t> primary_failures_{0};
  std::atomic<std::uint64_t> fallback_invocations_{0};
};

// --- scraping a repository -------------------------------------------------

struct ScrapeResult {
  PageMetrics metrics;
  bool page_error = false;
  std::string error;
};

/// Collects the page-sourced characteristics of one repository.
class PageScraper {
 public:
  virtual ~PageScraper() = default;
  virtual ScrapeResult scrape(const std::string& repo_name) = 0;
};

/// Scrapes `<base>/<name>`, `<base>/<name>/issues` and `<base>/<name>/pulls`.
/// A failing page leaves its metrics absent and flags the result.
class HtmlPageScraper final : public PageScraper {
 public:
  HtmlPageScraper(PageExtractor& extractor, std::string base_url)
      : extractor_(extractor), base_url_(std::move(base_url)) {}
  ScrapeResult scrape(const std::string& repo_name) override;

 private:
  PageExtractor& extractor_;
  std::string base_url_;
};

}  // namespace ghs
