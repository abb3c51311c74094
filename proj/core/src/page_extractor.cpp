#include "ghs/page_extractor.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ghs/error.hpp"

namespace ghs {

using nlohmann::json;

namespace {

struct MetricName {
  Metric metric;
  std::string_view name;
  PageKind page;
};

constexpr std::array<MetricName, 11> kMetrics{{
    {Metric::Commits, "commits", PageKind::Landing},
    {Metric::LastCommitSha, "last_commit_sha", PageKind::Landing},
    {Metric::LastCommit, "last_commit", PageKind::Landing},
    {Metric::Branches, "branches", PageKind::Landing},
    {Metric::Contributors, "contributors", PageKind::Landing},
    {Metric::Releases, "releases", PageKind::Landing},
    {Metric::Watchers, "watchers", PageKind::Landing},
    {Metric::OpenIssues, "open_issues", PageKind::Issues},
    {Metric::ClosedIssues, "closed_issues", PageKind::Issues},
    {Metric::OpenPullRequests, "open_pull_requests", PageKind::Pulls},
    {Metric::ClosedPullRequests, "closed_pull_requests", PageKind::Pulls},
}};

constexpr Count kMaxCount = std::numeric_limits<Count>::max();

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::optional<Count> accumulate_digits(std::string_view digits, Count acc = 0) {
  for (char c : digits) {
    if (!is_digit(c)) return std::nullopt;
    if (acc > (kMaxCount - (c - '0')) / 10) return std::nullopt;
    acc = acc * 10 + (c - '0');
  }
  return acc;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<std::string> read_raw(const html::Node& node, const SelectorEntry& entry) {
  if (entry.attribute) {
    auto v = node.attribute(*entry.attribute);
    if (!v) return std::nullopt;
    return std::string{*v};
  }
  return node.text_content();
}

template <typename T, typename Parse>
std::optional<T> first_match(const html::Document& doc, const SelectorSpec& spec, Metric m,
                             Parse&& parse) {
  auto it = spec.entries.find(m);
  if (it == spec.entries.end()) return std::nullopt;
  for (const auto& entry : it->second) {
    const html::Node* node = entry.selector.select_first(doc.root());
    if (node == nullptr) continue;
    auto raw = read_raw(*node, entry);
    if (!raw) continue;
    if (auto v = parse(*raw, entry.rule)) return v;
  }
  return std::nullopt;
}

std::optional<Count> count_value(const html::Document& doc, const SelectorSpec& spec, Metric m) {
  return first_match<Count>(doc, spec, m, [](const std::string& raw, ParseRule rule) {
    return rule == ParseRule::Count ? parse_count_in_text(raw) : std::nullopt;
  });
}

OpenTotal open_total(const html::Document& doc, const SelectorSpec& spec, Metric open_metric,
                     Metric closed_metric) {
  if (doc.structurally_empty()) throw ExtractionError("structurally empty document");
  OpenTotal out;
  out.open = count_value(doc, spec, open_metric);
  auto closed = count_value(doc, spec, closed_metric);
  if (out.open && closed) {
    if (*out.open > kMaxCount - *closed) return {};
    out.total = *out.open + *closed;
  }
  return out;
}

void mark(PageMetrics& m, Column c, bool present, Provenance p) {
  m.provenance[c] = present ? p : Provenance::Absent;
}

}  // namespace

std::string_view to_string(PageKind k) {
  switch (k) {
    case PageKind::Landing: return "landing";
    case PageKind::Issues: return "issues";
    case PageKind::Pulls: return "pulls";
  }
  return "?";
}

std::string_view to_string(Metric m) {
  for (const auto& e : kMetrics) {
    if (e.metric == m) return e.name;
  }
  return "?";
}

std::optional<Metric> metric_from(std::string_view name) {
  for (const auto& e : kMetrics) {
    if (e.name == name) return e.metric;
  }
  return std::nullopt;
}

PageKind page_of(Metric m) {
  for (const auto& e : kMetrics) {
    if (e.metric == m) return e.page;
  }
  return PageKind::Landing;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Absent: return "absent";
    case Provenance::Primary: return "primary";
    case Provenance::Fallback: return "fallback";
  }
  return "?";
}

std::optional<Count> parse_abbreviated_count(std::string_view token) {
  token = trim(token);
  if (token.empty() || !is_digit(token.front())) return std::nullopt;

  const char last = token.back();
  if (last == 'k' || last == 'K' || last == 'm' || last == 'M') {
    const Count multiplier = (last == 'k' || last == 'K') ? 1000 : 1000000;
    std::string_view number = token.substr(0, token.size() - 1);
    auto dot = number.find('.');
    std::string_view whole = number.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : number.substr(dot + 1);
    if (whole.empty() || (dot != std::string_view::npos && frac.empty())) return std::nullopt;
    auto w = accumulate_digits(whole);
    auto f = accumulate_digits(frac);
    if (!w || !f || frac.size() > 6) return std::nullopt;
    if (*w > kMaxCount / multiplier) return std::nullopt;
    Count scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    // 2.1k -> 2000 + 1 * 1000 / 10; precision beyond the multiplier truncates
    return *w * multiplier + (*f * multiplier) / scale;
  }

  if (token.find(',') == std::string_view::npos) return accumulate_digits(token);

  // thousands separators: 1-3 leading digits, then ",ddd" groups
  auto first_comma = token.find(',');
  if (first_comma == 0 || first_comma > 3) return std::nullopt;
  Count acc = 0;
  auto lead = accumulate_digits(token.substr(0, first_comma));
  if (!lead) return std::nullopt;
  acc = *lead;
  std::size_t pos = first_comma;
  while (pos < token.size()) {
    if (token[pos] != ',' || pos + 4 > token.size()) return std::nullopt;
    auto group = accumulate_digits(token.substr(pos + 1, 3), acc);
    if (!group) return std::nullopt;
    acc = *group;
    pos += 4;
  }
  return acc;
}

std::optional<Count> parse_count_in_text(std::string_view text) {
  std::size_t start = 0;
  while (start < text.size() && !is_digit(text[start])) ++start;
  if (start == text.size()) return std::nullopt;
  // a digit glued to a preceding letter (v2, x86) is not a count
  if (start > 0 && is_alnum(text[start - 1])) return std::nullopt;
  std::size_t end = start;
  while (end < text.size() && (is_digit(text[end]) || text[end] == ',' || text[end] == '.')) ++end;
  std::size_t token_end = end;
  while (token_end > start && (text[token_end - 1] == ',' || text[token_end - 1] == '.')) {
    --token_end;
  }
  if (token_end == end && end < text.size()) {
    char s = text[end];
    bool suffix = s == 'k' || s == 'K' || s == 'm' || s == 'M';
    if (suffix && (end + 1 == text.size() || !is_alnum(text[end + 1]))) {
      token_end = end + 1;
    } else if (is_alnum(s)) {
      return std::nullopt;
    }
  }
  return parse_abbreviated_count(text.substr(start, token_end - start));
}

std::optional<std::string> find_sha(std::string_view text) {
  auto hex = [](char c) { return is_digit(c) || (c >= 'a' && c <= 'f'); };
  std::size_t i = 0;
  while (i < text.size()) {
    if (!hex(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && hex(text[j])) ++j;
    bool bounded = (i == 0 || !is_alnum(text[i - 1])) && (j == text.size() || !is_alnum(text[j]));
    if (j - i == 40 && bounded) return std::string{text.substr(i, 40)};
    i = j;
  }
  return std::nullopt;
}

SelectorSpec SelectorSpec::from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("selectors", "expected an object");
  SelectorSpec spec;
  spec.version = doc.value("version", 0);
  auto metrics = doc.find("metrics");
  if (metrics == doc.end() || !metrics->is_object()) {
    throw ValidationError("selectors.metrics", "expected an object");
  }
  for (const auto& [name, list] : metrics->items()) {
    auto metric = metric_from(name);
    if (!metric) throw ValidationError("selectors.metrics", "unknown metric '" + name + "'");
    if (!list.is_array()) throw ValidationError(name, "expected a list of selectors");
    auto& entries = spec.entries[*metric];
    for (const auto& item : list) {
      SelectorEntry e;
      try {
        e.selector = html::Selector::parse(item.at("selector").get<std::string>());
      } catch (const std::exception& ex) {
        throw ValidationError(name, ex.what());
      }
      auto rule = item.value("rule", std::string{"count"});
      if (rule == "count") e.rule = ParseRule::Count;
      else if (rule == "iso_date") e.rule = ParseRule::IsoDate;
      else if (rule == "sha") e.rule = ParseRule::Sha;
      else throw ValidationError(name, "unknown parse rule '" + rule + "'");
      if (auto a = item.find("attribute"); a != item.end() && a->is_string()) {
        e.attribute = a->get<std::string>();
      }
      entries.push_back(std::move(e));
    }
  }
  for (const auto& m : kMetrics) {
    auto it = spec.entries.find(m.metric);
    if (it == spec.entries.end() || it->second.empty()) {
      throw ValidationError(std::string{m.name}, "no selector configured");
    }
  }
  return spec;
}

SelectorSpec SelectorSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("selectors", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("selectors", e.what());
  }
  return from_json(doc);
}

PageMetrics::PageMetrics() {
  for (Column c : page_columns()) provenance[c] = Provenance::Absent;
}

const std::vector<Column>& page_columns(PageKind kind) {
  static const std::vector<Column> kLanding{Column::Commits,      Column::LastCommitSha,
                                            Column::LastCommit,   Column::Branches,
                                            Column::Contributors, Column::Releases,
                                            Column::Watchers};
  static const std::vector<Column> kIssues{Column::TotalIssues, Column::OpenIssues};
  static const std::vector<Column> kPulls{Column::TotalPullRequests, Column::OpenPullRequests};
  switch (kind) {
    case PageKind::Landing: return kLanding;
    case PageKind::Issues: return kIssues;
    case PageKind::Pulls: return kPulls;
  }
  return kLanding;
}

const std::vector<Column>& page_columns() {
  static const std::vector<Column> kAll = [] {
    std::vector<Column> all;
    for (auto k : {PageKind::Landing, PageKind::Issues, PageKind::Pulls}) {
      for (Column c : page_columns(k)) all.push_back(c);
    }
    return all;
  }();
  return kAll;
}

void PageMetrics::merge(const PageMetrics& other, PageKind kind) {
  switch (kind) {
    case PageKind::Landing:
      commits = other.commits;
      last_commit_sha = other.last_commit_sha;
      last_commit = other.last_commit;
      branches = other.branches;
      contributors = other.contributors;
      releases = other.releases;
      watchers = other.watchers;
      break;
    case PageKind::Issues:
      total_issues = other.total_issues;
      open_issues = other.open_issues;
      break;
    case PageKind::Pulls:
      total_pull_requests = other.total_pull_requests;
      open_pull_requests = other.open_pull_requests;
      break;
  }
  for (Column c : page_columns(kind)) provenance[c] = other.provenance.at(c);
}

json PageMetrics::to_json() const {
  json out = json::object();
  auto opt = [](const auto& v) -> json {
    if (!v) return nullptr;
    return *v;
  };
  out["commits"] = opt(commits);
  out["last_commits_sha"] = opt(last_commit_sha);
  out["last_commits"] = last_commit ? json(format_instant(*last_commit)) : json(nullptr);
  out["branches"] = opt(branches);
  out["contributors"] = opt(contributors);
  out["releases"] = opt(releases);
  out["watchers"] = opt(watchers);
  out["total_issues"] = opt(total_issues);
  out["open_issues"] = opt(open_issues);
  out["total_pull_requests"] = opt(total_pull_requests);
  out["open_pull_requests"] = opt(open_pull_requests);
  json prov = json::object();
  for (const auto& [column, p] : provenance) {
    prov[std::string{column_info(column).name}] = std::string{to_string(p)};
  }
  out["provenance"] = prov;
  return out;
}

PageMetrics extract_landing(const html::Document& doc, const SelectorSpec& spec,
                            Provenance provenance) {
  if (doc.structurally_empty()) throw ExtractionError("structurally empty document");
  PageMetrics m;
  m.commits = count_value(doc, spec, Metric::Commits);
  m.last_commit_sha = first_match<std::string>(
      doc, spec, Metric::LastCommitSha,
      [](const std::string& raw, ParseRule rule) -> std::optional<std::string> {
        if (rule != ParseRule::Sha) return std::nullopt;
        return find_sha(raw);
      });
  m.last_commit = first_match<Instant>(
      doc, spec, Metric::LastCommit,
      [](const std::string& raw, ParseRule rule) -> std::optional<Instant> {
        if (rule != ParseRule::IsoDate) return std::nullopt;
        return parse_instant(trim(raw));
      });
  m.branches = count_value(doc, spec, Metric::Branches);
  m.contributors = count_value(doc, spec, Metric::Contributors);
  m.releases = count_value(doc, spec, Metric::Releases);
  m.watchers = count_value(doc, spec, Metric::Watchers);

  mark(m, Column::Commits, m.commits.has_value(), provenance);
  mark(m, Column::LastCommitSha, m.last_commit_sha.has_value(), provenance);
  mark(m, Column::LastCommit, m.last_commit.has_value(), provenance);
  mark(m, Column::Branches, m.branches.has_value(), provenance);
  mark(m, Column::Contributors, m.contributors.has_value(), provenance);
  mark(m, Column::Releases, m.releases.has_value(), provenance);
  mark(m, Column::Watchers, m.watchers.has_value(), provenance);
  return m;
}

OpenTotal extract_issue_counts(const html::Document& doc, const SelectorSpec& spec) {
  return open_total(doc, spec, Metric::OpenIssues, Metric::ClosedIssues);
}

OpenTotal extract_pull_counts(const html::Document& doc, const SelectorSpec& spec) {
  return open_total(doc, spec, Metric::OpenPullRequests, Metric::ClosedPullRequests);
}

PageMetrics extract_page(const html::Document& doc, PageKind kind, const SelectorSpec& spec,
                         Provenance provenance) {
  if (kind == PageKind::Landing) return extract_landing(doc, spec, provenance);
  PageMetrics m;
  if (kind == PageKind::Issues) {
    auto counts = extract_issue_counts(doc, spec);
    m.total_issues = counts.total;
    m.open_issues = counts.open;
    mark(m, Column::TotalIssues, counts.total.has_value(), provenance);
    mark(m, Column::OpenIssues, counts.open.has_value(), provenance);
  } else {
    auto counts = extract_pull_counts(doc, spec);
    m.total_pull_requests = counts.total;
    m.open_pull_requests = counts.open;
    mark(m, Column::TotalPullRequests, counts.total.has_value(), provenance);
    mark(m, Column::OpenPullRequests, counts.open.has_value(), provenance);
  }
  return m;
}

std::string FileFetcher::fetch(const std::string& url) {
  std::filesystem::path path = root_ / url;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FetchError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string FailingFetcher::fetch(const std::string& url) {
  if (failing_.count(url) != 0) throw FetchError("injected failure for " + url);
  return inner_.fetch(url);
}

PageExtractor::PageExtractor(const SelectorSpec& spec, DocumentFetcher& primary,
                             DocumentFetcher* fallback, int max_fallback_sessions)
    : spec_(spec),
      primary_(primary),
      fallback_(fallback),
      fallback_slots_(std::clamp<std::ptrdiff_t>(max_fallback_sessions, 1, kMaxFallbackSessions)) {}

PageMetrics PageExtractor::run(DocumentFetcher& fetcher, const std::string& url, PageKind kind,
                               Provenance provenance) {
  std::string body = fetcher.fetch(url);
  html::Document doc = html::Document::parse(body);
  return extract_page(doc, kind, spec_, provenance);
}

PageMetrics PageExtractor::extract_with_fallback(const std::string& url, PageKind kind) {
  std::string primary_error;
  try {
    return run(primary_, url, kind, Provenance::Primary);
  } catch (const FetchError& e) {
    primary_error = e.what();
  } catch (const ExtractionError& e) {
    primary_error = e.what();
  }
  ++primary_failures_;
  if (fallback_ == nullptr) {
    throw ExtractionError(url + ": primary failed (" + primary_error + "), no fallback");
  }
  fallback_slots_.acquire();
  struct SlotGuard {
    std::counting_semaphore<kMaxFallbackSessions>& slots;
    ~SlotGuard() { slots.release(); }
  } guard{fallback_slots_};
  ++fallback_invocations_;
  try {
    return run(*fallback_, url, kind, Provenance::Fallback);
  } catch (const Error& e) {
    throw ExtractionError(url + ": primary failed (" + primary_error + "), fallback failed (" +
                          e.what() + ")");
  }
}

ScrapeResult HtmlPageScraper::scrape(const std::string& repo_name) {
  ScrapeResult result;
  const std::string base = base_url_.empty() ? repo_name : base_url_ + "/" + repo_name;
  const std::pair<PageKind, std::string> pages[] = {
      {PageKind::Landing, base},
      {PageKind::Issues, base + "/issues"},
      {PageKind::Pulls, base + "/pulls"},
  };
  for (const auto& [kind, url] : pages) {
    try {
      result.metrics.merge(extractor_.extract_with_fallback(url, kind), kind);
    } catch (const ExtractionError& e) {
      result.page_error = true;
      if (!result.error.empty()) result.error += "; ";
      result.error += e.what();
    }
  }
  return result;
}

}  // namespace ghs
