#include "ghs/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "ghs/error.hpp"

namespace ghs {

LanguageConfig::LanguageConfig(std::vector<std::string> languages)
    : languages_(std::move(languages)) {
  if (languages_.empty()) throw ValidationError("languages", "at least one language required");
  std::set<std::string> seen;
  for (const auto& l : languages_) {
    if (l.empty()) throw ValidationError("languages", "empty language name");
    if (!seen.insert(l).second) throw ValidationError("languages", "duplicate '" + l + "'");
  }
}

LanguageConfig LanguageConfig::defaults() {
  return LanguageConfig({"Python", "Java", "C++", "C", "C#", "Objective-C", "JavaScript",
                         "TypeScript", "Swift", "Kotlin"});
}

LanguageConfig LanguageConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("languages", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
    auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ValidationError("languages", "malformed JSON in " + path.string());
    if (doc.is_object()) doc = doc.value("languages", nlohmann::json::array());
    if (!doc.is_array()) throw ValidationError("languages", "expected a list");
    std::vector<std::string> out;
    for (const auto& v : doc) {
      if (!v.is_string()) throw ValidationError("languages", "expected strings");
      out.push_back(v.get<std::string>());
    }
    return LanguageConfig(std::move(out));
  }
  std::vector<std::string> out;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(b, e - b + 1));
  }
  return LanguageConfig(std::move(out));
}

bool LanguageConfig::contains(const std::string& language) const {
  return std::find(languages_.begin(), languages_.end(), language) != languages_.end();
}

bool admit(const RepoSummary& summary) { return summary.stars >= kMinStars; }

RepositoryRecord fuse(const RepoSummary& s, const PageMetrics& p, Instant crawled_at,
                      const std::string& queried_language) {
  RepositoryRecord r;
  r.name = s.name;
  r.license = s.license;
  r.default_branch = s.default_branch;
  r.stars = s.stars;
  r.forks = s.forks;
  r.is_fork_project = s.is_fork;
  r.size = s.size;
  r.created_at = s.created_at;
  r.pushed_at = s.pushed_at;
  r.updated_at = s.updated_at;
  r.homepage = s.homepage;
  r.main_language = s.main_language.empty() ? queried_language : s.main_language;
  r.has_wiki = s.has_wiki;
  r.archived = s.archived;

  r.commits = p.commits;
  r.last_commit_sha = p.last_commit_sha;
  r.last_commit = p.last_commit;
  r.branches = p.branches;
  r.contributors = p.contributors;
  r.releases = p.releases;
  r.watchers = p.watchers;
  r.total_issues = p.total_issues;
  r.open_issues = p.open_issues;
  r.total_pull_requests = p.total_pull_requests;
  r.open_pull_requests = p.open_pull_requests;

  r.last_crawled_at = crawled_at;
  check_record(r);
  return r;
}

MiningOrchestrator::MiningOrchestrator(ForgeClient& client, PageScraper& scraper,
                                       RepositoryStore& store, LanguageConfig languages,
                                       OrchestratorOptions options)
    : client_(client),
      scraper_(scraper),
      store_(store),
      languages_(std::move(languages)),
      options_(options) {}

std::vector<MiningOrchestrator::Scraped> MiningOrchestrator::scrape_all(
    const std::vector<RepoSummary>& admitted, Instant now, const std::string& language) {
  std::vector<Scraped> out(admitted.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      ScrapeResult scraped;
      try {
        scraped = scraper_.scrape(admitted[i].name);
      } catch (const std::exception& e) {
        scraped = ScrapeResult{};
        scraped.page_error = true;
        scraped.error = e.what();
      }
      if (scraped.page_error) {
        spdlog::warn("{}: page extraction failed, stored with absent metrics: {}",
                     admitted[i].name, scraped.error);
      }
      out[i].page_error = scraped.page_error;
      try {
        out[i].record = fuse(admitted[i], scraped.metrics, now, language);
      } catch (const ValidationError& e) {
        spdlog::error("{}: dropped, {}", admitted[i].name, e.what());
        out[i].valid = false;
      }
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(std::max(1, options_.scrape_workers), admitted.size());
  if (workers <= 1) {
    work(0, admitted.size());
    return out;
  }
  std::vector<std::future<void>> tasks;
  const std::size_t chunk = (admitted.size() + workers - 1) / workers;
  for (std::size_t begin = 0; begin < admitted.size(); begin += chunk) {
    tasks.push_back(std::async(std::launch::async, work, begin,
                               std::min(admitted.size(), begin + chunk)));
  }
  for (auto& t : tasks) t.get();
  return out;
}

MiningReport MiningOrchestrator::run_language_pass(const std::string& language, Instant now) {
  if (!languages_.contains(language)) {
    throw UsageError("language '" + language + "' is not configured");
  }
  const auto wall_start = std::chrono::steady_clock::now();
  MiningReport report;
  report.language = language;
  report.started_at = now;

  auto checkpoint = store_.load_checkpoint(language);
  const bool incremental = checkpoint && checkpoint->completed_initial_pass;
  report.field = incremental ? options_.incremental_field : options_.initial_field;

  auto window = seed_interval(language, checkpoint, now);
  if (!window) {
    report.empty_window = true;
    Instant at = checkpoint ? checkpoint->last_mined_until : now - kFreshnessBuffer;
    report.window = TimeInterval{at, at};
    if (checkpoint && !checkpoint->completed_initial_pass) {
      store_.save_checkpoint(MiningCheckpoint{language, at, true});
    }
    store_.record_run(report);
    spdlog::info("{}: nothing to mine before {}", language, format_instant(at));
    return report;
  }
  report.window = *window;
  spdlog::info("{}: mining {} by {}", language, to_string(*window), to_string(report.field));

  SearchCriteria criteria;
  criteria.language = language;
  criteria.interval = *window;
  criteria.interval_field = report.field;
  criteria.min_stars = kMinStars;

  std::vector<RepoSummary> leaf_items;
  EnumerationHooks hooks;
  hooks.on_item = [&](const RepoSummary& s, const TimeInterval&) {
    ++report.seen;
    leaf_items.push_back(s);
  };
  hooks.on_leaf_complete = [&](const LeafResult& leaf) {
    std::vector<RepoSummary> admitted;
    for (auto& s : leaf_items) {
      if (admit(s)) admitted.push_back(std::move(s));
    }
    leaf_items.clear();
    report.admitted += static_cast<Count>(admitted.size());

    auto scraped = scrape_all(admitted, now, language);
    std::vector<RepositoryRecord> batch;
    batch.reserve(scraped.size());
    for (auto& s : scraped) {
      if (s.page_error) ++report.page_errors;
      if (s.valid) batch.push_back(std::move(s.record));
    }
    store_.upsert_batch(batch);
    report.persisted += static_cast<Count>(batch.size());

    store_.save_checkpoint(MiningCheckpoint{language, leaf.interval.end, incremental});
    if (leaf_hook_) leaf_hook_(leaf);
  };

  auto counter = [&](const SearchCriteria& c) { return client_.count_matching(c); };
  auto pager = [&](const SearchCriteria& c, int page) { return client_.fetch_page(c, page); };
  EnumerationReport enumeration =
      enumerate(*window, criteria, counter, pager, hooks, options_.limits);

  store_.save_checkpoint(MiningCheckpoint{language, window->end, true});

  report.leaves = enumeration.leaves;
  report.splits = enumeration.splits;
  report.truncated_leaves = enumeration.truncated_leaves;
  report.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - wall_start)
                           .count();
  store_.record_run(report);
  spdlog::info("{}", report_to_json(report).dump());
  return report;
}

}  // namespace ghs
