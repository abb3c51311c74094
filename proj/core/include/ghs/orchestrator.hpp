#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ghs/domain.hpp"
#include "ghs/forge_client.hpp"
#include "ghs/interval_planner.hpp"
#include "ghs/page_extractor.hpp"
#include "ghs/store.hpp"

namespace ghs {

/// The administrator-defined set of languages to mine.
class LanguageConfig {
 public:
  /// Throws ValidationError when empty or when a name repeats.
  explicit LanguageConfig(std::vector<std::string> languages);

  /// Python, Java, C++, C, C#, Objective-C, JavaScript, TypeScript, Swift, Kotlin.
  static LanguageConfig defaults();

  /// One language per line (blank lines and '#' comments skipped), or a
  /// JSON list / {"languages": [...]} document.
  static LanguageConfig load(const std::filesystem::path& path);

  const std::vector<std::string>& languages() const { return languages_; }
  bool contains(const std::string& language) const;

 private:
  std::vector<std::string> languages_;
};

bool admit(const RepoSummary& summary);

/// API summary + scraped page metrics → stored record. Throws
/// ValidationError when the combination breaks a record invariant.
RepositoryRecord fuse(const RepoSummary& summary, const PageMetrics& pages,
                      Instant crawled_at, const std::string& queried_language = {});

struct OrchestratorOptions {
  IntervalField initial_field = IntervalField::Created;
  IntervalField incremental_field = IntervalField::Pushed;
  int scrape_workers = 8;
  PlannerLimits limits{};
};

/// Runs mining passes: seeds the window from the checkpoint, enumerates the
/// search results, scrapes and upserts each admitted repository, and
/// advances the checkpoint leaf by leaf.
class MiningOrchestrator {
 public:
  MiningOrchestrator(ForgeClient& client, PageScraper& scraper, RepositoryStore& store,
                     LanguageConfig languages, OrchestratorOptions options = {});

  /// Throws UsageError for languages outside the config; StoreError aborts
  /// the pass with the checkpoint left at the last fully persisted leaf.
  MiningReport run_language_pass(const std::string& language, Instant now);

  /// Called after each leaf is persisted and checkpointed.
  void on_leaf_persisted(std::function<void(const LeafResult&)> hook) {
    leaf_hook_ = std::move(hook);
  }

  const LanguageConfig& languages() const { return languages_; }

 private:
  struct Scraped {
    RepositoryRecord record;
    bool page_error = false;
    bool valid = true;
  };

  std::vector<Scraped> scrape_all(const std::vector<RepoSummary>& admitted, Instant now,
                                  const std::string& language);

  ForgeClient& client_;
  PageScraper& scraper_;
  RepositoryStore& store_;
  LanguageConfig languages_;
  OrchestratorOptions options_;
  std::function<void(const LeafResult&)> leaf_hook_;
};

}  // namespace ghs
