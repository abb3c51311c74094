#pragma once

#include <mutex>
#include <string>
#include <unordered_map>

#include "ghs/store.hpp"

struct sqlite3;
struct sqlite3_stmt;

namespace ghs {

/// Embedded single-file store. Filters are compiled to SQL; WAL mode lets a
/// separate serving process read while the miner writes.
class SqliteStore final : public RepositoryStore {
 public:
  /// `path` may be ":memory:". Throws StoreError.
  explicit SqliteStore(const std::string& path);
  ~SqliteStore() override;

  SqliteStore(const SqliteStore&) = delete;
  SqliteStore& operator=(const SqliteStore&) = delete;

  UpsertOutcome upsert(const RepositoryRecord& record) override;
  std::vector<UpsertOutcome> upsert_batch(std::span<const RepositoryRecord> records) override;
  std::optional<RepositoryRecord> find(const std::string& name) const override;
  Count size() const override;

  QueryResult query(const RepoFilter& filter, PageRequest page, SortSpec sort) const override;
  Count count(const RepoFilter& filter) const override;
  void scan(const RepoFilter& filter, SortSpec sort,
            const std::function<bool(const RepositoryRecord&)>& visit) const override;

  void save_checkpoint(const MiningCheckpoint& checkpoint) override;
  std::optional<MiningCheckpoint> load_checkpoint(const std::string& language) const override;
  void reset_checkpoint(const std::string& language) override;

  void record_run(const MiningReport& report) override;
  StoreStats stats() const override;

  bool try_acquire_lease(const std::string& name, const std::string& owner, Instant now,
                         Seconds ttl) override;
  std::optional<std::string> lease_holder(const std::string& name, Instant now) const override;
  void release_lease(const std::string& name, const std::string& owner) override;

 private:
  void exec(const char* sql) const;
  /// Prepared once per store and reused; callers hold the mutex.
  sqlite3_stmt* prepared(const std::string& sql) const;
  UpsertOutcome upsert_locked(const RepositoryRecord& record);
  std::optional<RepositoryRecord> find_locked(const std::string& name) const;

  sqlite3* db_ = nullptr;
  mutable std::unordered_map<std::string, sqlite3_stmt*> statements_;
  mutable std::recursive_mutex mutex_;
};

}  // namespace ghs
