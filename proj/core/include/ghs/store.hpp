#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ghs/domain.hpp"

namespace ghs {

enum class UpsertOutcome { Inserted, Updated };

struct PageRequest {
  Count offset = 0;
  Count limit = 100;
};

/// Absent values sort after present ones in either direction; ties break on
/// name so pagination is stable.
struct SortSpec {
  Column column = Column::Stars;
  bool descending = true;
};

/// Throws ValidationError for names outside the 25 columns.
SortSpec parse_sort(const std::string& column, const std::string& direction);

struct QueryResult {
  Count total = 0;
  std::vector<RepositoryRecord> rows;
};

struct LanguageStats {
  std::string language;
  Count records = 0;
  std::optional<MiningReport> last_pass;
};

struct StoreStats {
  Count total = 0;
  std::vector<LanguageStats> languages;  // sorted by language
};

/// Persistent repository snapshots keyed by name, mining checkpoints, pass
/// reports and the scheduler lease. Implementations are safe for one writer
/// and concurrent readers.
class RepositoryStore {
 public:
  virtual ~RepositoryStore() = default;

  /// Inserts or overwrites the snapshot for `record.name`. A page-sourced
  /// characteristic that is absent in `record` keeps its stored value.
  virtual UpsertOutcome upsert(const RepositoryRecord& record) = 0;

  /// Same as upsert for each record, committed atomically.
  virtual std::vector<UpsertOutcome> upsert_batch(std::span<const RepositoryRecord> records) = 0;

  virtual std::optional<RepositoryRecord> find(const std::string& name) const = 0;
  virtual Count size() const = 0;

  /// Throws ValidationError/RangeError on an invalid filter.
  virtual QueryResult query(const RepoFilter& filter, PageRequest page, SortSpec sort) const = 0;
  virtual Count count(const RepoFilter& filter) const = 0;

  /// Streams every match in sort order; the visitor returns false to stop.
  virtual void scan(const RepoFilter& filter, SortSpec sort,
                    const std::function<bool(const RepositoryRecord&)>& visit) const = 0;

  /// Throws CheckpointRegression when moving last_mined_until backwards.
  virtual void save_checkpoint(const MiningCheckpoint& checkpoint) = 0;
  virtual std::optional<MiningCheckpoint> load_checkpoint(const std::string& language) const = 0;
  /// Forgets the checkpoint so the next pass starts from the epoch.
  virtual void reset_checkpoint(const std::string& language) = 0;

  virtual void record_run(const MiningReport& report) = 0;
  virtual StoreStats stats() const = 0;

  virtual bool try_acquire_lease(const std::string& name, const std::string& owner, Instant now,
                                 Seconds ttl) = 0;
  virtual std::optional<std::string> lease_holder(const std::string& name, Instant now) const = 0;
  virtual void release_lease(const std::string& name, const std::string& owner) = 0;
};

/// Opens a store from a target string: a file path or `sqlite:<path>` for the
/// embedded store, `:memory:` for a private in-memory one. Throws
/// UsageError for unsupported schemes and StoreError when opening fails.
std::unique_ptr<RepositoryStore> open_store(const std::string& target);

}  // namespace ghs
