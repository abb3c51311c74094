#include "ghs/sqlite_store.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <variant>

#include <nlohmann/json.hpp>
#include <sqlite3.h>

#include "ghs/error.hpp"
#include "ghs/page_extractor.hpp"

namespace ghs {

namespace {

using Param = std::variant<std::monostate, std::int64_t, std::string>;

class Statement {
 public:
  Statement(sqlite3* db, const std::string& sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql.c_str(), static_cast<int>(sql.size()), &stmt_, nullptr) !=
        SQLITE_OK) {
      throw StoreError(std::string{"prepare failed: "} + sqlite3_errmsg(db) + " in: " + sql);
    }
  }
  /// Borrows a cached statement; it is reset instead of finalized.
  Statement(sqlite3* db, sqlite3_stmt* cached) : db_(db), stmt_(cached), owned_(false) {}
  ~Statement() {
    if (owned_) {
      sqlite3_finalize(stmt_);
    } else {
      sqlite3_reset(stmt_);
      sqlite3_clear_bindings(stmt_);
    }
  }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  void bind(int index, const Param& p) {
    int rc = SQLITE_OK;
    if (std::holds_alternative<std::monostate>(p)) {
      rc = sqlite3_bind_null(stmt_, index);
    } else if (auto* n = std::get_if<std::int64_t>(&p)) {
      rc = sqlite3_bind_int64(stmt_, index, *n);
    } else {
      const auto& s = std::get<std::string>(p);
      rc = sqlite3_bind_text(stmt_, index, s.data(), static_cast<int>(s.size()), SQLITE_TRANSIENT);
    }
    if (rc != SQLITE_OK) throw StoreError(std::string{"bind failed: "} + sqlite3_errmsg(db_));
  }

  void bind_all(const std::vector<Param>& params) {
    for (std::size_t i = 0; i < params.size(); ++i) bind(static_cast<int>(i + 1), params[i]);
  }

  /// true while a row is available
  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw StoreError(std::string{"step failed: "} + sqlite3_errmsg(db_));
  }

  void reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }

  bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
  std::string text(int col) const {
    auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p == nullptr ? std::string{} : std::string{p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))};
  }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
  bool owned_ = true;
};

std::string column_list() {
  std::string out;
  for (const auto& info : columns()) {
    if (!out.empty()) out += ", ";
    out += info.name;
  }
  out += ", last_crawled_at";
  return out;
}

const std::string& select_columns() {
  static const std::string kColumns = column_list();
  return kColumns;
}

Param to_param(const FieldValue& v) {
  return std::visit(
      [](const auto& x) -> Param {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return std::monostate{};
        else if constexpr (std::is_same_v<T, Count>) return std::int64_t{x};
        else if constexpr (std::is_same_v<T, std::string>) return x;
        else if constexpr (std::is_same_v<T, Instant>) return std::int64_t{x.time_since_epoch().count()};
        else return std::int64_t{x ? 1 : 0};
      },
      v);
}

Instant from_epoch(std::int64_t s) { return Instant{Seconds{s}}; }

RepositoryRecord read_row(const Statement& st) {
  RepositoryRecord r;
  int col = 0;
  for (const auto& info : columns()) {
    FieldValue v = std::monostate{};
    if (!st.is_null(col)) {
      switch (info.kind) {
        case ColumnKind::Text: v = st.text(col); break;
        case ColumnKind::Count: v = Count{st.integer(col)}; break;
        case ColumnKind::Time: v = from_epoch(st.integer(col)); break;
        case ColumnKind::Flag: v = st.integer(col) != 0; break;
      }
    }
    set_field(r, info.column, std::move(v));
    ++col;
  }
  if (!st.is_null(col)) r.last_crawled_at = from_epoch(st.integer(col));
  return r;
}

std::string ascii_lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct WhereClause {
  std::string sql;
  std::vector<Param> params;
};

WhereClause compile(const RepoFilter& f) {
  check_filter(f);
  std::vector<std::string> parts;
  WhereClause w;
  if (f.name_contains) {
    parts.emplace_back("instr(lower(name), ?) > 0");
    w.params.emplace_back(ascii_lower(*f.name_contains));
  }
  if (f.license_equals) {
    parts.emplace_back("lower(license) = ?");
    w.params.emplace_back(ascii_lower(*f.license_equals));
  }
  if (f.language_equals) {
    parts.emplace_back("lower(main_language) = ?");
    w.params.emplace_back(ascii_lower(*f.language_equals));
  }
  for (const auto& field : count_filter_fields()) {
    const CountRange& r = f.*field.range;
    std::string col{column_info(field.column).name};
    if (r.min) {
      parts.push_back(col + " >= ?");
      w.params.emplace_back(std::int64_t{*r.min});
    }
    if (r.max) {
      parts.push_back(col + " <= ?");
      w.params.emplace_back(std::int64_t{*r.max});
    }
  }
  for (const auto& field : instant_filter_fields()) {
    const InstantRange& r = f.*field.range;
    std::string col{column_info(field.column).name};
    if (r.min) {
      parts.push_back(col + " >= ?");
      w.params.emplace_back(std::int64_t{r.min->time_since_epoch().count()});
    }
    if (r.max) {
      parts.push_back(col + " <= ?");
      w.params.emplace_back(std::int64_t{r.max->time_since_epoch().count()});
    }
  }
  if (f.exclude_forks) parts.emplace_back("coalesce(is_fork_project, 0) = 0");
  if (f.only_with_license) parts.emplace_back("license IS NOT NULL");
  if (f.only_with_open_issues) parts.emplace_back("open_issues > 0");
  if (f.exclude_archived) parts.emplace_back("coalesce(archived, 0) = 0");

  for (const auto& p : parts) {
    w.sql += w.sql.empty() ? " WHERE " : " AND ";
    w.sql += p;
  }
  return w;
}

std::string order_by(SortSpec sort) {
  std::string col{column_info(sort.column).name};
  std::string dir = sort.descending ? "DESC" : "ASC";
  if (sort.column == Column::Name) return " ORDER BY name " + dir;
  return " ORDER BY (" + col + " IS NULL), " + col + " " + dir + ", name ASC";
}

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS repositories (
  name TEXT PRIMARY KEY NOT NULL,
  commits INTEGER,
  last_commits_sha TEXT,
  last_commits INTEGER,
  license TEXT,
  branches INTEGER,
  default_branch TEXT,
  contributors INTEGER,
  releases INTEGER,
  watchers INTEGER,
  stars INTEGER,
  forks INTEGER,
  is_fork_project INTEGER,
  size INTEGER,
  created_at INTEGER NOT NULL,
  pushed_at INTEGER,
  updated_at INTEGER,
  homepage TEXT,
  main_language TEXT NOT NULL,
  total_issues INTEGER,
  open_issues INTEGER,
  total_pull_requests INTEGER,
  open_pull_requests INTEGER,
  has_wiki INTEGER,
  archived INTEGER,
  last_crawled_at INTEGER
);
CREATE INDEX IF NOT EXISTS repositories_language ON repositories(main_language);
CREATE INDEX IF NOT EXISTS repositories_stars ON repositories(stars);
CREATE INDEX IF NOT EXISTS repositories_commits ON repositories(commits);
CREATE TABLE IF NOT EXISTS checkpoints (
  language TEXT PRIMARY KEY NOT NULL,
  last_mined_until INTEGER NOT NULL,
  completed_initial_pass INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS mining_runs (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  language TEXT NOT NULL,
  started_at INTEGER NOT NULL,
  report TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS leases (
  name TEXT PRIMARY KEY NOT NULL,
  owner TEXT NOT NULL,
  expires_at INTEGER NOT NULL
);
)sql";

class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) { run("BEGIN IMMEDIATE"); }
  ~Transaction() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    run("COMMIT");
    done_ = true;
  }

 private:
  void run(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err != nullptr ? err : "unknown";
      sqlite3_free(err);
      throw StoreError(std::string{sql} + " failed: " + msg);
    }
  }
  sqlite3* db_;
  bool done_ = false;
};

}  // namespace

SortSpec parse_sort(const std::string& column, const std::string& direction) {
  SortSpec s;
  if (!column.empty()) {
    auto c = column_by_name(column);
    if (!c) throw ValidationError("sort", "unknown column '" + column + "'");
    s.column = *c;
  }
  if (direction.empty()) {
    s.descending = column.empty() ? true : s.column != Column::Name;
  } else if (direction == "asc") {
    s.descending = false;
  } else if (direction == "desc") {
    s.descending = true;
  } else {
    throw ValidationError("direction", "expected asc or desc");
  }
  return s;
}

SqliteStore::SqliteStore(const std::string& path) {
  if (sqlite3_open_v2(path.c_str(), &db_,
                      SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    std::string msg = db_ != nullptr ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw StoreError("cannot open store '" + path + "': " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  if (path != ":memory:") exec("PRAGMA journal_mode=WAL");
  exec("PRAGMA synchronous=NORMAL");
  exec(kSchema);
}

SqliteStore::~SqliteStore() {
  for (auto& [_, stmt] : statements_) sqlite3_finalize(stmt);
  sqlite3_close(db_);
}

sqlite3_stmt* SqliteStore::prepared(const std::string& sql) const {
  auto it = statements_.find(sql);
  if (it != statements_.end()) return it->second;
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v3(db_, sql.c_str(), static_cast<int>(sql.size()), SQLITE_PREPARE_PERSISTENT,
                         &stmt, nullptr) != SQLITE_OK) {
    throw StoreError(std::string{"prepare failed: "} + sqlite3_errmsg(db_) + " in: " + sql);
  }
  statements_.emplace(sql, stmt);
  return stmt;
}

void SqliteStore::exec(const char* sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err != nullptr ? err : "unknown";
    sqlite3_free(err);
    throw StoreError(msg);
  }
}

std::optional<RepositoryRecord> SqliteStore::find_locked(const std::string& name) const {
  Statement st(db_, prepared("SELECT " + select_columns() + " FROM repositories WHERE name = ?"));
  st.bind(1, name);
  if (!st.step()) return std::nullopt;
  return read_row(st);
}

std::optional<RepositoryRecord> SqliteStore::find(const std::string& name) const {
  std::lock_guard lock(mutex_);
  return find_locked(name);
}

UpsertOutcome SqliteStore::upsert_locked(const RepositoryRecord& incoming) {
  check_record(incoming);
  auto existing = find_locked(incoming.name);
  RepositoryRecord merged = incoming;
  if (existing) {
    for (Column c : page_columns()) {
      FieldValue v = get_field(merged, c);
      if (std::holds_alternative<std::monostate>(v)) set_field(merged, c, get_field(*existing, c));
    }
    // keep the open <= total invariant if only one side was rescraped
    if (merged.open_issues && merged.total_issues && *merged.open_issues > *merged.total_issues) {
      merged.total_issues = incoming.total_issues;
      merged.open_issues = incoming.open_issues;
    }
    if (merged.open_pull_requests && merged.total_pull_requests &&
        *merged.open_pull_requests > *merged.total_pull_requests) {
      merged.total_pull_requests = incoming.total_pull_requests;
      merged.open_pull_requests = incoming.open_pull_requests;
    }
  }

  static const std::string kUpsert = [] {
    std::string names = select_columns();
    std::string marks;
    std::string updates;
    for (std::size_t i = 0; i < kColumnCount + 1; ++i) marks += i == 0 ? "?" : ", ?";
    for (const auto& info : columns()) {
      if (info.column == Column::Name) continue;
      if (!updates.empty()) updates += ", ";
      updates += std::string{info.name} + " = excluded." + std::string{info.name};
    }
    updates += ", last_crawled_at = excluded.last_crawled_at";
    return "INSERT INTO repositories (" + names + ") VALUES (" + marks +
           ") ON CONFLICT(name) DO UPDATE SET " + updates;
  }();

  Statement st(db_, prepared(kUpsert));
  int index = 1;
  for (const auto& info : columns()) st.bind(index++, to_param(get_field(merged, info.column)));
  st.bind(index, merged.last_crawled_at
                     ? Param{std::int64_t{merged.last_crawled_at->time_since_epoch().count()}}
                     : Param{});
  st.step();
  return existing ? UpsertOutcome::Updated : UpsertOutcome::Inserted;
}

UpsertOutcome SqliteStore::upsert(const RepositoryRecord& record) {
  std::lock_guard lock(mutex_);
  Transaction tx(db_);
  auto outcome = upsert_locked(record);
  tx.commit();
  return outcome;
}

std::vector<UpsertOutcome> SqliteStore::upsert_batch(std::span<const RepositoryRecord> records) {
  std::lock_guard lock(mutex_);
  std::vector<UpsertOutcome> out;
  out.reserve(records.size());
  Transaction tx(db_);
  for (const auto& r : records) out.push_back(upsert_locked(r));
  tx.commit();
  return out;
}

Count SqliteStore::size() const {
  std::lock_guard lock(mutex_);
  Statement st(db_, prepared("SELECT COUNT(*) FROM repositories"));
  st.step();
  return st.integer(0);
}

Count SqliteStore::count(const RepoFilter& filter) const {
  WhereClause w = compile(filter);
  std::lock_guard lock(mutex_);
  Statement st(db_, "SELECT COUNT(*) FROM repositories" + w.sql);
  st.bind_all(w.params);
  st.step();
  return st.integer(0);
}

QueryResult SqliteStore::query(const RepoFilter& filter, PageRequest page, SortSpec sort) const {
  if (page.offset < 0) throw ValidationError("page", "negative offset");
  if (page.limit < 0) throw ValidationError("size", "negative limit");
  WhereClause w = compile(filter);
  std::lock_guard lock(mutex_);
  // one read transaction so total and rows see the same snapshot
  exec("BEGIN");
  QueryResult result;
  try {
    {
      Statement st(db_, "SELECT COUNT(*) FROM repositories" + w.sql);
      st.bind_all(w.params);
      st.step();
      result.total = st.integer(0);
    }
    Statement st(db_, "SELECT " + select_columns() + " FROM repositories" + w.sql +
                          order_by(sort) + " LIMIT ? OFFSET ?");
    auto params = w.params;
    params.emplace_back(std::int64_t{page.limit});
    params.emplace_back(std::int64_t{page.offset});
    st.bind_all(params);
    while (st.step()) result.rows.push_back(read_row(st));
  } catch (...) {
    exec("ROLLBACK");
    throw;
  }
  exec("COMMIT");
  return result;
}

void SqliteStore::scan(const RepoFilter& filter, SortSpec sort,
                       const std::function<bool(const RepositoryRecord&)>& visit) const {
  WhereClause w = compile(filter);
  std::lock_guard lock(mutex_);
  Statement st(db_, "SELECT " + select_columns() + " FROM repositories" + w.sql + order_by(sort));
  st.bind_all(w.params);
  while (st.step()) {
    if (!visit(read_row(st))) break;
  }
}

void SqliteStore::save_checkpoint(const MiningCheckpoint& cp) {
  if (cp.language.empty()) throw ValidationError("language", "required");
  if (cp.last_mined_until < kForgeEpoch) {
    throw ValidationError("last_mined_until", "precedes the forge epoch");
  }
  std::lock_guard lock(mutex_);
  Transaction tx(db_);
  bool completed = cp.completed_initial_pass;
  {
    Statement st(db_, prepared("SELECT last_mined_until, completed_initial_pass FROM checkpoints WHERE language = ?"));
    st.bind(1, cp.language);
    if (st.step()) {
      Instant stored = from_epoch(st.integer(0));
      if (cp.last_mined_until < stored) {
        throw CheckpointRegression("checkpoint for " + cp.language + " would move back from " +
                                   format_instant(stored) + " to " +
                                   format_instant(cp.last_mined_until));
      }
      completed = completed || st.integer(1) != 0;
    }
  }
  Statement st(db_,
               prepared("INSERT INTO checkpoints (language, last_mined_until, completed_initial_pass) "
                        "VALUES (?, ?, ?) ON CONFLICT(language) DO UPDATE SET "
                        "last_mined_until = excluded.last_mined_until, "
                        "completed_initial_pass = excluded.completed_initial_pass"));
  st.bind_all({cp.language, std::int64_t{cp.last_mined_until.time_since_epoch().count()},
               std::int64_t{completed ? 1 : 0}});
  st.step();
  tx.commit();
}

std::optional<MiningCheckpoint> SqliteStore::load_checkpoint(const std::string& language) const {
  std::lock_guard lock(mutex_);
  Statement st(db_,
               "SELECT last_mined_until, completed_initial_pass FROM checkpoints WHERE language = ?");
  st.bind(1, language);
  if (!st.step()) return std::nullopt;
  return MiningCheckpoint{language, from_epoch(st.integer(0)), st.integer(1) != 0};
}

void SqliteStore::reset_checkpoint(const std::string& language) {
  std::lock_guard lock(mutex_);
  Statement st(db_, prepared("DELETE FROM checkpoints WHERE language = ?"));
  st.bind(1, language);
  st.step();
}

void SqliteStore::record_run(const MiningReport& report) {
  std::lock_guard lock(mutex_);
  Statement st(db_, prepared("INSERT INTO mining_runs (language, started_at, report) VALUES (?, ?, ?)"));
  st.bind_all({report.language, std::int64_t{report.started_at.time_since_epoch().count()},
               report_to_json(report).dump()});
  st.step();
}

StoreStats SqliteStore::stats() const {
  std::lock_guard lock(mutex_);
  std::map<std::string, LanguageStats> by_language;
  StoreStats out;
  {
    Statement st(db_, prepared("SELECT main_language, COUNT(*) FROM repositories GROUP BY main_language"));
    while (st.step()) {
      auto& s = by_language[st.text(0)];
      s.language = st.text(0);
      s.records = st.integer(1);
      out.total += s.records;
    }
  }
  {
    Statement st(db_,
                 "SELECT language, report FROM mining_runs WHERE id IN "
                 "(SELECT MAX(id) FROM mining_runs GROUP BY language)");
    while (st.step()) {
      auto& s = by_language[st.text(0)];
      s.language = st.text(0);
      s.last_pass = report_from_json(nlohmann::json::parse(st.text(1)));
    }
  }
  for (auto& [_, s] : by_language) out.languages.push_back(std::move(s));
  return out;
}

bool SqliteStore::try_acquire_lease(const std::string& name, const std::string& owner,
                                    Instant now, Seconds ttl) {
  std::lock_guard lock(mutex_);
  Transaction tx(db_);
  {
    Statement st(db_, prepared("SELECT owner, expires_at FROM leases WHERE name = ?"));
    st.bind(1, name);
    if (st.step()) {
      bool expired = from_epoch(st.integer(1)) <= now;
      if (st.text(0) != owner && !expired) return false;
    }
  }
  Statement st(db_,
               "INSERT INTO leases (name, owner, expires_at) VALUES (?, ?, ?) "
               "ON CONFLICT(name) DO UPDATE SET owner = excluded.owner, "
               "expires_at = excluded.expires_at");
  st.bind_all({name, owner, std::int64_t{(now + ttl).time_since_epoch().count()}});
  st.step();
  tx.commit();
  return true;
}

std::optional<std::string> SqliteStore::lease_holder(const std::string& name, Instant now) const {
  std::lock_guard lock(mutex_);
  Statement st(db_, prepared("SELECT owner, expires_at FROM leases WHERE name = ?"));
  st.bind(1, name);
  if (!st.step()) return std::nullopt;
  if (from_epoch(st.integer(1)) <= now) return std::nullopt;
  return st.text(0);
}

void SqliteStore::release_lease(const std::string& name, const std::string& owner) {
  std::lock_guard lock(mutex_);
  Statement st(db_, prepared("DELETE FROM leases WHERE name = ? AND owner = ?"));
  st.bind_all({name, owner});
  st.step();
}

std::unique_ptr<RepositoryStore> open_store(const std::string& target) {
  if (target.empty()) throw UsageError("store target is empty");
  std::string path = target;
  if (path.rfind("sqlite:", 0) == 0) {
    path = path.substr(7);
  } else if (path.find("://") != std::string::npos) {
    throw UsageError("unsupported store target '" + target +
                     "' (this build ships the embedded store only)");
  }
  return std::make_unique<SqliteStore>(path);
}

}  // namespace ghs
