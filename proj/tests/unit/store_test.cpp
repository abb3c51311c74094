#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <thread>

#include "ghs/error.hpp"
#include "ghs/sqlite_store.hpp"
#include "records.hpp"
#include "rig.hpp"

using namespace ghs;
using namespace ghs::testing;
using namespace std::chrono;

namespace {

std::filesystem::path temp_db(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "ghs-store-test";
  std::filesystem::create_directories(dir);
  auto path = dir / (name + "-" + std::to_string(::getpid()) + ".db");
  for (const char* suffix : {"", "-wal", "-shm"}) std::filesystem::remove(path.string() + suffix);
  return path;
}

const Instant kNow = sys_days{year{2024} / 6 / 1};

}  // namespace

TEST(Store, InsertThenUpdate) {
  SqliteStore store(":memory:");
  RepositoryRecord r = sample_record();
  EXPECT_EQ(store.upsert(r), UpsertOutcome::Inserted);
  EXPECT_EQ(store.upsert(r), UpsertOutcome::Updated);
  EXPECT_EQ(store.size(), 1);
  auto back = store.find(r.name);
  ASSERT_TRUE(back);
  EXPECT_EQ(*back, r);
  EXPECT_FALSE(store.find("nobody/nothing").has_value());
}

TEST(Store, RejectsInvalidRecords) {
  SqliteStore store(":memory:");
  RepositoryRecord r = sample_record();
  r.name = "not-a-repo";
  EXPECT_THROW(store.upsert(r), ValidationError);
  r = sample_record();
  r.open_issues = 5000;
  EXPECT_THROW(store.upsert(r), ValidationError);
  EXPECT_EQ(store.size(), 0);
}

TEST(Store, AbsentPageValuesKeepStoredOnes) {
  SqliteStore store(":memory:");
  RepositoryRecord first = sample_record();
  store.upsert(first);

  RepositoryRecord second = first;
  second.stars = 9999;
  second.homepage.reset();
  second.commits.reset();
  second.total_pull_requests.reset();
  second.open_pull_requests.reset();
  second.watchers = 0;
  store.upsert(second);

  auto back = *store.find(first.name);
  EXPECT_EQ(back.stars, 9999);
  EXPECT_FALSE(back.homepage.has_value());
  EXPECT_EQ(back.commits, first.commits);
  EXPECT_EQ(back.total_pull_requests, first.total_pull_requests);
  EXPECT_EQ(back.open_pull_requests, first.open_pull_requests);
  EXPECT_EQ(back.watchers, 0);
}

TEST(Store, PartialRescrapeNeverBreaksOpenTotalInvariant) {
  SqliteStore store(":memory:");
  RepositoryRecord r = sample_record();
  r.total_issues = 10;
  r.open_issues = 2;
  store.upsert(r);
  r.total_issues.reset();
  r.open_issues = 50;
  store.upsert(r);
  auto back = *store.find(r.name);
  EXPECT_EQ(back.open_issues, 50);
  EXPECT_FALSE(back.total_issues.has_value());
}

TEST(Store, BatchIsIdempotent) {
  SqliteStore store(":memory:");
  auto records = random_records(4, 500);
  auto first = store.upsert_batch(records);
  EXPECT_EQ(std::count(first.begin(), first.end(), UpsertOutcome::Inserted), 500);
  auto second = store.upsert_batch(records);
  EXPECT_EQ(std::count(second.begin(), second.end(), UpsertOutcome::Updated), 500);
  EXPECT_EQ(store.size(), 500);
}

TEST(Store, BatchIsAtomic) {
  SqliteStore store(":memory:");
  auto records = random_records(5, 10);
  records[7].name = "broken";
  EXPECT_THROW(store.upsert_batch(records), ValidationError);
  EXPECT_EQ(store.size(), 0);
}

TEST(Store, FilterEquivalenceWithBruteForce) {
  SqliteStore store(":memory:");
  auto records = random_records(21, 3000);
  store.upsert_batch(records);
  std::mt19937_64 rng(99);
  for (int i = 0; i < 200; ++i) {
    RepoFilter f = random_filter(rng);
    SortSpec sort{columns()[std::uniform_int_distribution<std::size_t>(0, kColumnCount - 1)(rng)].column,
                  std::bernoulli_distribution(0.5)(rng)};
    auto expected = oracle_query(records, f, sort);
    EXPECT_EQ(store.count(f), static_cast<Count>(expected.size())) << i;
    Count offset = std::uniform_int_distribution<Count>(0, 40)(rng);
    auto page = store.query(f, PageRequest{offset, 25}, sort);
    EXPECT_EQ(page.total, static_cast<Count>(expected.size()));
    std::vector<std::string> want;
    for (std::size_t k = static_cast<std::size_t>(offset); k < expected.size() && want.size() < 25; ++k) {
      want.push_back(expected[k].name);
    }
    EXPECT_EQ(names_of(page.rows), want) << "filter " << i << " sort " << column_info(sort.column).name;
  }
}

TEST(Store, PaginationCoversEveryRowOnce) {
  SqliteStore store(":memory:");
  auto records = random_records(8, 777);
  store.upsert_batch(records);
  for (Column c : {Column::Stars, Column::License, Column::LastCommit, Column::Name, Column::Archived}) {
    for (bool desc : {true, false}) {
      std::vector<std::string> paged;
      for (Count off = 0;; off += 100) {
        auto page = store.query({}, PageRequest{off, 100}, SortSpec{c, desc});
        if (page.rows.empty()) break;
        for (const auto& r : page.rows) paged.push_back(r.name);
      }
      std::vector<std::string> scanned;
      store.scan({}, SortSpec{c, desc}, [&](const RepositoryRecord& r) {
        scanned.push_back(r.name);
        return true;
      });
      EXPECT_EQ(paged, scanned);
      EXPECT_EQ(paged, names_of(oracle_query(records, {}, SortSpec{c, desc})));
    }
  }
}

TEST(Store, AbsentSortsLastBothWays) {
  SqliteStore store(":memory:");
  RepositoryRecord a = sample_record("o/a");
  RepositoryRecord b = sample_record("o/b");
  RepositoryRecord c = sample_record("o/c");
  a.stars = 5;
  b.stars.reset();
  c.stars = 50;
  store.upsert_batch(std::vector{a, b, c});
  auto names = [&](bool desc) {
    return names_of(store.query({}, {}, SortSpec{Column::Stars, desc}).rows);
  };
  EXPECT_EQ(names(true), (std::vector<std::string>{"o/c", "o/a", "o/b"}));
  EXPECT_EQ(names(false), (std::vector<std::string>{"o/a", "o/c", "o/b"}));
}

TEST(Store, ScanStopsEarly) {
  SqliteStore store(":memory:");
  store.upsert_batch(random_records(3, 50));
  int visited = 0;
  store.scan({}, {}, [&](const RepositoryRecord&) { return ++visited < 5; });
  EXPECT_EQ(visited, 5);
}

TEST(Store, InvalidFilterIsRangeError) {
  SqliteStore store(":memory:");
  RepoFilter f;
  f.commits.min = 10;
  f.commits.max = 1;
  EXPECT_THROW(store.query(f, {}, {}), RangeError);
  EXPECT_THROW(store.count(f), RangeError);
}

TEST(Store, ParseSort) {
  EXPECT_EQ(parse_sort("stars", "desc").column, Column::Stars);
  EXPECT_FALSE(parse_sort("name", "asc").descending);
  EXPECT_THROW(parse_sort("stargazers", "desc"), ValidationError);
  EXPECT_THROW(parse_sort("stars", "sideways"), ValidationError);
}

TEST(Checkpoints, SaveLoadRegressReset) {
  SqliteStore store(":memory:");
  EXPECT_FALSE(store.load_checkpoint("Java").has_value());
  MiningCheckpoint cp{"Java", kNow - hours{5}, false};
  store.save_checkpoint(cp);
  EXPECT_EQ(store.load_checkpoint("Java"), cp);
  cp.last_mined_until = kNow - hours{3};
  cp.completed_initial_pass = true;
  store.save_checkpoint(cp);
  EXPECT_EQ(store.load_checkpoint("Java"), cp);
  MiningCheckpoint back{"Java", kNow - hours{4}, true};
  EXPECT_THROW(store.save_checkpoint(back), CheckpointRegression);
  EXPECT_FALSE(store.load_checkpoint("Python").has_value());
  store.reset_checkpoint("Java");
  EXPECT_FALSE(store.load_checkpoint("Java").has_value());
  store.save_checkpoint(back);
}

TEST(Stats, RecordsAndLastPass) {
  SqliteStore store(":memory:");
  auto s0 = store.stats();
  EXPECT_EQ(s0.total, 0);
  EXPECT_TRUE(s0.languages.empty());

  RepositoryRecord j = sample_record("o/j");
  RepositoryRecord p = sample_record("o/p");
  p.main_language = "Python";
  store.upsert_batch(std::vector{j, p});
  MiningReport report;
  report.language = "Java";
  report.window = TimeInterval::make(kForgeEpoch, kNow);
  report.persisted = 1;
  report.started_at = kNow;
  store.record_run(report);
  auto s = store.stats();
  EXPECT_EQ(s.total, 2);
  ASSERT_EQ(s.languages.size(), 2u);
  EXPECT_EQ(s.languages[0].language, "Java");
  EXPECT_EQ(s.languages[0].records, 1);
  ASSERT_TRUE(s.languages[0].last_pass);
  EXPECT_EQ(s.languages[0].last_pass->persisted, 1);
  EXPECT_EQ(s.languages[1].language, "Python");
  EXPECT_FALSE(s.languages[1].last_pass.has_value());
}

TEST(Lease, ExclusiveUntilExpiry) {
  SqliteStore store(":memory:");
  EXPECT_TRUE(store.try_acquire_lease("scheduler", "a", kNow, hours{1}));
  EXPECT_TRUE(store.try_acquire_lease("scheduler", "a", kNow + minutes{5}, hours{1}));
  EXPECT_FALSE(store.try_acquire_lease("scheduler", "b", kNow + minutes{30}, hours{1}));
  EXPECT_EQ(store.lease_holder("scheduler", kNow + minutes{30}), "a");
  EXPECT_TRUE(store.try_acquire_lease("scheduler", "b", kNow + hours{2}, hours{1}));
  store.release_lease("scheduler", "a");
  EXPECT_EQ(store.lease_holder("scheduler", kNow + hours{2}), "b");
  store.release_lease("scheduler", "b");
  EXPECT_FALSE(store.lease_holder("scheduler", kNow + hours{2}).has_value());
}

TEST(OpenStore, Targets) {
  EXPECT_NE(open_store(":memory:"), nullptr);
  auto path = temp_db("open");
  EXPECT_NE(open_store("sqlite:" + path.string()), nullptr);
  EXPECT_THROW(open_store("postgres://db/ghs"), UsageError);
  EXPECT_THROW(open_store("/nonexistent-dir/x/y.db"), StoreError);
}

TEST(OpenStore, FilePersistsAcrossReopen) {
  auto path = temp_db("reopen");
  {
    auto store = open_store(path.string());
    store->upsert(sample_record());
    store->save_checkpoint({"Java", kNow, true});
  }
  auto store = open_store(path.string());
  EXPECT_EQ(store->size(), 1);
  EXPECT_EQ(store->load_checkpoint("Java")->last_mined_until, kNow);
}

TEST(OpenStore, ReaderSeesWriterProgress) {
  auto path = temp_db("wal");
  auto writer = open_store(path.string());
  auto reader = open_store(path.string());
  auto records = random_records(12, 2000);
  std::atomic<bool> done{false};
  std::thread t([&] {
    for (std::size_t i = 0; i < records.size(); i += 100) {
      writer->upsert_batch(std::span(records).subspan(i, 100));
    }
    done = true;
  });
  Count last = 0;
  while (!done.load()) {
    Count now = reader->size();
    EXPECT_EQ(now % 100, 0);
    EXPECT_GE(now, last);
    last = now;
  }
  t.join();
  EXPECT_EQ(reader->size(), 2000);
}
