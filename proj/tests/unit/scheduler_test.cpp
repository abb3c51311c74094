#include <gtest/gtest.h>

#include <thread>

#include "ghs/error.hpp"
#include "ghs/scheduler.hpp"
#include "ghs/sqlite_store.hpp"
#include "rig.hpp"

using namespace ghs;
using namespace ghs::testing;
using namespace std::chrono;

namespace {

const Instant kStart = sys_days{year{2024} / 1 / 1};

}  // namespace

TEST(Schedule, FourCyclesInADay) {
  SqliteStore store(":memory:");
  SimulatedClock clock(kStart);
  SchedulerLease lease(store, clock, "me");
  std::vector<std::pair<std::string, Instant>> passes;
  ScheduleOptions options;
  options.stop_at = kStart + hours{24};
  auto cycles = schedule_loop(
      LanguageConfig({"Java", "Python"}),
      [&](const std::string& l, Instant now) { passes.emplace_back(l, now); }, clock, lease, options);
  ASSERT_EQ(cycles.size(), 4u);
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    EXPECT_EQ(cycles[i].started, kStart + hours{6} * static_cast<int>(i));
    EXPECT_EQ(cycles[i].passes_ok, 2);
  }
  ASSERT_EQ(passes.size(), 8u);
  EXPECT_EQ(passes[0].first, "Java");
  EXPECT_EQ(passes[1].first, "Python");
}

TEST(Schedule, OverrunningPassRunsBackToBack) {
  SqliteStore store(":memory:");
  SimulatedClock clock(kStart);
  SchedulerLease lease(store, clock, "me");
  ScheduleOptions options;
  options.stop_at = kStart + hours{24};
  auto cycles = schedule_loop(
      LanguageConfig({"Java"}), [&](const std::string&, Instant) { clock.sleep_for(hours{7}); },
      clock, lease, options);
  ASSERT_EQ(cycles.size(), 4u);
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    EXPECT_EQ(cycles[i].finished - cycles[i].started, hours{7});
    if (i > 0) {
      EXPECT_EQ(cycles[i].started, cycles[i - 1].finished);
    }
  }
}

TEST(Schedule, MixedDurationsNeverOverlap) {
  SqliteStore store(":memory:");
  SimulatedClock clock(kStart);
  SchedulerLease lease(store, clock, "me");
  ScheduleOptions options;
  options.max_cycles = 12;
  int n = 0;
  auto cycles = schedule_loop(
      LanguageConfig({"Java"}),
      [&](const std::string&, Instant) { clock.sleep_for(hours{(n++ * 5) % 11}); }, clock, lease, options);
  ASSERT_EQ(cycles.size(), 12u);
  for (std::size_t i = 1; i < cycles.size(); ++i) {
    EXPECT_GE(cycles[i].started, cycles[i - 1].finished);
    EXPECT_EQ(cycles[i].started, std::max(cycles[i - 1].finished, cycles[i - 1].started + hours{6}));
  }
}

TEST(Schedule, FailingPassDoesNotStopTheCycle) {
  SqliteStore store(":memory:");
  SimulatedClock clock(kStart);
  SchedulerLease lease(store, clock, "me");
  ScheduleOptions options;
  options.max_cycles = 2;
  std::vector<std::string> ran;
  auto cycles = schedule_loop(
      LanguageConfig({"Java", "Python", "Go"}),
      [&](const std::string& l, Instant) {
        ran.push_back(l);
        if (l == "Python") throw TransientError("backend down");
      },
      clock, lease, options);
  ASSERT_EQ(cycles.size(), 2u);
  EXPECT_EQ(cycles[0].passes_ok, 2);
  EXPECT_EQ(cycles[0].passes_failed, 1);
  EXPECT_EQ(ran.size(), 6u);
}

TEST(Schedule, CancelledPassEndsLoop) {
  SqliteStore store(":memory:");
  SimulatedClock clock(kStart);
  SchedulerLease lease(store, clock, "me");
  auto cycles = schedule_loop(
      LanguageConfig({"Java", "Python"}), [&](const std::string&, Instant) { throw CancelledError(); },
      clock, lease);
  ASSERT_EQ(cycles.size(), 1u);
  EXPECT_EQ(cycles[0].passes_ok, 0);
}

TEST(Lease, SecondSchedulerIsRefused) {
  SqliteStore store(":memory:");
  SimulatedClock clock(kStart);
  SchedulerLease first(store, clock, "first");
  ASSERT_TRUE(first.acquire());
  SchedulerLease second(store, clock, "second");
  EXPECT_FALSE(second.acquire());
  int passes = 0;
  auto cycles = schedule_loop(
      LanguageConfig({"Java"}), [&](const std::string&, Instant) { ++passes; }, clock, second);
  EXPECT_TRUE(cycles.empty());
  EXPECT_EQ(passes, 0);
}

TEST(Lease, ReleasedOnDestruction) {
  SqliteStore store(":memory:");
  SimulatedClock clock(kStart);
  {
    SchedulerLease first(store, clock, "first");
    ASSERT_TRUE(first.acquire());
    EXPECT_TRUE(first.held());
  }
  SchedulerLease second(store, clock, "second");
  EXPECT_TRUE(second.acquire());
}

TEST(Lease, ExpiresWhenHolderStopsRenewing) {
  SqliteStore store(":memory:");
  SimulatedClock clock(kStart);
  SchedulerLease first(store, clock, "first", hours{13});
  ASSERT_TRUE(first.acquire());
  SchedulerLease second(store, clock, "second");
  clock.advance(hours{12});
  EXPECT_FALSE(second.acquire());
  clock.advance(hours{2});
  EXPECT_TRUE(second.acquire());
  EXPECT_FALSE(first.held());
}

TEST(Lease, RevokeWakesSleepingScheduler) {
  SqliteStore store(":memory:");
  SimulatedClock clock(kStart, SimulatedClock::Mode::Manual);
  SchedulerLease lease(store, clock, "me");
  std::vector<CycleRecord> cycles;
  std::thread loop([&] {
    cycles = schedule_loop(LanguageConfig({"Java"}), [](const std::string&, Instant) {}, clock, lease);
  });
  while (clock.sleepers() == 0) std::this_thread::yield();
  lease.revoke();
  loop.join();
  EXPECT_EQ(cycles.size(), 1u);
  EXPECT_FALSE(lease.acquire());
  EXPECT_FALSE(store.lease_holder("scheduler", kStart).has_value());
}

TEST(Lease, LostMidCycleStopsBeforeNextLanguage) {
  SqliteStore store(":memory:");
  SimulatedClock clock(kStart);
  SchedulerLease lease(store, clock, "me");
  std::vector<std::string> ran;
  auto cycles = schedule_loop(
      LanguageConfig({"Java", "Python"}),
      [&](const std::string& l, Instant) {
        ran.push_back(l);
        lease.revoke();
      },
      clock, lease);
  EXPECT_EQ(ran, std::vector<std::string>{"Java"});
  EXPECT_EQ(cycles.size(), 1u);
}

TEST(Schedule, DrivesRealPasses) {
  MiningRig rig(44, small_params(1500));
  SchedulerLease lease(*rig.store, rig.clock, "me");
  ScheduleOptions options;
  options.max_cycles = 3;
  std::vector<MiningReport> reports;
  schedule_loop(
      LanguageConfig({"Java"}),
      [&](const std::string& l, Instant now) { reports.push_back(rig.orchestrator.run_language_pass(l, now)); },
      rig.clock, lease, options);
  ASSERT_EQ(reports.size(), 3u);
  EXPECT_EQ(reports[0].field, IntervalField::Created);
  EXPECT_GT(reports[0].persisted, 0);
  EXPECT_EQ(reports[1].field, IntervalField::Pushed);
  EXPECT_EQ(reports[1].window.start, reports[0].window.end);
  EXPECT_EQ(reports[2].window.start, reports[1].window.end);
}
