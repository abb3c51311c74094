#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "ghs/clock.hpp"
#include "ghs/time.hpp"

using namespace ghs;
using namespace std::chrono;

TEST(ParseInstant, AcceptedForms) {
  const Instant day = sys_days{year{2020} / 3 / 1};
  EXPECT_EQ(parse_instant("2020-03-01"), day);
  EXPECT_EQ(parse_instant("2020-03-01T00:00:00Z"), day);
  EXPECT_EQ(parse_instant("2020-03-01T12:30:05Z"), day + hours{12} + minutes{30} + seconds{5});
  EXPECT_EQ(parse_instant("2020-03-01T12:30:05+00:00"), day + hours{12} + minutes{30} + seconds{5});
  EXPECT_EQ(parse_instant("2020-03-01T12:30:05.999Z"), day + hours{12} + minutes{30} + seconds{5});
  EXPECT_EQ(parse_instant("2020-03-01 00:00:01"), day + seconds{1});
}

TEST(ParseInstant, Rejected) {
  for (const char* bad : {"", "2020", "2020-3-1", "2020-02-30", "2020-13-01", "2020-03-01T25:00:00Z",
                          "2020-03-01T12:00Z", "2020-03-01T12:00:00+02:00", "2020-03-01T12:00:00.Z",
                          "yesterday"}) {
    EXPECT_FALSE(parse_instant(bad).has_value()) << bad;
  }
}

TEST(ParseInstant, ReportsDateOnly) {
  bool date_only = false;
  ASSERT_TRUE(parse_instant("2021-01-01", date_only));
  EXPECT_TRUE(date_only);
  ASSERT_TRUE(parse_instant("2021-01-01T00:00:00Z", date_only));
  EXPECT_FALSE(date_only);
}

TEST(FormatInstant, RoundTrips) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> secs(0, 4'000'000'000LL);
  for (int i = 0; i < 5000; ++i) {
    Instant t{Seconds{secs(rng)}};
    EXPECT_EQ(parse_instant(format_instant(t)), t);
    EXPECT_EQ(parse_instant(format_date(t)), floor<days>(t));
  }
  EXPECT_EQ(format_instant(kForgeEpoch), "2008-01-01T00:00:00Z");
  EXPECT_EQ(format_date(kForgeEpoch), "2008-01-01");
}

TEST(SimulatedClock, AutoAdvanceJumpsToDeadline) {
  SimulatedClock clock(kForgeEpoch);
  EXPECT_TRUE(clock.sleep_for(minutes{5}));
  EXPECT_EQ(clock.now_instant(), kForgeEpoch + minutes{5});
  // a deadline in the past leaves time alone
  EXPECT_TRUE(clock.sleep_until(TimePoint{kForgeEpoch}));
  EXPECT_EQ(clock.now_instant(), kForgeEpoch + minutes{5});
}

TEST(SimulatedClock, ManualBlocksUntilAdvanced) {
  SimulatedClock clock(kForgeEpoch, SimulatedClock::Mode::Manual);
  std::atomic<bool> woke{false};
  std::thread sleeper([&] {
    clock.sleep_for(seconds{10});
    woke = true;
  });
  while (clock.sleepers() == 0) std::this_thread::yield();
  clock.advance(seconds{5});
  std::this_thread::sleep_for(milliseconds{20});
  EXPECT_FALSE(woke.load());
  clock.advance(seconds{5});
  sleeper.join();
  EXPECT_TRUE(woke.load());
}

TEST(SimulatedClock, StopTokenInterruptsManualSleep) {
  SimulatedClock clock(kForgeEpoch, SimulatedClock::Mode::Manual);
  std::stop_source stop;
  bool result = true;
  std::thread sleeper([&] { result = clock.sleep_for(hours{1}, stop.get_token()); });
  while (clock.sleepers() == 0) std::this_thread::yield();
  stop.request_stop();
  sleeper.join();
  EXPECT_FALSE(result);
  EXPECT_EQ(clock.now_instant(), kForgeEpoch);
}

TEST(SystemClock, StopTokenInterruptsSleep) {
  SystemClock clock;
  std::stop_source stop;
  stop.request_stop();
  auto before = steady_clock::now();
  EXPECT_FALSE(clock.sleep_for(seconds{30}, stop.get_token()));
  EXPECT_LT(steady_clock::now() - before, seconds{5});
}
