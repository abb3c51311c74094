#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <thread>

#include "ghs/error.hpp"
#include "ghs/rate_governor.hpp"
#include "rig.hpp"

using namespace ghs;
using namespace ghs::testing;
using namespace std::chrono;

namespace {

RateGovernor::Options with_history() { return {30, seconds{60}, true}; }

}  // namespace

TEST(RateBudget, RollingWindow) {
  RateBudget b;
  b.limit_per_window = 2;
  b.window = seconds{60};
  TimePoint t0{kForgeEpoch};
  EXPECT_TRUE(b.has_room(t0));
  b.spent.push_back(t0);
  b.spent.push_back(t0 + seconds{10});
  EXPECT_FALSE(b.has_room(t0 + seconds{59}));
  EXPECT_EQ(b.reset_at(t0 + seconds{59}), t0 + seconds{60});
  EXPECT_TRUE(b.has_room(t0 + seconds{60}));
  EXPECT_EQ(b.spent.size(), 1u);
}

TEST(RateGovernor, NeedsAToken) {
  SimulatedClock clock(kForgeEpoch);
  EXPECT_THROW(RateGovernor({}, clock), UsageError);
}

TEST(RateGovernor, BurstOfThirtyThenWait) {
  SimulatedClock clock(kForgeEpoch);
  RateGovernor g({"a"}, clock, with_history());
  for (int i = 0; i < 30; ++i) EXPECT_EQ(g.acquire().granted_at, TimePoint{kForgeEpoch});
  EXPECT_EQ(g.acquire().granted_at, TimePoint{kForgeEpoch} + seconds{60});
}

TEST(RateGovernor, RotatesTokens) {
  SimulatedClock clock(kForgeEpoch);
  RateGovernor g({"a", "b", "c"}, clock);
  for (int i = 0; i < 90; ++i) g.acquire();
  // three tokens give ninety grants without waiting
  EXPECT_EQ(clock.now_instant(), kForgeEpoch);
  EXPECT_EQ(g.acquire().granted_at, TimePoint{kForgeEpoch} + seconds{60});
}

// No token ever sees more than 30 grants in any 60 s window, whatever the
// arrival pattern.
TEST(RateGovernor, WindowPropertySingleThread) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    SimulatedClock clock(kForgeEpoch);
    std::mt19937_64 rng(seed);
    const int n_tokens = 1 + static_cast<int>(seed % 3);
    std::vector<std::string> tokens;
    for (int i = 0; i < n_tokens; ++i) tokens.push_back("t" + std::to_string(i));
    RateGovernor g(tokens, clock, with_history());
    for (int i = 0; i < 10000; ++i) {
      if (std::bernoulli_distribution(0.3)(rng)) {
        clock.advance(milliseconds{std::uniform_int_distribution<int>(0, 4000)(rng)});
      }
      g.acquire();
    }
    std::size_t total = 0;
    for (int t = 0; t < n_tokens; ++t) {
      auto h = g.history(static_cast<std::size_t>(t));
      total += h.size();
      EXPECT_LE(max_in_window(h, seconds{60}), 30) << "seed " << seed << " token " << t;
    }
    EXPECT_EQ(total, 10000u);
  }
}

TEST(RateGovernor, WindowPropertyConcurrent) {
  SimulatedClock clock(kForgeEpoch);
  RateGovernor g({"a", "b"}, clock, with_history());
  std::vector<std::thread> threads;
  for (int w = 0; w < 8; ++w) {
    threads.emplace_back([&] {
      for (int i = 0; i < 250; ++i) g.acquire();
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(g.granted(), 2000u);
  for (std::size_t t = 0; t < 2; ++t) EXPECT_LE(max_in_window(g.history(t), seconds{60}), 30);
}

TEST(RateGovernor, ServesWaitersInArrivalOrder) {
  SimulatedClock clock(kForgeEpoch, SimulatedClock::Mode::Manual);
  RateGovernor g({"a"}, clock, RateGovernor::Options{1, seconds{60}, false});
  const TimePoint t0 = g.acquire().granted_at;
  Permit first_permit, second_permit;
  std::thread first([&] { first_permit = g.acquire(); });
  while (clock.sleepers() == 0) std::this_thread::yield();
  std::thread second([&] { second_permit = g.acquire(); });
  std::this_thread::sleep_for(milliseconds{20});
  clock.advance(seconds{60});
  first.join();
  while (clock.sleepers() == 0) std::this_thread::yield();
  clock.advance(seconds{60});
  second.join();
  EXPECT_EQ(first_permit.granted_at, t0 + seconds{60});
  EXPECT_EQ(second_permit.granted_at, t0 + seconds{120});
}

TEST(RateGovernor, DeferHoldsTokenBack) {
  SimulatedClock clock(kForgeEpoch);
  RateGovernor g({"a"}, clock);
  Permit p = g.acquire();
  g.defer(p.token, p.granted_at + seconds{90});
  EXPECT_EQ(g.acquire().granted_at, p.granted_at + seconds{90});
}

TEST(RateGovernor, ExhaustedHeadersDefer) {
  SimulatedClock clock(kForgeEpoch);
  RateGovernor g({"a", "b"}, clock);
  Permit p = g.acquire();
  g.observe(p.token, RateHeaders{30, 0, p.granted_at + seconds{45}});
  Permit q = g.acquire();
  EXPECT_NE(q.token, p.token);
  g.observe(q.token, RateHeaders{30, 0, p.granted_at + seconds{20}});
  g.observe(q.token, RateHeaders{30, 5, p.granted_at + seconds{99}});
  Permit r = g.acquire();
  EXPECT_EQ(r.token, q.token);
  EXPECT_EQ(r.granted_at, p.granted_at + seconds{20});
}

TEST(RateGovernor, AllDisabledIsAuthError) {
  SimulatedClock clock(kForgeEpoch);
  RateGovernor g({"a", "b"}, clock);
  g.disable(0);
  EXPECT_EQ(g.acquire().token, 1u);
  g.disable(1);
  EXPECT_THROW(g.acquire(), AuthError);
  EXPECT_THROW(g.acquire(), AuthError);
}

TEST(RateGovernor, ShutdownCancelsWaiters) {
  SimulatedClock clock(kForgeEpoch, SimulatedClock::Mode::Manual);
  RateGovernor g({"a"}, clock);
  for (int i = 0; i < 30; ++i) g.acquire();
  std::atomic<bool> cancelled{false};
  std::thread waiter([&] {
    try {
      g.acquire();
    } catch (const CancelledError&) {
      cancelled = true;
    }
  });
  while (clock.sleepers() == 0) std::this_thread::yield();
  g.shutdown();
  waiter.join();
  EXPECT_TRUE(cancelled.load());
  EXPECT_THROW(g.acquire(), CancelledError);
}
