#include <benchmark/benchmark.h>

#include "ghs/clock.hpp"
#include "ghs/interval_planner.hpp"
#include "ghs/synthetic_forge.hpp"

using namespace ghs;

namespace {

const Instant kNow = std::chrono::sys_days{std::chrono::year{2024} / 6 / 1};

void enumerate_population(benchmark::State& state, TimeDistribution distribution) {
  PopulationParams params;
  params.size = static_cast<std::size_t>(state.range(0));
  params.distribution = distribution;
  auto population = generate(7, params);
  SimulatedClock clock(kNow);
  SyntheticForgeOptions options;
  options.enforce_rate_limit = false;
  SyntheticForge forge(population, clock, options);

  SearchCriteria criteria;
  criteria.language = "Java";
  CountFn counter = [&](const SearchCriteria& c) { return forge.count(build_query(c), "bench").total_count; };
  PageFn pager = [&](const SearchCriteria& c, int index) { return forge.page(build_query(c), index, "bench"); };

  std::size_t items = 0;
  EnumerationHooks hooks;
  hooks.on_item = [&](const RepoSummary&, const TimeInterval&) { ++items; };

  for (auto _ : state) {
    items = 0;
    auto report = enumerate(TimeInterval::make(kForgeEpoch, kNow), criteria, counter, pager, hooks);
    benchmark::DoNotOptimize(report);
  }
  state.counters["items"] = static_cast<double>(items);
  state.counters["requests/pass"] =
      static_cast<double>(forge.request_count()) / static_cast<double>(state.iterations());
}

void BM_EnumerateUniform(benchmark::State& state) { enumerate_population(state, TimeDistribution::Uniform); }
void BM_EnumerateBursty(benchmark::State& state) { enumerate_population(state, TimeDistribution::Bursty); }

void BM_BuildAndParseQuery(benchmark::State& state) {
  SearchCriteria c;
  c.language = "C++";
  c.interval = TimeInterval::make(kForgeEpoch, kNow);
  for (auto _ : state) benchmark::DoNotOptimize(parse_query(build_query(c)));
}

}  // namespace

BENCHMARK(BM_EnumerateUniform)->Arg(5000)->Arg(50000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnumerateBursty)->Arg(5000)->Arg(50000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildAndParseQuery);

BENCHMARK_MAIN();
