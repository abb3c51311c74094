#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ghs/clock.hpp"
#include "ghs/forge_client.hpp"
#include "ghs/orchestrator.hpp"
#include "ghs/rate_governor.hpp"
#include "ghs/sqlite_store.hpp"
#include "ghs/synthetic_forge.hpp"

namespace ghs::testing {

inline const Instant kRigNow = std::chrono::sys_days{std::chrono::year{2024} / 6 / 1};

/// Synthetic forge + governor + client + scraper wired to a store, all on one
/// auto-advancing simulated clock.
struct MiningRig {
  SyntheticPopulation population;
  SimulatedClock clock;
  SyntheticForge forge;
  RateGovernor governor;
  ForgeClient client;
  SyntheticPageScraper scraper;
  std::unique_ptr<RepositoryStore> store;
  MiningOrchestrator orchestrator;

  MiningRig(std::uint64_t seed, const PopulationParams& params,
            std::vector<std::string> languages = {"Java"},
            std::unique_ptr<RepositoryStore> store = nullptr,
            std::set<std::string> failing_pages = {}, OrchestratorOptions options = {});

  MiningReport pass(const std::string& language = "Java") {
    return orchestrator.run_language_pass(language, clock.now_instant());
  }

  /// Names the oracle says a pass over [epoch, now - buffer) must persist.
  std::set<std::string> expected_names(const std::string& language, Instant now) const;
};

PopulationParams small_params(std::size_t size, TimeDistribution d = TimeDistribution::Uniform);

std::set<std::string> stored_names(const RepositoryStore& store);
std::vector<RepositoryRecord> stored_records(const RepositoryStore& store);

/// Largest number of grants inside any window of `window` length.
int max_in_window(const std::vector<TimePoint>& grants, std::chrono::milliseconds window);

}  // namespace ghs::testing
