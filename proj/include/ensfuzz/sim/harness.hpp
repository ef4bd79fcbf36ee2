#pragma once

// Campaigns over simulated scenarios, one SimBackend per run.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ensfuzz/campaign.hpp"
#include "ensfuzz/sim/scenario.hpp"

namespace ensfuzz::sim {

struct SimOverrides {
  std::optional<std::size_t> rounds;
  std::optional<std::size_t> units;
  std::optional<double> round_time;
  std::optional<double> monitor_time;
  std::optional<double> rho;
};

/// Campaign settings for `scenario` under `policy`: scenario defaults, then
/// overrides. Fuzzers are the scenario's profiles.
CampaignConfig sim_config(const Scenario& scenario, Policy policy, std::uint64_t seed,
                          const SimOverrides& overrides = {});

/// Deep edges of a scenario's call graph at `rho`.
DeepEdgeSet scenario_deep_edges(const Scenario& scenario, double rho);

CampaignReport simulate_campaign(const Scenario& scenario, const CampaignConfig& config);

/// Independent runs, up to `jobs` at a time; results in input order.
std::vector<CampaignReport> simulate_many(const Scenario& scenario,
                                          const std::vector<CampaignConfig>& configs,
                                          std::size_t jobs);

}  // namespace ensfuzz::sim
