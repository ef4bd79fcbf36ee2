#include "ensfuzz/sim/harness.hpp"

#include <atomic>
#include <exception>
#include <thread>

#include "ensfuzz/sim/sim_backend.hpp"

namespace ensfuzz::sim {

CampaignConfig sim_config(const Scenario& scenario, Policy policy, std::uint64_t seed,
                          const SimOverrides& overrides) {
  CampaignConfig c;
  c.policy = policy;
  c.seed = seed;
  c.rounds = overrides.rounds.value_or(scenario.defaults.rounds);
  c.units = overrides.units.value_or(scenario.defaults.units);
  c.round_time = overrides.round_time.value_or(scenario.defaults.round_time);
  c.monitor_time = overrides.monitor_time.value_or(scenario.defaults.monitor_time);
  c.rho = overrides.rho.value_or(kDefaultRho);
  c.fuzzers = scenario.fuzzer_ids();
  c.labels = {{"mode", "simulate"}, {"scenario", scenario.name}, {"scenario_seed", scenario.seed}};
  return c;
}

DeepEdgeSet scenario_deep_edges(const Scenario& scenario, double rho) {
  return deep_edges(scenario.edge_map(), compute_depths(scenario.callgraph, rho));
}

CampaignReport simulate_campaign(const Scenario& scenario, const CampaignConfig& config) {
  SimBackend backend(scenario, config.seed);
  Campaign campaign(config, backend, scenario_deep_edges(scenario, config.rho));
  return campaign.run();
}

std::vector<CampaignReport> simulate_many(const Scenario& scenario,
                                          const std::vector<CampaignConfig>& configs,
                                          std::size_t jobs) {
  std::vector<CampaignReport> out(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        out[i] = simulate_campaign(scenario, configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, configs.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace ensfuzz::sim
