#pragma once

// The round loop: schedule, run (with mid-round fine-tuning), feed back,
// sync. A Campaign drives any Backend; policies other than LEGION exist as
// baselines for comparisons.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ensfuzz/adapters.hpp"
#include "ensfuzz/record.hpp"
#include "ensfuzz/report.hpp"
#include "ensfuzz/scheduler.hpp"
#include "ensfuzz/seedeval.hpp"
#include "ensfuzz/seedpool.hpp"

namespace ensfuzz {

enum class Policy {
  Legion,     // bandit schedule, five-metric evaluation, fine-tuning
  NS,         // uniform random schedule, no feedback-driven choices
  Cov,        // as Legion, but a seed counts only for a new path
  Fixed,      // static equal split for the whole campaign
  PrepFocus,  // every round: rotate through fuzzers, then focus on the best
};

Policy parse_policy(std::string_view name);
std::string to_string(Policy p);

struct CampaignConfig {
  double round_time = 600.0;
  double monitor_time = 30.0;
  std::size_t rounds = 72;
  std::size_t units = 1;
  double rho = 1.5;
  std::uint64_t seed = 0;
  Policy policy = Policy::Legion;
  double prep_fraction = 0.5;  // PrepFocus only
  std::vector<FuzzerId> fuzzers;
  /// Initial corpus payloads; an empty list means one empty seed.
  std::vector<std::string> initial_seeds;
  /// Extra fields echoed into the report (scenario name, target, ...).
  nlohmann::ordered_json labels = nlohmann::ordered_json::object();

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

/// One harvested execution, as seen by the coordinator.
using ExecutionObserver =
    std::function<void(std::size_t round, const FuzzerId& fuzzer, const Harvest& h)>;
using RoundSink = std::function<void(const RoundLog& log)>;

class Campaign {
 public:
  Campaign(CampaignConfig config, Backend& backend, DeepEdgeSet deep);

  void on_round(RoundSink sink) { sinks_.push_back(std::move(sink)); }
  void on_execution(ExecutionObserver obs) { observers_.push_back(std::move(obs)); }

  /// Seeds the global pool and record from the initial corpus. Idempotent.
  void start();
  /// Runs the next round; start() is called first if needed.
  const RoundLog& run_round();
  /// start(), every configured round, then post_fuzz().
  CampaignReport run();
  CampaignReport post_fuzz() const;

  const CampaignConfig& config() const noexcept { return config_; }
  const SeedPool& global() const noexcept { return global_; }
  const FuzzRecord& record() const noexcept { return record_; }
  const SchedulerState& scheduler() const noexcept { return state_; }
  const std::vector<RoundLog>& rounds() const noexcept { return logs_; }
  const DeepEdgeSet& deep() const noexcept { return deep_; }

 private:
  struct Slot;
  struct RoundState;

  BenefitMode mode() const;
  bool fine_tunes() const;
  Schedule plan(std::size_t round);
  void spawn_on(RoundState& rs, UnitId unit, const FuzzerId& fuzzer);
  void collect(RoundState& rs, Slot& slot);
  void stop_slot(RoundState& rs, Slot& slot, const std::string& reason);
  void monitor_tick(RoundState& rs, double at);
  void focus(RoundState& rs, double at);
  void reassign(RoundState& rs, UnitId unit, const FuzzerId& to, double at);

  CampaignConfig config_;
  Backend& backend_;
  DeepEdgeSet deep_;
  Rng rng_;
  bool started_ = false;
  SeedPool global_;
  FuzzRecord record_;
  SchedulerState state_;
  std::map<SeedId, ExecutionResult> results_;  // for seeds in the global pool
  std::vector<RoundLog> logs_;
  std::vector<RoundSink> sinks_;
  std::vector<ExecutionObserver> observers_;
};

}  // namespace ensfuzz
