#pragma once

// Discrete-event backend over a virtual clock.
//
// Each live instance is a superposition of exponential clocks, one per
// reachable target (an undiscovered edge whose parent its group has reached,
// an uncrashed crash site, or a revisit of known coverage). Instances of the
// same fuzzer share one group channel: a discovery by any of them widens the
// frontier of all. Rates are memoryless, so every change to a group simply
// redraws the next event time of its members.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "ensfuzz/adapters.hpp"
#include "ensfuzz/sim/scenario.hpp"

namespace ensfuzz::sim {

class SimBackend final : public Backend {
 public:
  SimBackend(const Scenario& scenario, std::uint64_t run_seed);

  void begin_round(std::size_t round, double round_time) override;
  double now() const override { return now_; }
  void advance_to(double t) override;
  InstanceHandle spawn(const FuzzerId& fuzzer, UnitId unit, const SeedPool& corpus,
                       double budget) override;
  std::vector<Harvest> harvest(InstanceHandle& handle) override;
  double stop(InstanceHandle& handle) override;
  Liveness poll(InstanceHandle& handle) override;
  ExecutionResult execute(const Seed& seed) override { return scenario_.execute(seed.payload); }
  void end_round() override;

  std::size_t live_instances() const;
  /// Edges reached by a group channel this round (for tests).
  const std::set<EdgeId>* group_coverage(const FuzzerId& fuzzer) const;

 private:
  struct Group {
    std::set<EdgeId> reached;
    std::set<EdgeId> crashed;
  };
  struct Target {
    enum Kind { Discover, Crash, Revisit } kind;
    EdgeId edge;
    double rate;
  };
  struct Instance {
    InstanceHandle handle;
    const FuzzerProfile* profile = nullptr;
    Rng rng;
    double deadline = 0.0;  // start + budget
    double end = 0.0;       // valid once not running
    double next_event = 0.0;
    bool next_is_boundary = false;  // dry-after switch, no seed emitted
    std::vector<Harvest> outbox;
    std::optional<double> stopped_fraction;
  };

  std::vector<Target> targets(const Instance& inst) const;
  void reschedule(Instance& inst);
  void reschedule_group(const FuzzerId& fuzzer);
  void fire(Instance& inst);
  void retire(Instance& inst, double at);
  Instance& lookup(const InstanceHandle& h);

  const Scenario& scenario_;
  std::uint64_t run_seed_;
  std::size_t round_ = 0;
  double round_time_ = 0.0;
  double now_ = 0.0;
  std::size_t spawned_ = 0;
  std::map<FuzzerId, Group> groups_;
  std::map<std::size_t, Instance> instances_;
  std::map<UnitId, std::size_t> occupied_;
};

}  // namespace ensfuzz::sim
