#pragma once

// Contract between the coordinator and base fuzzer instances. A Backend owns
// the clock of a round and every instance running in it; the coordinator
// only spawns, harvests and stops through it.

#include <cstddef>
#include <string>
#include <vector>

#include "ensfuzz/common.hpp"
#include "ensfuzz/seedpool.hpp"

namespace ensfuzz {

enum class AdapterKind { Process, Simulated };

struct AdapterSpec {
  FuzzerId name;
  AdapterKind kind = AdapterKind::Simulated;
  /// Launch template. {target}, {in} and {out} must each appear exactly once;
  /// {core} is optional.
  std::string cmd;
  std::string seeds_glob = "queue/*";
  std::string crashes_glob = "crashes/*";

  /// Throws Error when a process template breaks the placeholder rule.
  void validate() const;
};

/// Substitutes {target}, {in}, {out} and {core} in a launch template.
std::string expand_template(const std::string& cmd, const std::string& target,
                            const std::string& in, const std::string& out, std::size_t core);

enum class Liveness { Running, Exited, Stopped };

struct InstanceHandle {
  std::size_t id = 0;
  FuzzerId fuzzer;
  UnitId unit = 0;
  double start = 0.0;  // seconds since round start
  Liveness state = Liveness::Running;
};

class Backend {
 public:
  virtual ~Backend() = default;

  virtual void begin_round(std::size_t round, double round_time) = 0;
  /// Seconds since the start of the current round.
  virtual double now() const = 0;
  /// Lets instances run until `t`; never moves the clock backwards.
  virtual void advance_to(double t) = 0;

  /// Starts `fuzzer` on a free unit with `corpus` as its input seeds.
  virtual InstanceHandle spawn(const FuzzerId& fuzzer, UnitId unit, const SeedPool& corpus,
                               double budget) = 0;
  /// Seeds produced since the previous harvest of this handle.
  virtual std::vector<Harvest> harvest(InstanceHandle& handle) = 0;
  /// Terminates the instance; returns the fraction of the round it held its
  /// unit. Stopping twice returns the same value.
  virtual double stop(InstanceHandle& handle) = 0;
  /// Refreshes `handle.state` (an instance may exit on its own).
  virtual Liveness poll(InstanceHandle& handle) = 0;

  /// Runs one seed outside any instance, e.g. for the initial corpus.
  virtual ExecutionResult execute(const Seed& seed) = 0;

  virtual void end_round() = 0;

  /// Called after each sync with the updated global pool.
  virtual void publish_global(const SeedPool& /*global*/) {}
};

}  // namespace ensfuzz
