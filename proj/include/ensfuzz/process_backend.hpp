#pragma once

// Real base fuzzers as child processes on pinned cores, wall-clock rounds.
//
// Layout under the work directory:
//   global/                      one file per global seed, named by hex id
//   round-<k>/<fuzzer>/queue/    group channel, read by every instance as {in}
//   round-<k>/<fuzzer>/unit-<u>-<n>/      instance output ({out})
//   round-<k>/<fuzzer>/unit-<u>-<n>.log   instance stdout and stderr
//   replay/                      scratch files for replaying seeds
//
// Harvested seeds are replayed through the instrumented runner and copied
// into their group channel so the other instances of the group see them.

#include <chrono>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <sys/types.h>

#include "ensfuzz/adapters.hpp"

namespace ensfuzz {

struct TargetSpec {
  std::string path;
  std::string runner;
};

struct ProcessOptions {
  std::filesystem::path workdir;
  TargetSpec target;
  std::map<FuzzerId, AdapterSpec> adapters;
  double grace_seconds = 5.0;
  double replay_timeout = 10.0;
};

/// Exit codes of the instrumented runner protocol.
inline constexpr int kRunnerOk = 0;
inline constexpr int kRunnerCrashed = 77;

/// Runs `<runner> <target> <seed-file>` and interprets its output. Failures
/// give an empty result flagged replay_failed.
ExecutionResult replay_seed(const TargetSpec& target, const std::filesystem::path& seed_file,
                            double timeout_seconds);

class ProcessBackend final : public Backend {
 public:
  explicit ProcessBackend(ProcessOptions options);
  ~ProcessBackend() override;

  void begin_round(std::size_t round, double round_time) override;
  double now() const override;
  void advance_to(double t) override;
  InstanceHandle spawn(const FuzzerId& fuzzer, UnitId unit, const SeedPool& corpus,
                       double budget) override;
  std::vector<Harvest> harvest(InstanceHandle& handle) override;
  double stop(InstanceHandle& handle) override;
  Liveness poll(InstanceHandle& handle) override;
  ExecutionResult execute(const Seed& seed) override;
  void end_round() override;
  void publish_global(const SeedPool& global) override;

 private:
  struct Instance {
    InstanceHandle handle;
    pid_t pid = -1;
    double deadline = 0.0;
    double end = 0.0;
    std::filesystem::path out;
    std::filesystem::path queue;
    const AdapterSpec* spec = nullptr;
    std::set<std::string> seen;
    bool stopped = false;
    double fraction = 0.0;
  };

  Instance& lookup(const InstanceHandle& h);
  void reap();
  void terminate(Instance& inst);

  ProcessOptions options_;
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
  std::size_t round_ = 0;
  double round_time_ = 0.0;
  std::size_t spawned_ = 0;
  std::filesystem::path round_dir_;
  std::map<std::size_t, Instance> instances_;
  std::map<UnitId, std::size_t> occupied_;
};

}  // namespace ensfuzz
