#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ensfuzz/common.hpp"
#include "ensfuzz/record.hpp"
#include "ensfuzz/scheduler.hpp"
#include "ensfuzz/seedeval.hpp"

namespace ensfuzz {

using SeedId = Id128<struct SeedTag>;

SeedId seed_id(std::string_view payload);

struct Seed {
  std::string payload;
  std::optional<FuzzerId> origin;  // nullopt for initial seeds
  std::size_t round_found = 0;
  SeedId id;

  static Seed make(std::string payload, std::optional<FuzzerId> origin = std::nullopt,
                   std::size_t round = 0) {
    Seed s;
    s.id = seed_id(payload);
    s.payload = std::move(payload);
    s.origin = std::move(origin);
    s.round_found = round;
    return s;
  }
};

/// Seeds keyed by content id; inserting a known payload is a no-op.
class SeedPool {
 public:
  bool insert(Seed s) { return seeds_.try_emplace(s.id, std::move(s)).second; }
  bool contains(const SeedId& id) const { return seeds_.contains(id); }
  const Seed* find(const SeedId& id) const {
    auto it = seeds_.find(id);
    return it == seeds_.end() ? nullptr : &it->second;
  }
  std::size_t size() const noexcept { return seeds_.size(); }
  bool empty() const noexcept { return seeds_.empty(); }
  auto begin() const { return seeds_.begin(); }
  auto end() const { return seeds_.end(); }

 private:
  std::map<SeedId, Seed> seeds_;
};

/// A harvested seed with the observation from replaying it.
struct Harvest {
  Seed seed;
  ExecutionResult result;
};

/// Every scheduled fuzzer gets a full copy of the global pool.
std::map<FuzzerId, SeedPool> init_locals(const SeedPool& global, const Schedule& schedule);

struct SyncOutcome {
  std::size_t uploaded = 0;
  std::vector<SeedId> beneficial;  // in upload order, duplicates included
};

/// Uploads the beneficial seeds of every local pool to `global`, judged
/// against the record as it was when called; then folds every execution
/// into `m`.
SyncOutcome sync_up(SeedPool& global, FuzzRecord& m,
                    const std::map<FuzzerId, std::vector<Harvest>>& locals,
                    const DeepEdgeSet& deep, BenefitMode mode = BenefitMode::Multidimensional);

/// Units grouped by the fuzzer they run at `at_fraction` of the round.
/// Each group shares one sync channel for the round.
std::map<FuzzerId, std::vector<UnitId>> group_sync(const Schedule& schedule,
                                                   double at_fraction = 0.0);

}  // namespace ensfuzz
