#include "ensfuzz/seedpool.hpp"

namespace ensfuzz {

SeedId seed_id(std::string_view payload) {
  SeedId id;
  id.bytes = blake2b_128(payload);
  return id;
}

std::map<FuzzerId, SeedPool> init_locals(const SeedPool& global, const Schedule& schedule) {
  std::map<FuzzerId, SeedPool> locals;
  for (const auto& f : schedule.assignment) {
    if (!locals.contains(f)) locals.emplace(f, global);
  }
  return locals;
}

SyncOutcome sync_up(SeedPool& global, FuzzRecord& m,
                    const std::map<FuzzerId, std::vector<Harvest>>& locals,
                    const DeepEdgeSet& deep, BenefitMode mode) {
  SyncOutcome out;
  const FuzzRecord snapshot = m;
  for (const auto& [fuzzer, harvests] : locals) {
    for (const auto& h : harvests) {
      if (is_beneficial(h.result, snapshot, deep, mode)) {
        out.beneficial.push_back(h.seed.id);
        if (global.insert(h.seed)) ++out.uploaded;
      }
    }
  }
  for (const auto& [fuzzer, harvests] : locals) {
    for (const auto& h : harvests) merge(m, h.result);
  }
  return out;
}

std::map<FuzzerId, std::vector<UnitId>> group_sync(const Schedule& schedule, double at_fraction) {
  std::map<FuzzerId, std::vector<UnitId>> groups;
  for (UnitId u = 0; u < schedule.units(); ++u) {
    groups[schedule.fuzzer_at(u, at_fraction)].push_back(u);
  }
  return groups;
}

}  // namespace ensfuzz
