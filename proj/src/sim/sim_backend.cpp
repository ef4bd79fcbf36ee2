#include "ensfuzz/sim/sim_backend.hpp"

#include <cmath>
#include <limits>

namespace ensfuzz::sim {
namespace {
constexpr double kNever = std::numeric_limits<double>::infinity();
}

SimBackend::SimBackend(const Scenario& scenario, std::uint64_t run_seed)
    : scenario_(scenario), run_seed_(run_seed) {}

void SimBackend::begin_round(std::size_t round, double round_time) {
  round_ = round;
  round_time_ = round_time;
  now_ = 0.0;
  spawned_ = 0;
  groups_.clear();
  instances_.clear();
  occupied_.clear();
}

std::vector<SimBackend::Target> SimBackend::targets(const Instance& inst) const {
  std::vector<Target> out;
  const auto& p = *inst.profile;
  if (now_ >= p.dry_after * round_time_) return out;
  const Group& g = groups_.at(inst.handle.fuzzer);

  bool has_domain = false;
  for (const auto& e : scenario_.edges) {
    const double rate = p.rate(e.gate);
    if (g.reached.contains(e.id)) {
      if (rate > 0.0) has_domain = true;
      if (e.crash_prob > 0.0 && rate > 0.0 && !g.crashed.contains(e.id)) {
        out.push_back({Target::Crash, e.id, rate * e.crash_prob});
      }
      continue;
    }
    if (e.gate == kOpenGate || rate <= 0.0) continue;
    if (e.parent && !g.reached.contains(*e.parent)) continue;
    out.push_back({Target::Discover, e.id, rate});
  }
  if (p.revisit_rate > 0.0 && has_domain) out.push_back({Target::Revisit, 0, p.revisit_rate});
  return out;
}

void SimBackend::reschedule(Instance& inst) {
  double total = 0.0;
  for (const auto& t : targets(inst)) total += t.rate;
  const double dry_at = inst.profile->dry_after * round_time_;
  inst.next_is_boundary = false;
  inst.next_event = kNever;
  if (total > 0.0) {
    inst.next_event = now_ - std::log1p(-uniform01(inst.rng)) / total;
  }
  if (dry_at > now_ && inst.next_event > dry_at) {
    inst.next_event = dry_at;
    inst.next_is_boundary = true;
  }
}

void SimBackend::reschedule_group(const FuzzerId& fuzzer) {
  for (auto& [id, inst] : instances_) {
    if (inst.handle.state == Liveness::Running && inst.handle.fuzzer == fuzzer) reschedule(inst);
  }
}

void SimBackend::fire(Instance& inst) {
  if (inst.next_is_boundary) {
    reschedule(inst);
    return;
  }
  const auto ts = targets(inst);
  double total = 0.0;
  for (const auto& t : ts) total += t.rate;
  const double pick = uniform01(inst.rng) * total;
  const Target* chosen = &ts.back();
  double acc = 0.0;
  for (const auto& t : ts) {
    acc += t.rate;
    if (pick < acc) {
      chosen = &t;
      break;
    }
  }

  Group& g = groups_.at(inst.handle.fuzzer);
  std::string payload;
  bool group_changed = false;
  switch (chosen->kind) {
    case Target::Discover:
      payload = reach_payload(chosen->edge, inst.rng());
      g.reached.insert(chosen->edge);
      group_changed = true;
      break;
    case Target::Crash:
      payload = crash_payload(chosen->edge, inst.rng());
      g.crashed.insert(chosen->edge);
      group_changed = true;
      break;
    case Target::Revisit: {
      std::vector<EdgeId> domain;
      for (EdgeId e : g.reached) {
        if (inst.profile->rate(scenario_.edge(e)->gate) > 0.0) domain.push_back(e);
      }
      payload = reach_payload(domain[inst.rng() % domain.size()], inst.rng());
      break;
    }
  }
  auto result = scenario_.execute(payload);
  inst.outbox.push_back(Harvest{Seed::make(std::move(payload), inst.handle.fuzzer, round_), std::move(result)});
  if (group_changed) {
    reschedule_group(inst.handle.fuzzer);
  } else {
    reschedule(inst);
  }
}

void SimBackend::retire(Instance& inst, double at) {
  inst.handle.state = Liveness::Exited;
  inst.end = at;
  occupied_.erase(inst.handle.unit);
}

void SimBackend::advance_to(double t) {
  while (true) {
    Instance* next = nullptr;
    double when = kNever;
    bool is_deadline = false;
    for (auto& [id, inst] : instances_) {
      if (inst.handle.state != Liveness::Running) continue;
      const bool deadline_first = inst.deadline <= inst.next_event;
      const double at = deadline_first ? inst.deadline : inst.next_event;
      if (at < when) {
        when = at;
        next = &inst;
        is_deadline = deadline_first;
      }
    }
    if (!next || when > t) break;
    now_ = std::max(now_, when);
    if (is_deadline) {
      retire(*next, when);
    } else {
      fire(*next);
    }
  }
  now_ = std::max(now_, t);
}

InstanceHandle SimBackend::spawn(const FuzzerId& fuzzer, UnitId unit, const SeedPool& corpus,
                                 double budget) {
  if (occupied_.contains(unit)) {
    throw Error("spawn: unit " + std::to_string(unit) + " is already running an instance");
  }
  const FuzzerProfile* profile = scenario_.profile(fuzzer);
  if (!profile) throw Error("spawn: scenario has no profile for fuzzer '" + fuzzer + "'");

  Group& g = groups_[fuzzer];
  for (const auto& [id, seed] : corpus) {
    const auto r = scenario_.execute(seed.payload);
    for (const auto& [edge, count] : r.coverage) g.reached.insert(edge);
    if (r.crashed) {
      if (auto e = payload_edge(seed.payload)) g.crashed.insert(*e);
    }
  }

  Instance inst;
  inst.handle.id = ++spawned_;
  inst.handle.fuzzer = fuzzer;
  inst.handle.unit = unit;
  inst.handle.start = now_;
  inst.profile = profile;
  inst.rng.seed(mix_seed({scenario_.seed, run_seed_, round_, unit, spawned_}));
  inst.deadline = now_ + budget;
  occupied_[unit] = inst.handle.id;
  auto handle = inst.handle;
  instances_.emplace(handle.id, std::move(inst));
  reschedule_group(fuzzer);
  return handle;
}

SimBackend::Instance& SimBackend::lookup(const InstanceHandle& h) {
  auto it = instances_.find(h.id);
  if (it == instances_.end()) throw Error("unknown instance handle");
  return it->second;
}

std::vector<Harvest> SimBackend::harvest(InstanceHandle& handle) {
  auto& inst = lookup(handle);
  handle.state = inst.handle.state;
  std::vector<Harvest> out;
  out.swap(inst.outbox);
  return out;
}

double SimBackend::stop(InstanceHandle& handle) {
  auto& inst = lookup(handle);
  if (!inst.stopped_fraction) {
    if (inst.handle.state == Liveness::Running) retire(inst, now_);
    inst.stopped_fraction = round_time_ > 0.0 ? (inst.end - inst.handle.start) / round_time_ : 0.0;
  }
  inst.handle.state = Liveness::Stopped;
  handle.state = Liveness::Stopped;
  return *inst.stopped_fraction;
}

Liveness SimBackend::poll(InstanceHandle& handle) {
  handle.state = lookup(handle).handle.state;
  return handle.state;
}

void SimBackend::end_round() {
  for (auto& [id, inst] : instances_) {
    if (inst.handle.state == Liveness::Running) retire(inst, now_);
  }
}

std::size_t SimBackend::live_instances() const {
  std::size_t n = 0;
  for (const auto& [id, inst] : instances_) n += inst.handle.state == Liveness::Running;
  return n;
}

const std::set<EdgeId>* SimBackend::group_coverage(const FuzzerId& fuzzer) const {
  auto it = groups_.find(fuzzer);
  return it == groups_.end() ? nullptr : &it->second.reached;
}

}  // namespace ensfuzz::sim
