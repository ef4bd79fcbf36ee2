#include "ensfuzz/campaign.hpp"

#include <algorithm>
#include <optional>
#include <set>

namespace ensfuzz {

Policy parse_policy(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "legion") return Policy::Legion;
  if (s == "ns") return Policy::NS;
  if (s == "cov") return Policy::Cov;
  if (s == "fixed") return Policy::Fixed;
  if (s == "prep_focus" || s == "prep-focus" || s == "prepfocus") return Policy::PrepFocus;
  throw Error("unknown policy: " + std::string(name));
}

std::string to_string(Policy p) {
  switch (p) {
    case Policy::Legion: return "legion";
    case Policy::NS: return "ns";
    case Policy::Cov: return "cov";
    case Policy::Fixed: return "fixed";
    case Policy::PrepFocus: return "prep_focus";
  }
  return "?";
}

void CampaignConfig::validate() const {
  if (units < 1) throw Error("config: units must be at least 1");
  if (rounds < 1) throw Error("config: rounds must be at least 1");
  if (!(round_time > 0.0)) throw Error("config: round_time must be positive");
  if (!(monitor_time > 0.0)) throw Error("config: monitor_time must be positive");
  if (!(monitor_time < round_time / 2.0)) throw Error("config: monitor_time must be below round_time/2");
  if (!(rho > 0.0)) throw Error("config: rho must be positive");
  if (!(prep_fraction >= 0.5 && prep_fraction < 1.0)) throw Error("config: prep_fraction must be in [0.5, 1)");
  if (fuzzers.empty()) throw Error("config: no fuzzers");
  for (const auto& f : fuzzers) {
    if (f.empty()) throw Error("config: empty fuzzer name");
  }
}

nlohmann::ordered_json CampaignConfig::to_json() const {
  nlohmann::ordered_json j{{"policy", to_string(policy)},
                           {"rounds", rounds},
                           {"units", units},
                           {"round_time", round_time},
                           {"monitor_time", monitor_time},
                           {"rho", rho},
                           {"seed", seed},
                           {"fuzzers", fuzzers},
                           {"initial_seeds", initial_seeds.size()}};
  if (policy == Policy::PrepFocus) j["prep_fraction"] = prep_fraction;
  for (const auto& [k, v] : labels.items()) j[k] = v;
  return j;
}

struct Campaign::Slot {
  UnitId unit = 0;
  FuzzerId fuzzer;  // current or last occupant
  std::optional<InstanceHandle> handle;
  bool productive = false;  // beneficial seed since the last check
};

struct Campaign::RoundState {
  std::size_t round = 0;
  FuzzRecord snapshot;
  Schedule schedule;
  std::vector<Slot> slots;
  std::map<FuzzerId, SeedPool> groups;
  std::map<FuzzerId, std::vector<Harvest>> harvests;
  std::map<FuzzerId, double> pulls;
  std::vector<double> ticks;
  std::vector<StopEvent> stops;
  bool early = false;
  double end_time = 0.0;
};

Campaign::Campaign(CampaignConfig config, Backend& backend, DeepEdgeSet deep)
    : config_(std::move(config)), backend_(backend), deep_(std::move(deep)) {
  std::sort(config_.fuzzers.begin(), config_.fuzzers.end());
  config_.fuzzers.erase(std::unique(config_.fuzzers.begin(), config_.fuzzers.end()), config_.fuzzers.end());
  config_.validate();
  rng_.seed(mix_seed({config_.seed, 0x5c4edu}));
  state_ = SchedulerState(config_.fuzzers);
}

BenefitMode Campaign::mode() const {
  return config_.policy == Policy::Cov ? BenefitMode::PathOnly : BenefitMode::Multidimensional;
}

bool Campaign::fine_tunes() const {
  return config_.policy == Policy::Legion || config_.policy == Policy::Cov;
}

void Campaign::start() {
  if (started_) return;
  started_ = true;
  auto payloads = config_.initial_seeds;
  if (payloads.empty()) payloads.emplace_back();
  for (auto& p : payloads) {
    auto seed = Seed::make(std::move(p));
    if (global_.contains(seed.id)) continue;
    auto r = backend_.execute(seed);
    merge(record_, r);
    results_[seed.id] = std::move(r);
    global_.insert(std::move(seed));
  }
  backend_.publish_global(global_);
}

Schedule Campaign::plan(std::size_t round) {
  const auto& fz = config_.fuzzers;
  const std::size_t units = config_.units;
  Schedule s;
  switch (config_.policy) {
    case Policy::Legion:
    case Policy::Cov:
      return schedule_round(state_, fz, units, rng_);
    case Policy::NS:
      for (std::size_t u = 0; u < units; ++u) s.assignment.push_back(fz[rng_() % fz.size()]);
      break;
    case Policy::Fixed:
      for (std::size_t u = 0; u < units; ++u) s.assignment.push_back(fz[u % fz.size()]);
      break;
    case Policy::PrepFocus:
      for (std::size_t u = 0; u < units; ++u) s.assignment.push_back(fz[(u + (round - 1) * units) % fz.size()]);
      break;
  }
  return s;
}

void Campaign::spawn_on(RoundState& rs, UnitId unit, const FuzzerId& fuzzer) {
  auto& slot = rs.slots[unit];
  slot.fuzzer = fuzzer;
  slot.productive = false;
  auto& pool = rs.groups.try_emplace(fuzzer, global_).first->second;
  rs.pulls.try_emplace(fuzzer, 0.0);
  const double now = backend_.now();
  try {
    slot.handle = backend_.spawn(fuzzer, unit, pool, config_.round_time - now);
  } catch (const Error&) {
    // The unit stays idle; the fuzzer simply produces nothing on it.
    slot.handle.reset();
    rs.stops.push_back(StopEvent{now, unit, fuzzer, 0.0, "spawn-failed"});
  }
}

void Campaign::collect(RoundState& rs, Slot& slot) {
  if (!slot.handle) return;
  for (auto& h : backend_.harvest(*slot.handle)) {
    for (const auto& obs : observers_) obs(rs.round, slot.fuzzer, h);
    if (is_beneficial(h.result, rs.snapshot, deep_, mode())) slot.productive = true;
    rs.groups[slot.fuzzer].insert(h.seed);
    rs.harvests[slot.fuzzer].push_back(std::move(h));
  }
}

void Campaign::stop_slot(RoundState& rs, Slot& slot, const std::string& reason) {
  if (!slot.handle) return;
  collect(rs, slot);
  const double held = backend_.stop(*slot.handle);
  collect(rs, slot);
  rs.pulls[slot.fuzzer] += held;
  rs.stops.push_back(StopEvent{backend_.now(), slot.unit, slot.fuzzer, held, reason});
  slot.handle.reset();
}

void Campaign::reassign(RoundState& rs, UnitId unit, const FuzzerId& to, double at) {
  auto& slot = rs.slots[unit];
  rs.schedule.reassignments.push_back(Reassignment{at / config_.round_time, unit, slot.fuzzer, to});
  spawn_on(rs, unit, to);
}

void Campaign::monitor_tick(RoundState& rs, double at) {
  backend_.advance_to(at);
  rs.ticks.push_back(at);

  std::vector<UnitId> dry;
  std::set<FuzzerId> running;
  std::map<FuzzerId, std::size_t> held;
  for (auto& slot : rs.slots) {
    collect(rs, slot);
    const bool live = slot.handle && backend_.poll(*slot.handle) == Liveness::Running;
    if (live) ++held[slot.fuzzer];
    if (live && slot.productive) {
      running.insert(slot.fuzzer);
    } else {
      dry.push_back(slot.unit);
    }
  }
  for (auto& slot : rs.slots) slot.productive = false;
  if (dry.empty()) return;

  std::map<FuzzerId, double> rewards;
  for (const auto& [f, hs] : rs.harvests) {
    std::vector<ExecutionResult> results;
    results.reserve(hs.size());
    for (const auto& h : hs) results.push_back(h.result);
    rewards[f] = reward(project(evaluate_pool(results, rs.snapshot, deep_), mode()), WeightVector::qualitative());
  }

  const auto target = retarget(rewards, running, held);
  if (!target) {
    for (auto& slot : rs.slots) stop_slot(rs, slot, "early-end");
    rs.early = true;
    rs.end_time = at;
    return;
  }
  for (UnitId u : dry) {
    auto& slot = rs.slots[u];
    const bool live = slot.handle && slot.handle->state == Liveness::Running;
    if (live && slot.fuzzer == *target) continue;
    stop_slot(rs, slot, live ? "dry" : "exited");
    reassign(rs, u, *target, at);
  }
}

void Campaign::focus(RoundState& rs, double at) {
  backend_.advance_to(at);
  for (auto& slot : rs.slots) collect(rs, slot);

  std::optional<FuzzerId> best;
  std::uint64_t best_edges = 0;
  for (const auto& [f, hs] : rs.harvests) {
    std::vector<ExecutionResult> results;
    for (const auto& h : hs) results.push_back(h.result);
    const auto edges = evaluate_pool(results, rs.snapshot, deep_).c[0];
    if (edges > best_edges) {
      best_edges = edges;
      best = f;
    }
  }
  if (!best) return;
  for (auto& slot : rs.slots) {
    if (slot.fuzzer == *best && slot.handle) continue;
    stop_slot(rs, slot, "focus");
    reassign(rs, slot.unit, *best, at);
  }
}

const RoundLog& Campaign::run_round() {
  start();
  const double T = config_.round_time;
  RoundState rs;
  rs.round = logs_.size() + 1;
  rs.snapshot = record_;
  rs.schedule = plan(rs.round);
  rs.groups = init_locals(global_, rs.schedule);
  const auto held_at_start = rs.schedule.units_held();

  backend_.begin_round(rs.round, T);
  rs.slots.resize(config_.units);
  for (UnitId u = 0; u < config_.units; ++u) {
    rs.slots[u].unit = u;
    spawn_on(rs, u, rs.schedule.assignment[u]);
  }

  if (fine_tunes()) {
    // Harvest once without judging so the first tick sees one window only.
    backend_.advance_to(T / 2.0 - config_.monitor_time);
    for (auto& slot : rs.slots) collect(rs, slot);
    for (auto& slot : rs.slots) slot.productive = false;
    for (double at = T / 2.0; at < T && !rs.early; at += config_.monitor_time) monitor_tick(rs, at);
  } else if (config_.policy == Policy::PrepFocus) {
    focus(rs, config_.prep_fraction * T);
  }

  if (!rs.early) {
    backend_.advance_to(T);
    rs.end_time = T;
    for (auto& slot : rs.slots) stop_slot(rs, slot, "round-end");
  }
  backend_.end_round();

  // Per-fuzzer evaluation against the round-start snapshot.
  std::map<FuzzerId, MetricVector> metrics;
  std::map<FuzzerId, MetricVector> projected;
  std::map<FuzzerId, double> pulls;
  for (const auto& [f, p] : rs.pulls) {
    std::vector<ExecutionResult> results;
    if (auto it = rs.harvests.find(f); it != rs.harvests.end()) {
      for (const auto& h : it->second) results.push_back(h.result);
    }
    metrics[f] = evaluate_pool(results, rs.snapshot, deep_);
    if (p > 0.0) {
      projected[f] = project(metrics[f], mode());
      pulls[f] = p;
    }
  }
  const WeightVector theta = projected.empty() ? WeightVector::uniform(0.2) : tune_weights(projected);
  feedback(state_, projected, theta, pulls);

  std::set<SeedId> before;
  for (const auto& [id, s] : global_) before.insert(id);
  sync_up(global_, record_, rs.harvests, deep_, mode());
  for (const auto& [f, hs] : rs.harvests) {
    for (const auto& h : hs) {
      if (global_.contains(h.seed.id) && !before.contains(h.seed.id)) results_.try_emplace(h.seed.id, h.result);
    }
  }
  backend_.publish_global(global_);

  RoundLog log;
  log.round = rs.round;
  log.schedule = std::move(rs.schedule);
  for (const auto& [f, m] : metrics) {
    FuzzerRoundStats st;
    if (auto it = held_at_start.find(f); it != held_at_start.end()) st.units_held = it->second;
    st.pulls = rs.pulls[f];
    st.metrics = m;
    st.gamma_new = projected.contains(f) ? reward(projected[f], theta) : 0.0;
    std::set<SeedId> mine, uploaded;
    if (auto it = rs.harvests.find(f); it != rs.harvests.end()) {
      for (const auto& h : it->second) {
        mine.insert(h.seed.id);
        if (global_.contains(h.seed.id) && !before.contains(h.seed.id)) uploaded.insert(h.seed.id);
      }
    }
    st.seeds = mine.size();
    st.uploaded = uploaded.size();
    log.fuzzers[f] = st;
  }
  log.theta = theta;
  log.totals = totals_of(record_, global_.size());
  log.early_terminated = rs.early;
  log.duration = rs.end_time;
  log.monitor_ticks = std::move(rs.ticks);
  log.stops = std::move(rs.stops);
  log.n_total = state_.n_total();
  log.evals = state_.evals();
  logs_.push_back(std::move(log));
  for (const auto& sink : sinks_) sink(logs_.back());
  return logs_.back();
}

CampaignReport Campaign::run() {
  start();
  while (logs_.size() < config_.rounds) run_round();
  return post_fuzz();
}

CampaignReport Campaign::post_fuzz() const {
  CampaignReport r;
  r.config = config_.to_json();
  r.fuzzers = config_.fuzzers;
  r.units = config_.units;
  r.totals = totals_of(record_, global_.size());
  r.rounds = logs_;
  r.crashes = bucket_crashes(global_, results_);
  for (const auto& log : logs_) r.duration += log.duration;
  return r;
}

}  // namespace ensfuzz
