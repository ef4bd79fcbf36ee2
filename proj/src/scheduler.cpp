#include "ensfuzz/scheduler.hpp"

#include <algorithm>
#include <cmath>

namespace ensfuzz {

std::map<FuzzerId, std::size_t> Schedule::units_held() const {
  std::map<FuzzerId, std::size_t> held;
  for (const auto& f : assignment) ++held[f];
  return held;
}

FuzzerId Schedule::fuzzer_at(UnitId unit, double at_fraction) const {
  FuzzerId f = assignment.at(unit);
  for (const auto& r : reassignments) {
    if (r.unit == unit && r.at_fraction <= at_fraction) f = r.to;
  }
  return f;
}

SchedulerState::SchedulerState(std::span<const FuzzerId> fuzzers) {
  for (const auto& f : fuzzers) evals_.emplace(f, FuzzerEval{f, 0.0, 0.0});
}

const FuzzerEval* SchedulerState::find(const FuzzerId& f) const {
  auto it = evals_.find(f);
  return it == evals_.end() ? nullptr : &it->second;
}

std::vector<CandidateScore> score_candidates(const SchedulerState& state,
                                             std::span<const FuzzerId> fuzzers) {
  const double log_n = state.n_total() >= 1.0 ? std::log(state.n_total()) : 0.0;
  std::vector<CandidateScore> out;
  for (const auto& f : fuzzers) {
    const auto* e = state.find(f);
    if (!e || !e->primed()) continue;
    CandidateScore s;
    s.fuzzer = f;
    s.q = e->gamma / (e->gamma + e->t);
    s.u = std::sqrt(2.0 * log_n / e->t);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> softmax_probabilities(std::span<const CandidateScore> scores) {
  if (scores.empty()) throw Error("softmax over an empty candidate set");
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& s : scores) {
    if (!std::isfinite(s.score())) throw Error("softmax needs finite scores: " + s.fuzzer);
    top = std::max(top, s.score());
  }
  std::vector<double> p;
  p.reserve(scores.size());
  double total = 0.0;
  for (const auto& s : scores) {
    p.push_back(std::exp(s.score() - top));
    total += p.back();
  }
  for (auto& v : p) v /= total;
  return p;
}

FuzzerId softmax_select(std::span<const CandidateScore> scores, Rng& rng) {
  const auto p = softmax_probabilities(scores);
  const double draw = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (draw < acc) return scores[i].fuzzer;
  }
  return scores.back().fuzzer;
}

Schedule schedule_round(SchedulerState& state, std::span<const FuzzerId> fuzzers,
                        std::size_t units, Rng& rng) {
  if (units == 0) throw Error("schedule_round: need at least one resource unit");
  if (fuzzers.empty()) throw Error("schedule_round: empty fuzzer set");

  std::vector<FuzzerId> ordered(fuzzers.begin(), fuzzers.end());
  std::sort(ordered.begin(), ordered.end());
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());
  for (const auto& f : ordered) state.evals().try_emplace(f, FuzzerEval{f, 0.0, 0.0});

  double pulls = 0.0;
  for (const auto& [f, e] : state.evals()) pulls += e.t;
  state.set_n_total(state.n_total() + pulls);

  std::vector<FuzzerId> unprimed;
  for (const auto& f : ordered) {
    if (!state.find(f)->primed()) unprimed.push_back(f);
  }
  const auto candidates = score_candidates(state, ordered);

  Schedule sched;
  sched.assignment.reserve(units);
  std::size_t next_unprimed = 0;
  for (std::size_t unit = 0; unit < units; ++unit) {
    if (next_unprimed < unprimed.size()) {
      sched.assignment.push_back(unprimed[next_unprimed++]);
    } else if (!candidates.empty()) {
      sched.assignment.push_back(softmax_select(candidates, rng));
    } else {
      // Priming round with more units than fuzzers: every arm is pending,
      // so cycle through the priming queue again.
      sched.assignment.push_back(unprimed[unit % unprimed.size()]);
    }
  }
  return sched;
}

void feedback(SchedulerState& state, const std::map<FuzzerId, MetricVector>& round_metrics,
              const WeightVector& theta, const std::map<FuzzerId, double>& pulls) {
  for (const auto& [f, pull] : pulls) {
    if (!(pull > 0.0)) throw Error("feedback: pull count must be positive for " + f);
  }
  for (const auto& [f, pull] : pulls) {
    auto [it, inserted] = state.evals().try_emplace(f, FuzzerEval{f, 0.0, 0.0});
    auto m = round_metrics.find(f);
    const double gained = m == round_metrics.end() ? 0.0 : reward(m->second, theta);
    it->second.gamma += gained;
    it->second.t = pull;
  }
}

std::optional<FuzzerId> retarget(const std::map<FuzzerId, double>& current_round_rewards,
                                 const std::set<FuzzerId>& running,
                                 const std::map<FuzzerId, std::size_t>& units_held) {
  std::optional<FuzzerId> best;
  double best_reward = 0.0;
  std::size_t best_held = 0;
  auto lookup = [](const auto& map, const FuzzerId& f, auto fallback) {
    auto it = map.find(f);
    return it == map.end() ? fallback : it->second;
  };
  for (const auto& f : running) {  // std::set iterates in id order
    const double r = lookup(current_round_rewards, f, 0.0);
    const std::size_t held = lookup(units_held, f, std::size_t{0});
    if (!best || r > best_reward || (r == best_reward && held < best_held)) {
      best = f;
      best_reward = r;
      best_held = held;
    }
  }
  return best;
}

}  // namespace ensfuzz
