#pragma once

// Per-round assignment of resource units to base fuzzers.
//
// Each fuzzer is a bandit arm with accumulated reward gamma and the pull
// count t of the last round in which it ran. A primed arm scores
//
//   q = gamma / (gamma + t)          u = sqrt(2 ln N / t)
//
// and a unit goes to arm f with probability exp(q_f + u_f) / sum exp(q + u).
// Arms with t == 0 have never run; they are handed out first, lowest id
// first, one unit each, and sit out the soft-max draws of that round.

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "ensfuzz/common.hpp"
#include "ensfuzz/seedeval.hpp"

namespace ensfuzz {

struct FuzzerEval {
  FuzzerId fuzzer;
  double gamma = 0.0;
  double t = 0.0;

  bool primed() const noexcept { return t != 0.0; }
  bool operator==(const FuzzerEval&) const = default;
};

struct CandidateScore {
  FuzzerId fuzzer;
  double q = 0.0;
  double u = 0.0;  // +inf for an arm that has never run

  double score() const noexcept { return q + u; }
};

struct Reassignment {
  double at_fraction = 0.0;  // of the round, in [0.5, 1]
  UnitId unit = 0;
  FuzzerId from;
  FuzzerId to;

  bool operator==(const Reassignment&) const = default;
};

struct Schedule {
  /// Fuzzer running on each unit at round start; index is the unit.
  std::vector<FuzzerId> assignment;
  std::vector<Reassignment> reassignments;

  std::size_t units() const noexcept { return assignment.size(); }
  /// Units held per fuzzer at round start.
  std::map<FuzzerId, std::size_t> units_held() const;
  /// Fuzzer on `unit` at a point of the round, after applying reassignments
  /// that happened at or before `at_fraction`.
  FuzzerId fuzzer_at(UnitId unit, double at_fraction) const;

  bool operator==(const Schedule&) const = default;
};

class SchedulerState {
 public:
  SchedulerState() = default;
  /// Starts every fuzzer at gamma = 0, t = 0.
  explicit SchedulerState(std::span<const FuzzerId> fuzzers);

  const std::map<FuzzerId, FuzzerEval>& evals() const noexcept { return evals_; }
  std::map<FuzzerId, FuzzerEval>& evals() noexcept { return evals_; }
  double n_total() const noexcept { return n_total_; }
  void set_n_total(double n) { n_total_ = n; }
  const FuzzerEval* find(const FuzzerId& f) const;

 private:
  std::map<FuzzerId, FuzzerEval> evals_;
  double n_total_ = 0.0;
};

/// Scores of every primed fuzzer in `fuzzers` (N taken from `state`).
std::vector<CandidateScore> score_candidates(const SchedulerState& state,
                                             std::span<const FuzzerId> fuzzers);

/// Selection probabilities, max-shifted before exponentiation.
std::vector<double> softmax_probabilities(std::span<const CandidateScore> scores);

/// Draws one fuzzer using exactly one uniform variate from `rng`.
FuzzerId softmax_select(std::span<const CandidateScore> scores, Rng& rng);

/// Adds sum(t) to N once, then assigns every unit.
Schedule schedule_round(SchedulerState& state, std::span<const FuzzerId> fuzzers,
                        std::size_t units, Rng& rng);

/// Accumulates rewards and replaces pull counts for the fuzzers that ran.
void feedback(SchedulerState& state, const std::map<FuzzerId, MetricVector>& round_metrics,
              const WeightVector& theta, const std::map<FuzzerId, double>& pulls);

/// Best running fuzzer by current-round reward; ties go to the one holding
/// fewer units, then to the lowest id. nullopt means nobody is producing.
std::optional<FuzzerId> retarget(const std::map<FuzzerId, double>& current_round_rewards,
                                 const std::set<FuzzerId>& running,
                                 const std::map<FuzzerId, std::size_t>& units_held = {});

}  // namespace ensfuzz
