#pragma once

// Five-metric evaluation of local seed pools against a record snapshot.
//
//   c0  edges covered by the pool and absent from the snapshot
//   c1  distinct path ids of the pool not yet known
//   c2  distinct crash ids of the pool not yet known
//   c3  distinct covered edges that are deep
//   c4  distinct covered edges whose snapshot count is below half the mean
//
// Every pool in a round is scored against the same round-start snapshot so
// two fuzzers that find the same new edge both get credit for it.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <unordered_set>

#include "ensfuzz/common.hpp"
#include "ensfuzz/record.hpp"

namespace ensfuzz {

inline constexpr std::size_t kMetricCount = 5;

struct MetricVector {
  std::array<std::uint64_t, kMetricCount> c{};

  bool is_zero() const {
    for (auto v : c) {
      if (v) return false;
    }
    return true;
  }
  bool operator==(const MetricVector&) const = default;
};

struct WeightVector {
  std::array<double, kMetricCount> theta{};

  static WeightVector uniform(double w) {
    WeightVector v;
    v.theta.fill(w);
    return v;
  }
  /// All-ones weights used for the yes/no benefit checks.
  static WeightVector qualitative() { return uniform(1.0); }
  bool operator==(const WeightVector&) const = default;
};

/// Which notion of "beneficial" a policy uses. PathOnly keeps only c1
/// (a seed counts iff it executes a path nobody has seen).
enum class BenefitMode { Multidimensional, PathOnly };

using DeepEdgeSet = std::unordered_set<EdgeId>;

MetricVector evaluate_pool(std::span<const ExecutionResult> pool, const FuzzRecord& snapshot,
                           const DeepEdgeSet& deep);

/// Zeroes the components a benefit mode ignores.
MetricVector project(const MetricVector& m, BenefitMode mode);

/// theta_j = sigma_j / sum(sigma) with population standard deviations across
/// fuzzers; uniform 0.2 when every sigma is zero.
WeightVector tune_weights(const std::map<FuzzerId, MetricVector>& vectors);

double reward(const MetricVector& m, const WeightVector& theta);

bool is_beneficial(const ExecutionResult& r, const FuzzRecord& snapshot, const DeepEdgeSet& deep,
                   BenefitMode mode = BenefitMode::Multidimensional);

}  // namespace ensfuzz
