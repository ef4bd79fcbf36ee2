#include "ensfuzz/seedeval.hpp"

#include <cmath>
#include <set>

namespace ensfuzz {

MetricVector evaluate_pool(std::span<const ExecutionResult> pool, const FuzzRecord& snapshot,
                           const DeepEdgeSet& deep) {
  MetricVector m;
  if (pool.empty()) return m;

  std::set<EdgeId> covered;
  std::set<PathId> paths;
  std::set<CrashId> crashes;
  for (const auto& r : pool) {
    for (const auto& [edge, count] : r.coverage) covered.insert(edge);
    paths.insert(path_id(r.coverage));
    if (r.crashed) crashes.insert(crash_id(r.stack_frames));
  }

  const double rare_below = less_frequent_threshold(snapshot);
  for (EdgeId e : covered) {
    const auto known = snapshot.global_coverage.count(e);
    if (known == 0) ++m.c[0];
    if (deep.contains(e)) ++m.c[3];
    if (static_cast<double>(known) < rare_below) ++m.c[4];
  }
  for (const auto& p : paths) {
    if (!snapshot.known_paths.contains(p)) ++m.c[1];
  }
  for (const auto& c : crashes) {
    if (!snapshot.known_crashes.contains(c)) ++m.c[2];
  }
  return m;
}

MetricVector project(const MetricVector& m, BenefitMode mode) {
  if (mode == BenefitMode::Multidimensional) return m;
  MetricVector out;
  out.c[1] = m.c[1];
  return out;
}

WeightVector tune_weights(const std::map<FuzzerId, MetricVector>& vectors) {
  if (vectors.empty()) return WeightVector::uniform(1.0 / kMetricCount);
  const double n = static_cast<double>(vectors.size());
  std::array<double, kMetricCount> sigma{};
  for (std::size_t j = 0; j < kMetricCount; ++j) {
    double mean = 0.0;
    for (const auto& [f, v] : vectors) mean += static_cast<double>(v.c[j]);
    mean /= n;
    double var = 0.0;
    for (const auto& [f, v] : vectors) {
      const double d = static_cast<double>(v.c[j]) - mean;
      var += d * d;
    }
    sigma[j] = std::sqrt(var / n);
  }
  double total = 0.0;
  for (double s : sigma) total += s;
  if (total == 0.0) return WeightVector::uniform(1.0 / kMetricCount);
  WeightVector w;
  for (std::size_t j = 0; j < kMetricCount; ++j) w.theta[j] = sigma[j] / total;
  return w;
}

double reward(const MetricVector& m, const WeightVector& theta) {
  double sum = 0.0;
  for (std::size_t j = 0; j < kMetricCount; ++j) sum += theta.theta[j] * static_cast<double>(m.c[j]);
  return sum;
}

bool is_beneficial(const ExecutionResult& r, const FuzzRecord& snapshot, const DeepEdgeSet& deep,
                   BenefitMode mode) {
  return !project(evaluate_pool(std::span(&r, 1), snapshot, deep), mode).is_zero();
}

}  // namespace ensfuzz
