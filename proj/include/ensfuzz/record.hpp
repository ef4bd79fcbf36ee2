#pragma once

// The campaign-wide fuzzing record: edge hit counts, known execution paths
// and known crashes, plus the identities used to deduplicate them.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ensfuzz/common.hpp"

namespace ensfuzz {

using PathId = Id128<struct PathTag>;
using CrashId = Id128<struct CrashTag>;

/// Edge id -> hit count. Stored counts are always >= 1.
class CoverageMap {
 public:
  CoverageMap() = default;
  CoverageMap(std::initializer_list<std::pair<const EdgeId, std::uint64_t>> init) {
    for (const auto& [e, c] : init) add(e, c);
  }

  /// Adds `count` hits to `edge`; zero is a no-op.
  void add(EdgeId edge, std::uint64_t count = 1) {
    if (count != 0) hits_[edge] += count;
  }
  std::uint64_t count(EdgeId edge) const {
    auto it = hits_.find(edge);
    return it == hits_.end() ? 0 : it->second;
  }
  bool contains(EdgeId edge) const { return hits_.contains(edge); }
  std::size_t size() const noexcept { return hits_.size(); }
  bool empty() const noexcept { return hits_.empty(); }

  auto begin() const { return hits_.begin(); }
  auto end() const { return hits_.end(); }

  bool operator==(const CoverageMap&) const = default;

 private:
  std::map<EdgeId, std::uint64_t> hits_;
};

/// One stack frame after normalization: function name plus offset into it.
struct Frame {
  std::string function;
  std::uint64_t offset = 0;

  auto operator<=>(const Frame&) const = default;
  std::string str() const;
};

/// Parses `name+0xOFF`, dropping any absolute address tokens (`0x7ff...`,
/// `[0x...]`, `@0x...`) around it. A bare name gets offset 0.
Frame normalize_frame(std::string_view text);

struct ExecutionResult {
  CoverageMap coverage;
  bool crashed = false;
  std::vector<Frame> stack_frames;  // nonempty iff crashed
  bool replay_failed = false;

  bool operator==(const ExecutionResult&) const = default;
};

/// Coverage interchange text: `edge_id count` lines plus an optional
/// trailing `CRASH frame1;frame2;...` line.
ExecutionResult parse_coverage(std::string_view text);
std::string format_coverage(const ExecutionResult& r);

/// AFL-style hit-count class, 0..7 for {1,2,3,4-7,8-15,16-31,32-127,>=128}.
std::uint8_t count_bucket(std::uint64_t count);

/// Digest of (little-endian edge id, bucket index) pairs in ascending edge
/// order.
PathId path_id(const CoverageMap& c);

/// Digest of the first three frames. Throws on an empty trace.
CrashId crash_id(const std::vector<Frame>& frames);

inline constexpr std::size_t kCrashFrames = 3;

struct FuzzRecord {
  CoverageMap global_coverage;
  std::set<PathId> known_paths;
  std::set<CrashId> known_crashes;
  std::uint64_t crash_total = 0;
};

struct MergeDelta {
  std::size_t new_edges = 0;
  bool new_path = false;
  bool new_unique_crash = false;
};

/// Folds one execution into the record and reports what was new.
MergeDelta merge(FuzzRecord& m, const ExecutionResult& r);

/// Half the mean hit count over covered edges, 0 for an empty record.
double less_frequent_threshold(const FuzzRecord& m);

}  // namespace ensfuzz
