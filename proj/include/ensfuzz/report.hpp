#pragma once

// Round logs and the final campaign report, with their JSON and CSV forms.
// The JSON layout is documented in docs/formats.md.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ensfuzz/record.hpp"
#include "ensfuzz/scheduler.hpp"
#include "ensfuzz/seedeval.hpp"
#include "ensfuzz/seedpool.hpp"

namespace ensfuzz {

inline constexpr int kReportSchemaVersion = 1;

struct RecordTotals {
  std::size_t edges = 0;
  std::size_t paths = 0;
  std::size_t unique_crashes = 0;
  std::uint64_t crash_events = 0;
  std::size_t global_seeds = 0;

  bool operator==(const RecordTotals&) const = default;
};

struct FuzzerRoundStats {
  std::size_t units_held = 0;  // at round start
  double pulls = 0.0;          // time-weighted units
  MetricVector metrics;
  double gamma_new = 0.0;
  std::size_t seeds = 0;       // harvested this round
  std::size_t uploaded = 0;    // of which beneficial and new to the global pool

  bool operator==(const FuzzerRoundStats&) const = default;
};

struct StopEvent {
  double at = 0.0;  // seconds into the round
  UnitId unit = 0;
  FuzzerId fuzzer;
  double held = 0.0;  // fraction of the round
  std::string reason;  // "dry", "early-end", "round-end", "focus", "exited"

  bool operator==(const StopEvent&) const = default;
};

struct RoundLog {
  std::size_t round = 0;  // 1-based
  Schedule schedule;
  std::map<FuzzerId, FuzzerRoundStats> fuzzers;
  WeightVector theta;
  RecordTotals totals;  // after the round's sync
  bool early_terminated = false;
  double duration = 0.0;
  std::vector<double> monitor_ticks;
  std::vector<StopEvent> stops;
  double n_total = 0.0;
  std::map<FuzzerId, FuzzerEval> evals;  // scheduler state after feedback

  bool operator==(const RoundLog&) const = default;
};

struct CrashBucket {
  CrashId id;
  std::vector<Frame> frames;  // top frames of the first representative
  std::vector<SeedId> representatives;

  bool operator==(const CrashBucket&) const = default;
};

struct CampaignReport {
  int schema_version = kReportSchemaVersion;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<FuzzerId> fuzzers;
  std::size_t units = 0;
  RecordTotals totals;
  std::vector<RoundLog> rounds;
  std::vector<CrashBucket> crashes;
  double duration = 0.0;

  /// Share of the round's units each fuzzer held (pulls / units).
  std::map<FuzzerId, double> resource_shares(std::size_t round_index) const;

  bool operator==(const CampaignReport&) const = default;
};

enum class ReportFormat { Json, Csv };
ReportFormat parse_format(std::string_view name);

nlohmann::ordered_json round_to_json(const RoundLog& log, std::size_t units);
RoundLog round_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json report_to_json(const CampaignReport& r);
CampaignReport report_from_json(const nlohmann::ordered_json& j);

std::string emit_report(const CampaignReport& r, ReportFormat format);

/// Accepts either a full JSON report or a line log (header, round and
/// optional final records). A log without its final record is completed
/// from the last round.
CampaignReport parse_report(std::string_view text);

/// Line-log records written while a campaign runs.
std::string log_header_line(const CampaignReport& skeleton);
std::string log_round_line(const RoundLog& log, std::size_t units);
std::string log_final_line(const CampaignReport& report);

/// Crash buckets from crashing executions of the global pool, by crash id.
std::vector<CrashBucket> bucket_crashes(const SeedPool& global,
                                        const std::map<SeedId, ExecutionResult>& results);

RecordTotals totals_of(const FuzzRecord& m, std::size_t global_seeds);

}  // namespace ensfuzz
