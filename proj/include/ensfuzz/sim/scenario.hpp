#pragma once

// Synthetic targets for desk-scale campaigns.
//
// A scenario is a forest of edges. Each edge sits behind a gate label
// (FORMAT, LOOP, MAGIC, SOLVER, ...) and can only be reached once its parent
// edge is covered by some seed in the instance's corpus. Fuzzer profiles give
// a discovery rate per gate and unit-second; edges gated NONE are reached by
// every input. Crash sites are edges that, once reached, yield a crashing
// input at rate (gate rate x crash_prob).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ensfuzz/callgraph.hpp"
#include "ensfuzz/common.hpp"
#include "ensfuzz/record.hpp"

namespace ensfuzz::sim {

inline constexpr std::string_view kOpenGate = "NONE";

struct SimEdge {
  EdgeId id = 0;
  std::string gate{kOpenGate};
  std::optional<EdgeId> parent;
  std::string function;
  std::uint32_t hits = 1;
  double crash_prob = 0.0;

  bool operator==(const SimEdge&) const = default;
};

struct FuzzerProfile {
  FuzzerId name;
  std::map<std::string, double> rates;  // gate -> discoveries per unit-second
  /// Rate of seeds that replay an already reached edge of the fuzzer's own
  /// gates (new inputs, no new coverage).
  double revisit_rate = 0.0;
  /// Fraction of the round after which the fuzzer produces nothing.
  double dry_after = 1.0;

  double rate(const std::string& gate) const {
    auto it = rates.find(gate);
    return it == rates.end() ? 0.0 : it->second;
  }
  bool operator==(const FuzzerProfile&) const = default;
};

/// Campaign shape stored alongside a scenario; CLI flags override it.
struct SimDefaults {
  std::size_t rounds = 10;
  std::size_t units = 3;
  double round_time = 600.0;
  double monitor_time = 30.0;

  bool operator==(const SimDefaults&) const = default;
};

class Scenario {
 public:
  std::string name = "scenario";
  std::uint64_t seed = 0;
  SimDefaults defaults;
  CallGraph callgraph;
  std::vector<SimEdge> edges;  // ascending id, parents before children
  std::vector<FuzzerProfile> profiles;

  /// Checks invariants and builds lookup tables. Call after editing.
  void finalize();

  const SimEdge* edge(EdgeId id) const;
  const FuzzerProfile* profile(const FuzzerId& f) const;
  std::vector<FuzzerId> fuzzer_ids() const;
  EdgeMap edge_map() const;

  /// Edges every input reaches.
  const std::vector<EdgeId>& open_edges() const noexcept { return open_; }
  /// Root-to-edge chain, inclusive.
  std::vector<EdgeId> chain(EdgeId id) const;
  /// Innermost-first synthetic stack for a crash at `id`.
  std::vector<Frame> crash_frames(EdgeId id) const;

  /// Deterministic replay of a simulated payload; see payload helpers below.
  ExecutionResult execute(std::string_view payload) const;

  bool operator==(const Scenario& o) const {
    return name == o.name && seed == o.seed && defaults == o.defaults &&
           callgraph.functions() == o.callgraph.functions() &&
           callgraph.calls() == o.callgraph.calls() &&
           callgraph.entries() == o.callgraph.entries() && edges == o.edges &&
           profiles == o.profiles;
  }

 private:
  std::map<EdgeId, std::size_t> index_;
  std::vector<EdgeId> open_;
  std::map<std::string, std::vector<std::string>> call_chain_;  // fn -> innermost-first
};

/// Payload reaching `edge`; `variant` makes distinct inputs with equal coverage.
std::string reach_payload(EdgeId edge, std::uint64_t variant);
/// Payload reaching `edge` and triggering its crash (if it is a crash site).
std::string crash_payload(EdgeId edge, std::uint64_t variant);
/// Edge a simulated payload aims at; nullopt for foreign payloads.
std::optional<EdgeId> payload_edge(std::string_view payload);

struct RegionParams {
  std::string name;
  std::string gate{kOpenGate};
  std::size_t edges = 1;
  std::string parent;  // region name; empty for a root region
  std::size_t functions = 1;
  std::uint32_t hits = 1;
  bool chain = false;  // edges in a line instead of a random tree
  std::size_t crash_sites = 0;  // last edges of the region
  double crash_prob = 0.0;
};

struct ScenarioParams {
  std::string name = "generated";
  std::uint64_t seed = 0;
  SimDefaults defaults;
  std::vector<RegionParams> regions;
  std::vector<FuzzerProfile> profiles;
};

/// Builds a scenario from region descriptions; same params give the same
/// scenario.
Scenario gen_scenario(const ScenarioParams& params);

/// The hand-off scenario used by the acceptance suite.
ScenarioParams handoff_params(std::uint64_t seed = 42);

/// TOML scenario file: explicit `[[edge]]` tables or `[[region]]` generator
/// tables, plus `[[profile]]` tables.
Scenario parse_scenario(std::string_view toml_text);
std::string dump_scenario(const Scenario& s);

}  // namespace ensfuzz::sim
