#pragma once

// Static call-graph ingestion and the depth-based "deep function" predicate.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ensfuzz/common.hpp"

namespace ensfuzz {

inline constexpr double kDefaultRho = 1.5;

class CallGraph {
 public:
  using Function = std::string;
  using Call = std::pair<Function, Function>;

  void add_function(const Function& f) { functions_.insert(f); }
  /// Adds both endpoints; duplicate calls collapse.
  void add_call(const Function& caller, const Function& callee);
  void add_entry(const Function& f);

  const std::set<Function>& functions() const noexcept { return functions_; }
  const std::set<Call>& calls() const noexcept { return calls_; }
  const std::set<Function>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return functions_.empty(); }

  /// Callees of each function, for traversal.
  std::map<Function, std::vector<Function>> adjacency() const;

 private:
  std::set<Function> functions_;
  std::set<Call> calls_;
  std::set<Function> entries_;
};

/// Edge-list text: `caller callee` per line, single token declares an
/// isolated function, `#` starts a comment line.
CallGraph parse_callgraph(std::string_view text);
/// One entry function per line; every name must already be in `g`.
void parse_entries(std::string_view text, CallGraph& g);

struct DepthMap {
  /// nullopt marks a function unreachable from the entry set.
  std::map<std::string, std::optional<std::size_t>> depth;
  std::set<std::string> entries;
  double mean_depth = 0.0;
  double deep_threshold = 0.0;
  double rho = kDefaultRho;
};

/// Breadth-first depths from the designated entries, or from the in-degree-0
/// functions (self-calls ignored) when none are designated.
DepthMap compute_depths(const CallGraph& g, double rho = kDefaultRho);

/// Functions strictly deeper than the threshold, plus unreachable ones.
std::set<std::string> deep_functions(const DepthMap& d);

/// Owning function of each dynamic edge id.
using EdgeMap = std::map<EdgeId, std::string>;

/// Lines `edge_id function_name`; edge ids are decimal or 0x-prefixed hex.
EdgeMap parse_edge_map(std::string_view text);

/// Edges owned by a deep function. Edges whose owner is absent from the
/// call graph are treated like unreachable code.
std::unordered_set<EdgeId> deep_edges(const EdgeMap& edges, const DepthMap& d);

}  // namespace ensfuzz
