#include "ensfuzz/callgraph.hpp"

#include <charconv>
#include <deque>
#include <sstream>

namespace ensfuzz {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++lineno;
    auto tokens = split_ws(line);
    if (!tokens.empty() && tokens.front().front() != '#') fn(lineno, tokens);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
}

}  // namespace

void CallGraph::add_call(const Function& caller, const Function& callee) {
  functions_.insert(caller);
  functions_.insert(callee);
  calls_.emplace(caller, callee);
}

void CallGraph::add_entry(const Function& f) {
  if (!functions_.contains(f)) throw Error("entry function not in call graph: " + f);
  entries_.insert(f);
}

std::map<CallGraph::Function, std::vector<CallGraph::Function>> CallGraph::adjacency() const {
  std::map<Function, std::vector<Function>> adj;
  for (const auto& f : functions_) adj[f];
  for (const auto& [caller, callee] : calls_) adj[caller].push_back(callee);
  return adj;
}

CallGraph parse_callgraph(std::string_view text) {
  CallGraph g;
  for_each_line(text, [&](std::size_t lineno, const std::vector<std::string_view>& tokens) {
    if (tokens.size() == 1) {
      g.add_function(std::string(tokens[0]));
    } else if (tokens.size() == 2) {
      g.add_call(std::string(tokens[0]), std::string(tokens[1]));
    } else {
      throw ParseError(lineno, "expected `caller callee` or a single function name");
    }
  });
  if (g.empty()) throw ParseError(0, "empty call graph");
  return g;
}

void parse_entries(std::string_view text, CallGraph& g) {
  for_each_line(text, [&](std::size_t lineno, const std::vector<std::string_view>& tokens) {
    if (tokens.size() != 1) throw ParseError(lineno, "expected one function name per line");
    std::string name(tokens[0]);
    if (!g.functions().contains(name)) throw ParseError(lineno, "unknown entry function: " + name);
    g.add_entry(name);
  });
}

DepthMap compute_depths(const CallGraph& g, double rho) {
  if (g.empty()) throw Error("empty call graph");
  if (!(rho > 0.0)) throw Error("rho must be positive");

  DepthMap d;
  d.rho = rho;
  d.entries = g.entries();
  if (d.entries.empty()) {
    std::set<std::string> called;
    for (const auto& [caller, callee] : g.calls()) {
      if (caller != callee) called.insert(callee);
    }
    for (const auto& f : g.functions()) {
      if (!called.contains(f)) d.entries.insert(f);
    }
  }
  if (d.entries.empty()) throw Error("no entry function");

  for (const auto& f : g.functions()) d.depth[f] = std::nullopt;
  auto adj = g.adjacency();
  std::deque<std::string> frontier;
  for (const auto& e : d.entries) {
    d.depth[e] = 0;
    frontier.push_back(e);
  }
  while (!frontier.empty()) {
    auto f = std::move(frontier.front());
    frontier.pop_front();
    const std::size_t next = *d.depth[f] + 1;
    for (const auto& callee : adj[f]) {
      auto& slot = d.depth[callee];
      if (!slot) {
        slot = next;
        frontier.push_back(callee);
      }
    }
  }

  std::size_t reachable = 0;
  double sum = 0.0;
  for (const auto& [f, depth] : d.depth) {
    if (depth) {
      ++reachable;
      sum += static_cast<double>(*depth);
    }
  }
  d.mean_depth = reachable ? sum / static_cast<double>(reachable) : 0.0;
  d.deep_threshold = rho * d.mean_depth;
  return d;
}

std::set<std::string> deep_functions(const DepthMap& d) {
  std::set<std::string> out;
  for (const auto& [f, depth] : d.depth) {
    if (!depth || static_cast<double>(*depth) > d.deep_threshold) out.insert(f);
  }
  return out;
}

EdgeMap parse_edge_map(std::string_view text) {
  EdgeMap map;
  for_each_line(text, [&](std::size_t lineno, const std::vector<std::string_view>& tokens) {
    if (tokens.size() != 2) throw ParseError(lineno, "expected `edge_id function_name`");
    auto tok = tokens[0];
    int base = 10;
    if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) {
      tok.remove_prefix(2);
      base = 16;
    }
    EdgeId id = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), id, base);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
      throw ParseError(lineno, "bad edge id: " + std::string(tokens[0]));
    }
    map[id] = std::string(tokens[1]);
  });
  return map;
}

std::unordered_set<EdgeId> deep_edges(const EdgeMap& edges, const DepthMap& d) {
  auto deep = deep_functions(d);
  std::unordered_set<EdgeId> out;
  for (const auto& [edge, fn] : edges) {
    if (deep.contains(fn) || !d.depth.contains(fn)) out.insert(edge);
  }
  return out;
}

}  // namespace ensfuzz
