#include "ensfuzz/sim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <set>
#include <sstream>

#include <toml.hpp>

namespace ensfuzz::sim {
namespace {

std::string hex(std::uint64_t v) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof buf, v, 16);
  return std::string(buf, res.ptr);
}

bool parse_hex(std::string_view s, std::uint64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out, 16);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::string reach_payload(EdgeId edge, std::uint64_t variant) {
  return "sim:d:" + hex(edge) + ":" + hex(variant);
}

std::string crash_payload(EdgeId edge, std::uint64_t variant) {
  return "sim:c:" + hex(edge) + ":" + hex(variant);
}

std::optional<EdgeId> payload_edge(std::string_view payload) {
  if (!payload.starts_with("sim:") || payload.size() < 7) return std::nullopt;
  if (payload[4] != 'd' && payload[4] != 'c') return std::nullopt;
  auto rest = payload.substr(6);
  EdgeId target = 0;
  if (!parse_hex(rest.substr(0, rest.find(':')), target)) return std::nullopt;
  return target;
}

void Scenario::finalize() {
  index_.clear();
  open_.clear();
  call_chain_.clear();

  std::sort(edges.begin(), edges.end(), [](const SimEdge& a, const SimEdge& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!index_.emplace(edges[i].id, i).second) {
      throw Error("scenario: duplicate edge id " + std::to_string(edges[i].id));
    }
  }
  for (const auto& e : edges) {
    if (e.gate.empty()) throw Error("scenario: edge " + std::to_string(e.id) + " has no gate");
    if (e.crash_prob < 0.0 || e.crash_prob > 1.0) {
      throw Error("scenario: crash_prob out of [0,1] on edge " + std::to_string(e.id));
    }
    if (e.function.empty() || !callgraph.functions().contains(e.function)) {
      throw Error("scenario: edge " + std::to_string(e.id) + " owned by unknown function '" +
                  e.function + "'");
    }
    if (e.parent) {
      if (!index_.contains(*e.parent)) {
        throw Error("scenario: edge " + std::to_string(e.id) + " has unknown parent");
      }
      // Walk up to reject cycles.
      std::size_t steps = 0;
      for (auto p = e.parent; p; p = edges[index_.at(*p)].parent) {
        if (*p == e.id || ++steps > edges.size()) {
          throw Error("scenario: parent cycle through edge " + std::to_string(e.id));
        }
      }
    }
  }
  for (const auto& e : edges) {
    if (e.gate != kOpenGate) continue;
    if (e.parent && edges[index_.at(*e.parent)].gate != kOpenGate) {
      throw Error("scenario: NONE-gated edge " + std::to_string(e.id) + " below a gated edge");
    }
    open_.push_back(e.id);
  }
  std::set<FuzzerId> names;
  for (const auto& p : profiles) {
    if (p.name.empty() || !names.insert(p.name).second) {
      throw Error("scenario: profile names must be unique and nonempty");
    }
    if (p.revisit_rate < 0.0 || p.dry_after < 0.0) throw Error("scenario: negative rate in " + p.name);
    for (const auto& [gate, r] : p.rates) {
      if (r < 0.0) throw Error("scenario: negative discovery rate in " + p.name + "." + gate);
    }
  }

  // Shortest call chains from the entries, for synthetic stacks.
  std::set<std::string> roots = callgraph.entries();
  if (roots.empty()) {
    auto d = compute_depths(callgraph);
    roots = d.entries;
  }
  auto adj = callgraph.adjacency();
  std::map<std::string, std::string> caller_of;
  std::deque<std::string> frontier(roots.begin(), roots.end());
  std::set<std::string> seen(roots.begin(), roots.end());
  while (!frontier.empty()) {
    auto f = frontier.front();
    frontier.pop_front();
    for (const auto& callee : adj[f]) {
      if (seen.insert(callee).second) {
        caller_of[callee] = f;
        frontier.push_back(callee);
      }
    }
  }
  for (const auto& f : callgraph.functions()) {
    std::vector<std::string> chain{f};
    for (auto it = caller_of.find(f); it != caller_of.end(); it = caller_of.find(it->second)) {
      chain.push_back(it->second);
    }
    call_chain_[f] = std::move(chain);
  }
}

const SimEdge* Scenario::edge(EdgeId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &edges[it->second];
}

const FuzzerProfile* Scenario::profile(const FuzzerId& f) const {
  for (const auto& p : profiles) {
    if (p.name == f) return &p;
  }
  return nullptr;
}

std::vector<FuzzerId> Scenario::fuzzer_ids() const {
  std::vector<FuzzerId> out;
  for (const auto& p : profiles) out.push_back(p.name);
  std::sort(out.begin(), out.end());
  return out;
}

EdgeMap Scenario::edge_map() const {
  EdgeMap m;
  for (const auto& e : edges) m[e.id] = e.function;
  return m;
}

std::vector<EdgeId> Scenario::chain(EdgeId id) const {
  std::vector<EdgeId> out;
  for (const SimEdge* e = edge(id); e; e = e->parent ? edge(*e->parent) : nullptr) out.push_back(e->id);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<Frame> Scenario::crash_frames(EdgeId id) const {
  const SimEdge* e = edge(id);
  if (!e) throw Error("scenario: no edge " + std::to_string(id));
  std::vector<Frame> frames;
  const auto& fns = call_chain_.at(e->function);
  for (std::size_t i = 0; i < fns.size(); ++i) {
    frames.push_back(Frame{fns[i], i == 0 ? (0x10 * id) & 0xffff : 0x20});
  }
  return frames;
}

ExecutionResult Scenario::execute(std::string_view payload) const {
  ExecutionResult r;
  for (EdgeId e : open_) r.coverage.add(e, edge(e)->hits);

  auto target = payload_edge(payload);
  const SimEdge* tgt = target ? edge(*target) : nullptr;
  if (!tgt) return r;
  for (EdgeId e : chain(tgt->id)) {
    if (!r.coverage.contains(e)) r.coverage.add(e, edge(e)->hits);
  }
  if (payload[4] == 'c' && tgt->crash_prob > 0.0) {
    r.crashed = true;
    r.stack_frames = crash_frames(tgt->id);
  }
  return r;
}

Scenario gen_scenario(const ScenarioParams& params) {
  Scenario s;
  s.name = params.name;
  s.seed = params.seed;
  s.defaults = params.defaults;
  s.profiles = params.profiles;
  s.callgraph.add_function("main");
  s.callgraph.add_entry("main");

  struct Built {
    std::vector<std::string> functions;
    std::vector<EdgeId> edges;
  };
  std::map<std::string, Built> built;
  Rng rng(mix_seed({params.seed, 0x5ce7a210ULL}));
  EdgeId next_id = 1;

  for (const auto& r : params.regions) {
    if (r.name.empty() || built.contains(r.name)) throw Error("scenario params: bad region name '" + r.name + "'");
    if (r.edges == 0) throw Error("scenario params: region '" + r.name + "' has no edges");
    if (r.crash_sites > r.edges) throw Error("scenario params: more crash sites than edges in " + r.name);
    const Built* parent = nullptr;
    if (!r.parent.empty()) {
      auto it = built.find(r.parent);
      if (it == built.end()) throw Error("scenario params: region '" + r.name + "' names unknown parent '" + r.parent + "'");
      parent = &it->second;
    }

    Built b;
    const std::string caller = parent ? parent->functions.back() : std::string("main");
    if (r.functions == 0) {
      b.functions.push_back(caller);
    } else {
      std::string prev = caller;
      for (std::size_t i = 0; i < r.functions; ++i) {
        std::string fn = r.name + "_" + std::to_string(i);
        s.callgraph.add_call(prev, fn);
        prev = fn;
        b.functions.push_back(fn);
      }
    }

    for (std::size_t k = 0; k < r.edges; ++k) {
      SimEdge e;
      e.id = next_id++;
      e.gate = r.gate;
      e.function = b.functions[k * b.functions.size() / r.edges];
      e.hits = r.hits;
      if (k == 0) {
        if (parent) e.parent = parent->edges.back();
      } else if (r.chain) {
        e.parent = b.edges.back();
      } else {
        e.parent = b.edges[rng() % k];
      }
      if (k + r.crash_sites >= r.edges) e.crash_prob = r.crash_prob;
      b.edges.push_back(e.id);
      s.edges.push_back(std::move(e));
    }
    built.emplace(r.name, std::move(b));
  }
  s.finalize();
  return s;
}

ScenarioParams handoff_params(std::uint64_t seed) {
  ScenarioParams p;
  p.name = "handoff";
  p.seed = seed;
  p.defaults = SimDefaults{20, 6, 600.0, 30.0};
  // A parser check, a long-running loop, a constraint solver stage behind the
  // loop and magic-value comparisons at the bottom.
  p.regions = {
      {"entry", "NONE", 6, "", 0, 1, true, 0, 0.0},
      {"parse", "FORMAT", 60, "entry", 2, 1, false, 0, 0.0},
      {"loop", "LOOP", 40, "parse", 2, 40, false, 0, 0.0},
      {"cmp", "MAGIC", 20, "parse", 1, 1, false, 0, 0.0},
      {"solve", "SOLVER", 80, "loop", 3, 1, false, 1, 0.3},
      {"magic", "MAGIC", 24, "solve", 2, 1, true, 1, 0.5},
  };
  // Only the generator passes the parser quickly; only the hybrid gets
  // through the solver stage. The blackbox fuzzer keeps producing inputs
  // that never leave the entry code.
  p.profiles = {
      {"generator", {{"FORMAT", 0.01}}, 0.05, 1.0},
      {"hybrid", {{"SOLVER", 0.002}, {"LOOP", 0.003}}, 0.05, 1.0},
      {"mutator", {{"LOOP", 0.001}, {"FORMAT", 0.001}, {"MAGIC", 0.0005}}, 0.1, 1.0},
      {"cmplog", {{"MAGIC", 0.004}}, 0.05, 1.0},
      {"blackbox", {{"NONE", 1.0}}, 0.2, 1.0},
      {"stalled", {}, 0.0, 1.0},
  };
  return p;
}

// ---------------------------------------------------------------------------
// TOML
// ---------------------------------------------------------------------------

namespace {

template <typename T>
T get_or(const toml::table& t, std::string_view key, T fallback) {
  if (auto v = t[key].value<T>()) return *v;
  return fallback;
}

std::uint64_t get_u64(const toml::table& t, std::string_view key, std::uint64_t fallback) {
  if (auto v = t[key].value<std::int64_t>()) {
    if (*v < 0) throw Error("scenario: '" + std::string(key) + "' must be nonnegative");
    return static_cast<std::uint64_t>(*v);
  }
  return fallback;
}

FuzzerProfile read_profile(const toml::table& t) {
  FuzzerProfile p;
  p.name = get_or<std::string>(t, "name", "");
  p.revisit_rate = get_or<double>(t, "revisit_rate", 0.0);
  p.dry_after = get_or<double>(t, "dry_after", 1.0);
  if (auto* rates = t["rates"].as_table()) {
    for (const auto& [gate, v] : *rates) {
      auto r = v.value<double>();
      if (!r) throw Error("scenario: rate for gate '" + std::string(gate.str()) + "' is not a number");
      p.rates[std::string(gate.str())] = *r;
    }
  }
  return p;
}

}  // namespace

Scenario parse_scenario(std::string_view toml_text) {
  toml::table doc;
  try {
    doc = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw ParseError(e.source().begin.line, std::string(e.description()));
  }

  ScenarioParams params;
  if (auto* head = doc["scenario"].as_table()) {
    params.name = get_or<std::string>(*head, "name", params.name);
    params.seed = get_u64(*head, "seed", 0);
  }
  if (auto* c = doc["campaign"].as_table()) {
    params.defaults.rounds = get_u64(*c, "rounds", params.defaults.rounds);
    params.defaults.units = get_u64(*c, "units", params.defaults.units);
    params.defaults.round_time = get_or<double>(*c, "round_time", params.defaults.round_time);
    params.defaults.monitor_time = get_or<double>(*c, "monitor_time", params.defaults.monitor_time);
  }
  if (auto* profiles = doc["profile"].as_array()) {
    for (const auto& node : *profiles) {
      if (auto* t = node.as_table()) params.profiles.push_back(read_profile(*t));
    }
  }

  if (auto* regions = doc["region"].as_array()) {
    for (const auto& node : *regions) {
      const auto* t = node.as_table();
      if (!t) continue;
      RegionParams r;
      r.name = get_or<std::string>(*t, "name", "");
      r.gate = get_or<std::string>(*t, "gate", std::string(kOpenGate));
      r.edges = get_u64(*t, "edges", 1);
      r.parent = get_or<std::string>(*t, "parent", "");
      r.functions = get_u64(*t, "functions", 1);
      r.hits = static_cast<std::uint32_t>(get_u64(*t, "hits", 1));
      r.chain = get_or<bool>(*t, "chain", false);
      r.crash_sites = get_u64(*t, "crash_sites", 0);
      r.crash_prob = get_or<double>(*t, "crash_prob", 0.0);
      params.regions.push_back(std::move(r));
    }
    return gen_scenario(params);
  }

  Scenario s;
  s.name = params.name;
  s.seed = params.seed;
  s.defaults = params.defaults;
  s.profiles = params.profiles;
  if (auto* cg = doc["callgraph"].as_table()) {
    if (auto* fns = (*cg)["functions"].as_array()) {
      for (const auto& f : *fns) {
        if (auto name = f.value<std::string>()) s.callgraph.add_function(*name);
      }
    }
    if (auto* calls = (*cg)["calls"].as_array()) {
      for (const auto& c : *calls) {
        const auto* pair = c.as_array();
        if (!pair || pair->size() != 2) throw Error("scenario: calls entries must be [caller, callee]");
        auto a = (*pair)[0].value<std::string>();
        auto b = (*pair)[1].value<std::string>();
        if (!a || !b) throw Error("scenario: calls entries must be strings");
        s.callgraph.add_call(*a, *b);
      }
    }
    if (auto* entries = (*cg)["entries"].as_array()) {
      for (const auto& e : *entries) {
        if (auto name = e.value<std::string>()) s.callgraph.add_entry(*name);
      }
    }
  }
  if (auto* edges = doc["edge"].as_array()) {
    for (const auto& node : *edges) {
      const auto* t = node.as_table();
      if (!t) continue;
      SimEdge e;
      e.id = get_u64(*t, "id", 0);
      e.gate = get_or<std::string>(*t, "gate", std::string(kOpenGate));
      if (t->contains("parent")) e.parent = get_u64(*t, "parent", 0);
      e.function = get_or<std::string>(*t, "function", "");
      e.hits = static_cast<std::uint32_t>(get_u64(*t, "hits", 1));
      e.crash_prob = get_or<double>(*t, "crash_prob", 0.0);
      s.edges.push_back(std::move(e));
    }
  }
  if (s.callgraph.empty()) throw Error("scenario: empty call graph");
  s.finalize();
  return s;
}

std::string dump_scenario(const Scenario& s) {
  toml::table doc;
  doc.insert("scenario", toml::table{{"name", s.name}, {"seed", static_cast<std::int64_t>(s.seed)}});
  doc.insert("campaign", toml::table{{"rounds", static_cast<std::int64_t>(s.defaults.rounds)},
                                     {"units", static_cast<std::int64_t>(s.defaults.units)},
                                     {"round_time", s.defaults.round_time},
                                     {"monitor_time", s.defaults.monitor_time}});
  toml::array fns;
  for (const auto& f : s.callgraph.functions()) fns.push_back(f);
  toml::array calls;
  for (const auto& [a, b] : s.callgraph.calls()) calls.push_back(toml::array{a, b});
  toml::array entries;
  for (const auto& e : s.callgraph.entries()) entries.push_back(e);
  doc.insert("callgraph", toml::table{{"functions", fns}, {"calls", calls}, {"entries", entries}});

  toml::array edges;
  for (const auto& e : s.edges) {
    toml::table t{{"id", static_cast<std::int64_t>(e.id)},
                  {"gate", e.gate},
                  {"function", e.function},
                  {"hits", static_cast<std::int64_t>(e.hits)},
                  {"crash_prob", e.crash_prob}};
    if (e.parent) t.insert("parent", static_cast<std::int64_t>(*e.parent));
    edges.push_back(std::move(t));
  }
  doc.insert("edge", edges);

  toml::array profiles;
  for (const auto& p : s.profiles) {
    toml::table rates;
    for (const auto& [gate, r] : p.rates) rates.insert(gate, r);
    profiles.push_back(toml::table{{"name", p.name},
                                   {"revisit_rate", p.revisit_rate},
                                   {"dry_after", p.dry_after},
                                   {"rates", rates}});
  }
  doc.insert("profile", profiles);

  std::ostringstream out;
  out << doc << "\n";
  return out.str();
}

}  // namespace ensfuzz::sim
