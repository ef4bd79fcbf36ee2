#include "ensfuzz/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "ensfuzz/callgraph.hpp"

namespace ensfuzz {
namespace fs = std::filesystem;
namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <typename T>
T get_or(const toml::table& t, std::string_view key, T fallback) {
  if (!t.contains(key)) return fallback;
  auto v = t[key].value<T>();
  if (!v) throw Error("config: bad value for '" + std::string(key) + "'");
  return *v;
}

}  // namespace

std::string read_text_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ParseError(e.source().begin.line, std::string("config: ") + std::string(e.description()));
  }
  const fs::path base = fs::absolute(base_dir);
  RunConfig rc;
  auto& c = rc.campaign;

  const toml::table empty;
  const toml::table& camp = root["campaign"].as_table() ? *root["campaign"].as_table() : empty;
  c.rounds = static_cast<std::size_t>(get_or<std::int64_t>(camp, "rounds", 72));
  c.units = static_cast<std::size_t>(get_or<std::int64_t>(camp, "units", 1));
  c.round_time = get_or<double>(camp, "round_time", 600.0);
  c.monitor_time = get_or<double>(camp, "monitor_time", 30.0);
  c.rho = get_or<double>(camp, "rho", 1.5);
  c.seed = static_cast<std::uint64_t>(get_or<std::int64_t>(camp, "seed", 0));
  c.policy = parse_policy(get_or<std::string>(camp, "policy", "legion"));
  c.prep_fraction = get_or<double>(camp, "prep_fraction", 0.5);
  rc.process.workdir = resolve(base, get_or<std::string>(camp, "workdir", "campaign"));
  rc.process.grace_seconds = get_or<double>(camp, "grace_seconds", 5.0);
  rc.process.replay_timeout = get_or<double>(camp, "replay_timeout", 10.0);
  if (auto dir = get_or<std::string>(camp, "initial_seeds", ""); !dir.empty()) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(resolve(base, dir))) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) c.initial_seeds.push_back(read_text_file(f));
  }

  const toml::table* target = root["target"].as_table();
  if (!target) throw Error("config: missing [target]");
  rc.process.target.path = resolve(base, get_or<std::string>(*target, "path", "")).string();
  rc.process.target.runner = resolve(base, get_or<std::string>(*target, "runner", "")).string();
  if (rc.process.target.path.empty() || rc.process.target.runner.empty()) {
    throw Error("config: [target] needs path and runner");
  }

  const toml::table* cg = root["callgraph"].as_table();
  if (!cg) throw Error("config: missing [callgraph]");
  rc.callgraph = resolve(base, get_or<std::string>(*cg, "file", ""));
  if (rc.callgraph.empty()) throw Error("config: [callgraph] needs file");
  rc.entries = resolve(base, get_or<std::string>(*cg, "entries", ""));
  rc.edge_map = resolve(base, get_or<std::string>(*cg, "edge_map", ""));

  const toml::table* adapters = root["adapters"].as_table();
  if (!adapters || adapters->empty()) throw Error("config: no [adapters.*] sections");
  for (const auto& [key, node] : *adapters) {
    const toml::table* t = node.as_table();
    if (!t) throw Error("config: adapters." + std::string(key.str()) + " is not a table");
    AdapterSpec spec;
    spec.name = get_or<std::string>(*t, "name", std::string(key.str()));
    const auto kind = get_or<std::string>(*t, "kind", "process");
    if (kind == "process") {
      spec.kind = AdapterKind::Process;
    } else if (kind == "simulated") {
      spec.kind = AdapterKind::Simulated;
    } else {
      throw Error("config: adapter '" + spec.name + "' has unknown kind '" + kind + "'");
    }
    spec.cmd = get_or<std::string>(*t, "cmd", "");
    spec.seeds_glob = get_or<std::string>(*t, "seeds_glob", spec.seeds_glob);
    spec.crashes_glob = get_or<std::string>(*t, "crashes_glob", spec.crashes_glob);
    spec.validate();
    c.fuzzers.push_back(spec.name);
    rc.process.adapters[spec.name] = spec;
  }

  c.labels = {{"mode", "run"}, {"target", rc.process.target.path}};
  c.validate();
  return rc;
}

RunConfig load_run_config(const fs::path& file) {
  return parse_run_config(read_text_file(file), file.parent_path().empty() ? fs::path(".") : file.parent_path());
}

DeepEdgeSet load_deep_edges(const RunConfig& config) {
  CallGraph g = parse_callgraph(read_text_file(config.callgraph));
  if (!config.entries.empty()) parse_entries(read_text_file(config.entries), g);
  const DepthMap d = compute_depths(g, config.campaign.rho);
  if (config.edge_map.empty()) return {};
  return deep_edges(parse_edge_map(read_text_file(config.edge_map)), d);
}

}  // namespace ensfuzz
