// ensfuzz: run, simulate and inspect ensemble fuzzing campaigns.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ensfuzz/callgraph.hpp"
#include "ensfuzz/campaign.hpp"
#include "ensfuzz/config.hpp"
#include "ensfuzz/process_backend.hpp"
#include "ensfuzz/report.hpp"
#include "ensfuzz/sim/harness.hpp"
#include "ensfuzz/sim/scenario.hpp"
#include "ensfuzz/sim/sim_backend.hpp"

namespace fs = std::filesystem;
using namespace ensfuzz;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitStartup = 2;

struct StartupError : Error {
  using Error::Error;
};

void write_output(const std::string& path, const std::string& data) {
  if (path.empty() || path == "-") {
    std::cout << data;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << data;
  if (!out) throw Error("cannot write " + path);
}

std::uint64_t effective_seed(std::uint64_t flag) {
  if (const char* env = std::getenv("ENSEMBLE_SEED"); env && *env) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw StartupError(std::string("ENSEMBLE_SEED is not an integer: ") + env);
    }
  }
  return flag;
}

sim::Scenario load_scenario(const std::string& arg) {
  if (arg == "builtin:handoff") return sim::gen_scenario(sim::handoff_params());
  return sim::parse_scenario(read_text_file(arg));
}

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    if (auto dots = part.find(".."); dots != std::string::npos) {
      const auto lo = std::stoull(part.substr(0, dots));
      const auto hi = std::stoull(part.substr(dots + 2));
      if (hi < lo) throw StartupError("empty seed range " + part);
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(std::stoull(part));
    }
  }
  if (out.empty()) throw StartupError("no seeds given");
  return out;
}

struct Common {
  std::uint64_t seed = 0;
  std::optional<std::size_t> rounds;
  std::optional<std::size_t> units;
  std::string out;
  std::string format = "json";
  std::string log;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Campaign rng seed (ENSEMBLE_SEED overrides)");
  cmd->add_option("--rounds", c.rounds, "Number of rounds");
  cmd->add_option("--units", c.units, "Number of resource units");
  cmd->add_option("--out", c.out, "Report file (default stdout)");
  cmd->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--log", c.log, "Append round records (JSON lines) to this file");
}

int cmd_simulate(const std::string& scenario_path, const std::string& policy_name, const Common& c) {
  sim::Scenario scenario;
  CampaignConfig config;
  ReportFormat fmt;
  try {
    scenario = load_scenario(scenario_path);
    sim::SimOverrides ov;
    ov.rounds = c.rounds;
    ov.units = c.units;
    config = sim::sim_config(scenario, parse_policy(policy_name), effective_seed(c.seed), ov);
    config.validate();
    fmt = parse_format(c.format);
  } catch (const Error& e) {
    throw StartupError(e.what());
  }
  CampaignReport report;
  if (c.log.empty()) {
    report = sim::simulate_campaign(scenario, config);
  } else {
    sim::SimBackend backend(scenario, config.seed);
    Campaign campaign(config, backend, sim::scenario_deep_edges(scenario, config.rho));
    std::ofstream log(c.log, std::ios::trunc);
    CampaignReport skeleton = campaign.post_fuzz();
    log << log_header_line(skeleton) << std::flush;
    campaign.on_round([&](const RoundLog& r) { log << log_round_line(r, config.units) << std::flush; });
    report = campaign.run();
    log << log_final_line(report);
  }
  write_output(c.out, emit_report(report, fmt));
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& policy, const Common& c) {
  RunConfig rc;
  DeepEdgeSet deep;
  ReportFormat fmt;
  try {
    rc = load_run_config(config_path);
    if (c.rounds) rc.campaign.rounds = *c.rounds;
    if (c.units) rc.campaign.units = *c.units;
    if (!policy.empty()) rc.campaign.policy = parse_policy(policy);
    if (std::getenv("ENSEMBLE_SEED") || c.seed) rc.campaign.seed = effective_seed(c.seed);
    rc.campaign.validate();
    deep = load_deep_edges(rc);
    fmt = parse_format(c.format);
  } catch (const Error& e) {
    throw StartupError(e.what());
  }
  ProcessBackend backend(rc.process);
  Campaign campaign(rc.campaign, backend, std::move(deep));
  const std::string log_path = c.log.empty() ? (rc.process.workdir / "rounds.jsonl").string() : c.log;
  std::ofstream log(log_path, std::ios::trunc);
  log << log_header_line(campaign.post_fuzz()) << std::flush;
  campaign.on_round([&](const RoundLog& r) {
    log << log_round_line(r, rc.campaign.units) << std::flush;
    std::cerr << "round " << r.round << ": edges=" << r.totals.edges << " paths=" << r.totals.paths
              << " crashes=" << r.totals.unique_crashes << (r.early_terminated ? " (early end)" : "") << "\n";
  });
  auto report = campaign.run();
  log << log_final_line(report);
  write_output(c.out, emit_report(report, fmt));
  return 0;
}

int cmd_depths(const std::string& cg_path, const std::string& entries, const std::string& edge_map,
               double rho) {
  CallGraph g;
  DepthMap d;
  try {
    g = parse_callgraph(read_text_file(cg_path));
    if (!entries.empty()) parse_entries(read_text_file(entries), g);
    d = compute_depths(g, rho);
  } catch (const Error& e) {
    throw StartupError(e.what());
  }
  std::ostringstream out;
  out << "d_mu=" << d.mean_depth << "\n";
  out << "threshold=" << d.deep_threshold << "\n";
  for (const auto& [f, depth] : d.depth) {
    out << "  " << f << " " << (depth ? std::to_string(*depth) : std::string("unreachable")) << "\n";
  }
  out << "deep={";
  bool first = true;
  for (const auto& f : deep_functions(d)) {
    out << (first ? "" : ",") << f;
    first = false;
  }
  out << "}\n";
  if (!edge_map.empty()) {
    const auto edges = parse_edge_map(read_text_file(edge_map));
    out << "deep_edges=" << deep_edges(edges, d).size() << "/" << edges.size() << "\n";
  }
  std::cout << out.str();
  return 0;
}

int cmd_report(const std::string& in, const Common& c) {
  CampaignReport report;
  ReportFormat fmt;
  try {
    fmt = parse_format(c.format);
    report = parse_report(read_text_file(in));
  } catch (const Error& e) {
    throw StartupError(e.what());
  }
  write_output(c.out, emit_report(report, fmt));
  return 0;
}

int cmd_compare(const std::string& scenario_path, const std::string& policies_arg, const std::string& seeds_arg,
                std::size_t jobs, const Common& c) {
  sim::Scenario scenario;
  std::vector<Policy> policies;
  std::vector<std::uint64_t> seeds;
  try {
    scenario = load_scenario(scenario_path);
    std::stringstream ss(policies_arg);
    std::string p;
    while (std::getline(ss, p, ',')) {
      if (!p.empty()) policies.push_back(parse_policy(p));
    }
    if (policies.size() < 2) throw StartupError("compare needs at least two policies");
    seeds = parse_seed_range(seeds_arg);
  } catch (const Error& e) {
    throw StartupError(e.what());
  } catch (const std::exception& e) {
    throw StartupError(std::string("bad --seeds: ") + e.what());
  }
  sim::SimOverrides ov;
  ov.rounds = c.rounds;
  ov.units = c.units;
  std::vector<CampaignConfig> configs;
  for (auto s : seeds) {
    for (auto p : policies) configs.push_back(sim::sim_config(scenario, p, s, ov));
  }
  const auto reports = sim::simulate_many(scenario, configs, jobs);

  std::ostringstream out;
  const bool csv = c.format == "csv";
  if (csv) {
    out << "seed";
    for (auto p : policies) out << "," << to_string(p) << "_edges," << to_string(p) << "_crashes";
    out << "\n";
  } else {
    out << std::left << std::setw(8) << "seed";
    for (auto p : policies) out << std::setw(22) << (to_string(p) + " edges/crashes");
    out << "\n";
  }
  std::vector<std::size_t> wins(policies.size(), 0);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& base = reports[i * policies.size()];
    if (csv) {
      out << seeds[i];
    } else {
      out << std::left << std::setw(8) << seeds[i];
    }
    for (std::size_t j = 0; j < policies.size(); ++j) {
      const auto& r = reports[i * policies.size() + j];
      if (j > 0 && base.totals.edges >= r.totals.edges) ++wins[j];
      if (csv) {
        out << "," << r.totals.edges << "," << r.totals.unique_crashes;
      } else {
        out << std::setw(22) << (std::to_string(r.totals.edges) + "/" + std::to_string(r.totals.unique_crashes));
      }
    }
    out << "\n";
  }
  if (!csv) {
    for (std::size_t j = 1; j < policies.size(); ++j) {
      out << to_string(policies[0]) << " >= " << to_string(policies[j]) << " (final edges): " << wins[j] << "/"
          << seeds.size() << "\n";
    }
  }
  write_output(c.out, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble fuzzing orchestrator with bandit scheduling"};
  app.require_subcommand(1);

  Common common;
  std::string config_path, scenario_path, policy, callgraph, entries, edge_map, in, policies = "legion,ns",
                                                                                      seeds = "1..10";
  double rho = kDefaultRho;
  std::size_t jobs = 1;

  auto* run = app.add_subcommand("run", "Process-mode campaign from a config file");
  run->add_option("--config", config_path, "Campaign config (TOML)")->required();
  run->add_option("--policy", policy, "Override the configured policy");
  add_common(run, common);

  auto* simulate = app.add_subcommand("simulate", "Simulated campaign on a scenario");
  simulate->add_option("--scenario", scenario_path, "Scenario file (TOML) or builtin:handoff")->required();
  simulate->add_option("--policy", policy, "legion, ns, cov, fixed or prep_focus")->default_val("legion");
  add_common(simulate, common);

  auto* depths = app.add_subcommand("depths", "Call-graph depths and deep functions");
  depths->add_option("--callgraph", callgraph, "Call graph file")->required();
  depths->add_option("--entries", entries, "Entry function file");
  depths->add_option("--edge-map", edge_map, "Edge map file");
  depths->add_option("--rho", rho, "Depth factor")->default_val(kDefaultRho);

  auto* report = app.add_subcommand("report", "Re-render a report from a JSON report or round log");
  report->add_option("--in", in, "Report or round log")->required();
  report->add_option("--out", common.out, "Output file (default stdout)");
  report->add_option("--format", common.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* compare = app.add_subcommand("compare", "Paired-seed policy comparison");
  compare->add_option("--scenario", scenario_path, "Scenario file (TOML) or builtin:handoff")->required();
  compare->add_option("--policies", policies, "Comma-separated policies; the first is compared to the rest");
  compare->add_option("--seeds", seeds, "Seeds, e.g. 1..10 or 1,4,9");
  compare->add_option("--jobs", jobs, "Parallel runs")->default_val(1);
  compare->add_option("--rounds", common.rounds, "Number of rounds");
  compare->add_option("--units", common.units, "Number of resource units");
  compare->add_option("--out", common.out, "Output file (default stdout)");
  compare->add_option("--format", common.format, "table (json) or csv")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitStartup;
  }

  try {
    if (*run) return cmd_run(config_path, policy, common);
    if (*simulate) return cmd_simulate(scenario_path, policy, common);
    if (*depths) return cmd_depths(callgraph, entries, edge_map, rho);
    if (*report) return cmd_report(in, common);
    if (*compare) return cmd_compare(scenario_path, policies, seeds, jobs, common);
  } catch (const StartupError& e) {
    std::cerr << "ensfuzz: " << e.what() << "\n";
    return kExitStartup;
  } catch (const std::exception& e) {
    std::cerr << "ensfuzz: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitStartup;
}
