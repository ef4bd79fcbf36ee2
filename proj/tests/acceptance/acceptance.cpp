// Acceptance gate: one PASS/FAIL line per criterion.
//
// usage: acceptance [--only N]... [--expect-red N]...
//
// Exit status is 0 when every selected criterion passes, or when the only
// failures are criteria named with --expect-red (they still print FAIL).
// A criterion named with --expect-red that passes is also reported.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "ensfuzz/callgraph.hpp"
#include "ensfuzz/campaign.hpp"
#include "ensfuzz/config.hpp"
#include "ensfuzz/process_backend.hpp"
#include "ensfuzz/report.hpp"
#include "ensfuzz/scheduler.hpp"
#include "ensfuzz/seedeval.hpp"
#include "ensfuzz/sim/harness.hpp"
#include "../oracles.hpp"
#include "../scripted_backend.hpp"

using namespace ensfuzz;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and limits.
constexpr double kProbTol = 1e-9;
constexpr double kFixtureTol = 1e-4;
constexpr double kThetaSumTol = 1e-9;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Check {
  Outcome out;
  void expect(bool ok, const std::string& what) {
    if (!ok && out.pass) {
      out.pass = false;
      out.detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

sim::Scenario handoff_scenario() {
  std::ifstream in(ENSFUZZ_SOURCE_DIR "/scenarios/handoff.toml");
  if (!in) throw Error("missing scenarios/handoff.toml");
  std::stringstream ss;
  ss << in.rdbuf();
  return sim::parse_scenario(ss.str());
}

// 1. Soft-max probabilities against the direct formula.
Outcome scheduler_oracle() {
  Check c;
  Rng rng(0xA11CE);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  for (int iter = 0; iter < 1000; ++iter) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<FuzzerId> fz;
    SchedulerState s;
    for (std::size_t i = 0; i < n; ++i) fz.push_back("f" + std::to_string(i));
    s = SchedulerState(fz);
    for (const auto& f : fz) {
      s.evals()[f].gamma = 100.0 * uniform01(rng);
      s.evals()[f].t = 0.1 + 19.9 * uniform01(rng);
    }
    s.set_n_total(2.0 + (1e6 - 2.0) * uniform01(rng));
    const auto scores = score_candidates(s, fz);
    const auto p = softmax_probabilities(scores);
    std::vector<double> raw;
    for (const auto& f : fz) {
      const auto& e = s.evals().at(f);
      raw.push_back(oracle::ucb_score(e.gamma, e.t, s.n_total()));
    }
    const auto want = oracle::softmax_direct(raw);
    c.expect(p.size() == want.size(), "candidate count differs");
    for (std::size_t i = 0; i < p.size() && i < want.size(); ++i) worst = std::max(worst, std::abs(p[i] - want[i]));
  }
  const double dt = seconds_since(t0);
  c.expect(worst <= kProbTol, "max deviation " + fmt("%.3g", worst));
  c.expect(dt < 5.0, "took " + fmt("%.2f s", dt));
  if (c.out.pass) c.out.detail = "max |dp| " + fmt("%.2g", worst) + ", " + fmt("%.2f s", dt);
  return c.out;
}

// 2. Every fuzzer gets a unit before any soft-max draw, across rounds.
Outcome priming_completeness() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t combos = 0;
  for (std::size_t nf = 1; nf <= 6; ++nf) {
    for (std::size_t units = 1; units <= 12; ++units) {
      ++combos;
      std::vector<FuzzerId> fz;
      for (std::size_t i = 0; i < nf; ++i) fz.push_back("f" + std::to_string(i));
      SchedulerState s(fz);
      Rng rng(nf * 100 + units);
      std::set<FuzzerId> primed;
      const std::string tag = "|F|=" + std::to_string(nf) + " units=" + std::to_string(units);
      for (std::size_t round = 0; primed.size() < nf || round < 2; ++round) {
        c.expect(round <= nf, tag + ": priming never completes");
        if (round > nf) break;
        const std::set<FuzzerId> before = primed;
        const auto sched = schedule_round(s, fz, units, rng);
        c.expect(sched.units() == units, tag + ": wrong unit count");
        // Units handed to fuzzers primed before this round are draws; they
        // must come after every unprimed fuzzer got its first unit.
        std::size_t unprimed_left = nf - before.size();
        std::set<FuzzerId> seen;
        for (const auto& f : sched.assignment) {
          if (!before.contains(f)) {
            if (seen.insert(f).second) {
              c.expect(unprimed_left > 0, tag + ": unexpected fuzzer");
              --unprimed_left;
            }
          } else {
            c.expect(unprimed_left == 0, tag + ": draw before priming finished");
          }
        }
        std::map<FuzzerId, MetricVector> m;
        std::map<FuzzerId, double> pulls;
        for (const auto& [f, held] : sched.units_held()) {
          primed.insert(f);
          m[f].c[0] = held;
          pulls[f] = static_cast<double>(held);
        }
        feedback(s, m, WeightVector::uniform(0.2), pulls);
      }
    }
  }
  const double dt = seconds_since(t0);
  c.expect(dt < 1.0, "took " + fmt("%.2f s", dt));
  if (c.out.pass) c.out.detail = std::to_string(combos) + " combinations, " + fmt("%.3f s", dt);
  return c.out;
}

// 3. Worked numeric example. By hand: N = 1+1+1 = 3, u = sqrt(2 ln 3) =
// 1.48230, scores 2.23230 / 1.98230 / 1.48230, exp-ratios
// e^0.75 : e^0.5 : 1 = 2.11700 : 1.64872 : 1, sum 4.76572.
Outcome worked_fixture() {
  Check c;
  const std::vector<FuzzerId> fz{"f1", "f2", "f3"};
  SchedulerState s(fz);
  s.evals()["f1"] = {"f1", 3, 1};
  s.evals()["f2"] = {"f2", 1, 1};
  s.evals()["f3"] = {"f3", 0, 1};
  Rng rng(1);
  schedule_round(s, fz, 1, rng);
  c.expect(s.n_total() == 3.0, "N != 3");
  const auto sc = score_candidates(s, fz);
  const double q[] = {0.75, 0.5, 0.0};
  const double p_want[] = {0.4442, 0.3460, 0.2098};
  const auto p = softmax_probabilities(sc);
  for (std::size_t i = 0; i < 3; ++i) {
    c.expect(std::abs(sc[i].q - q[i]) <= kFixtureTol, "q" + std::to_string(i));
    c.expect(std::abs(sc[i].u - 1.4823) <= kFixtureTol, "u" + std::to_string(i));
    c.expect(std::abs(p[i] - p_want[i]) <= kFixtureTol, "p" + std::to_string(i) + " = " + fmt("%.5f", p[i]));
  }
  if (c.out.pass) c.out.detail = "p = (" + fmt("%.4f", p[0]) + ", " + fmt("%.4f", p[1]) + ", " + fmt("%.4f", p[2]) + ")";
  return c.out;
}

// 4. Deep functions against all-paths enumeration.
Outcome deep_oracle() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(0xDEE9);
  int graphs = 0;
  while (graphs < 200) {
    const std::size_t n = 1 + rng() % 12;
    CallGraph g;
    for (std::size_t i = 0; i < n; ++i) g.add_function("f" + std::to_string(i));
    const double p = 0.05 + 0.3 * uniform01(rng);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (uniform01(rng) < p) g.add_call("f" + std::to_string(i), "f" + std::to_string(j));
      }
    }
    if (rng() % 4 == 0) g.add_entry("f" + std::to_string(rng() % n));
    if (oracle::entry_candidates(g.functions(), g.calls(), g.entries()).empty()) continue;
    ++graphs;
    const auto got = deep_functions(compute_depths(g, kDefaultRho));
    c.expect(got == oracle::deep_by_paths(g.functions(), g.calls(), g.entries(), kDefaultRho),
             "graph " + std::to_string(graphs) + " differs");
  }
  const auto chain = compute_depths(parse_callgraph("main a\na b\nb c"));
  c.expect(std::abs(chain.mean_depth - 1.5) < 1e-12, "chain d_mu");
  c.expect(std::abs(chain.deep_threshold - 2.25) < 1e-12, "chain threshold");
  c.expect(deep_functions(chain) == std::set<std::string>{"c"}, "chain deep set");
  const double dt = seconds_since(t0);
  c.expect(dt < 5.0, "took " + fmt("%.2f s", dt));
  if (c.out.pass) c.out.detail = "200 graphs + chain fixture, " + fmt("%.2f s", dt);
  return c.out;
}

// 5. Metrics against the definitions, and theta fixtures.
Outcome evaluation_oracle() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(0xE7A1);
  for (int iter = 0; iter < 500; ++iter) {
    const std::size_t universe = 1 + rng() % 30;
    FuzzRecord snap;
    for (std::size_t i = 0, n = rng() % 12; i < n; ++i) {
      ExecutionResult r;
      for (std::size_t k = 0, m = 1 + rng() % 6; k < m; ++k) r.coverage.add(rng() % universe, 1 + rng() % 50);
      if (rng() % 4 == 0) {
        r.crashed = true;
        r.stack_frames = {{"g" + std::to_string(rng() % 3), rng() % 2}, {"main", 0}};
      }
      merge(snap, r);
    }
    std::vector<ExecutionResult> pool;
    for (std::size_t i = 0, n = rng() % 21; i < n; ++i) {
      ExecutionResult r;
      for (std::size_t k = 0, m = rng() % 8; k < m; ++k) r.coverage.add(rng() % universe, 1 + rng() % 50);
      if (rng() % 4 == 0) {
        r.crashed = true;
        r.stack_frames = {{"g" + std::to_string(rng() % 4), rng() % 2}, {"main", 0}};
      }
      pool.push_back(r);
    }
    std::set<EdgeId> deep;
    DeepEdgeSet deep_set;
    for (EdgeId e = 0; e < universe; ++e) {
      if (rng() % 3 == 0) {
        deep.insert(e);
        deep_set.insert(e);
      }
    }
    c.expect(evaluate_pool(pool, snap, deep_set) == oracle::metrics_by_definition(pool, snap, deep),
             "instance " + std::to_string(iter) + " differs");

    std::map<FuzzerId, MetricVector> vs;
    for (std::size_t f = 0, n = 1 + rng() % 6; f < n; ++f) {
      for (auto& x : vs["f" + std::to_string(f)].c) x = rng() % 15;
    }
    double sum = 0;
    for (double t : tune_weights(vs).theta) sum += t;
    c.expect(std::abs(sum - 1.0) <= kThetaSumTol, "theta sums to " + fmt("%.12f", sum));
  }

  // Hand-computed sigma ratios.
  auto mv = [](std::array<std::uint64_t, 5> v) {
    MetricVector m;
    m.c = v;
    return m;
  };
  auto close = [](const WeightVector& w, std::array<double, 5> want) {
    for (std::size_t j = 0; j < 5; ++j) {
      if (std::abs(w.theta[j] - want[j]) > 1e-12) return false;
    }
    return true;
  };
  // sigma0 = sqrt(8/3), the rest 0.
  c.expect(close(tune_weights({{"a", mv({4, 1, 1, 1, 1})}, {"b", mv({0, 1, 1, 1, 1})}, {"c", mv({2, 1, 1, 1, 1})}}),
                 {1, 0, 0, 0, 0}),
           "theta fixture 1");
  // One fuzzer: every sigma is 0.
  c.expect(close(tune_weights({{"a", mv({3, 2, 1, 0, 9})}}), {0.2, 0.2, 0.2, 0.2, 0.2}), "theta fixture 2");
  // sigma0 = sigma1 = 1.
  c.expect(close(tune_weights({{"a", mv({1, 0, 5, 5, 5})}, {"b", mv({3, 2, 5, 5, 5})}}), {0.5, 0.5, 0, 0, 0}),
           "theta fixture 3");
  const double dt = seconds_since(t0);
  c.expect(dt < 10.0, "took " + fmt("%.2f s", dt));
  if (c.out.pass) c.out.detail = "500 instances + 3 theta fixtures, " + fmt("%.2f s", dt);
  return c.out;
}

// 6. Stationary two-arm bandit: per-round rewards 1.0 and 0.1, pulls equal
// to units held.
Outcome bandit_convergence() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<FuzzerId> arms{"good", "poor"};
  WeightVector theta;
  theta.theta[0] = 0.1;
  std::vector<double> shares;
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SchedulerState s(arms);
    Rng rng(mix_seed({seed, 0xBA4D17}));
    std::size_t good_units = 0, total_units = 0;
    for (std::size_t round = 1; round <= 40; ++round) {
      const auto sched = schedule_round(s, arms, 6, rng);
      std::map<FuzzerId, MetricVector> m;
      std::map<FuzzerId, double> pulls;
      for (const auto& [f, held] : sched.units_held()) {
        m[f].c[0] = f == "good" ? 10 : 1;
        pulls[f] = static_cast<double>(held);
      }
      feedback(s, m, theta, pulls);
      if (round >= 10) {
        const auto held = sched.units_held();
        good_units += held.contains("good") ? held.at("good") : 0;
        total_units += sched.units();
      }
    }
    const double share = static_cast<double>(good_units) / static_cast<double>(total_units);
    shares.push_back(share);
    if (share > 0.6) ++wins;
  }
  std::string list;
  for (double sh : shares) list += (list.empty() ? "" : " ") + fmt("%.2f", sh);
  c.expect(wins >= 9, "better-arm share > 0.6 in " + std::to_string(wins) + "/10 runs; shares " + list);
  const double dt = seconds_since(t0);
  c.expect(dt < 30.0, "took " + fmt("%.2f s", dt));
  if (c.out.pass) c.out.detail = std::to_string(wins) + "/10 runs; shares " + list;
  return c.out;
}

// 7. Direction of the policy comparison on the hand-off scenario.
Outcome handoff_direction() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto sc = handoff_scenario();
  std::vector<CampaignConfig> cfgs;
  for (auto p : {Policy::Legion, Policy::NS, Policy::Cov}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) cfgs.push_back(sim::sim_config(sc, p, seed));
  }
  const auto reports = sim::simulate_many(sc, cfgs, 1);
  int vs_ns = 0, vs_cov = 0;
  double virtual_seconds = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    const auto legion = reports[i].totals.edges;
    if (legion >= reports[10 + i].totals.edges) ++vs_ns;
    if (legion >= reports[20 + i].totals.edges) ++vs_cov;
  }
  for (const auto& r : reports) virtual_seconds += r.duration;
  const double dt = seconds_since(t0);
  const std::string summary = "LEGION >= NS " + std::to_string(vs_ns) + "/10, >= COV " + std::to_string(vs_cov) +
                              "/10, " + fmt("%.1f s", dt);
  c.expect(vs_ns >= 8, summary);
  c.expect(vs_cov >= 7, summary);
  c.expect(dt < 120.0, summary);
  c.expect(virtual_seconds > 0, "no virtual time elapsed");
  if (c.out.pass) c.out.detail = summary;
  return c.out;
}

// 8. A fuzzer dry from 40% of the round, on the virtual clock.
Outcome fine_tuning() {
  Check c;
  // a: steady, b: dry after 240 s, slow: steady but fewer seeds than a.
  scripted::ScriptedBackend b({{"a", {5.0}}, {"b", {4.0, 0.4}}, {"slow", {20.0}}});
  CampaignConfig cfg;
  cfg.round_time = 600;
  cfg.monitor_time = 30;
  cfg.rounds = 1;
  cfg.units = 3;
  cfg.fuzzers = {"a", "b", "slow"};
  Campaign camp(cfg, b, {});
  const auto& log = camp.run_round();

  c.expect(log.schedule.assignment == std::vector<FuzzerId>{"a", "b", "slow"}, "priming assignment");
  std::vector<StopEvent> b_stops;
  for (const auto& s : log.stops) {
    if (s.fuzzer == "b") b_stops.push_back(s);
    if (s.reason != "round-end") c.expect(s.at >= 300.0, "stop before round_time/2");
  }
  c.expect(b_stops.size() == 1, "b stopped " + std::to_string(b_stops.size()) + " times");
  if (!b_stops.empty()) {
    c.expect(b_stops[0].at == 300.0, "b stopped at " + fmt("%g", b_stops[0].at));
    c.expect(b_stops[0].reason == "dry", "b stop reason " + b_stops[0].reason);
    c.expect(b_stops[0].held == 0.5, "b held " + fmt("%g", b_stops[0].held));
  }
  c.expect(log.schedule.reassignments == std::vector<Reassignment>{{0.5, 1, "b", "a"}}, "reassignment");
  c.expect(!b.spawns.empty() && b.spawns.back().at == 300.0 && b.spawns.back().fuzzer == "a" &&
               b.spawns.back().unit == 1,
           "respawn");
  // a held unit 0 all round plus unit 1 from 300 s; b held 300 of 600 s.
  const auto& ev = camp.scheduler().evals();
  c.expect(ev.at("a").t == 1.5, "t(a) = " + fmt("%g", ev.at("a").t));
  c.expect(ev.at("b").t == 0.5, "t(b) = " + fmt("%g", ev.at("b").t));
  c.expect(ev.at("slow").t == 1.0, "t(slow) = " + fmt("%g", ev.at("slow").t));
  c.expect(log.monitor_ticks.size() == 10 && log.monitor_ticks.front() == 300.0, "monitor ticks");
  c.expect(!log.early_terminated && log.duration == 600.0, "round length");
  if (c.out.pass) c.out.detail = "b stopped at 300 s (dry), unit 1 -> a, t(a)=1.5 t(b)=0.5";
  return c.out;
}

// 9. Byte-identical reports: in-process, across jobs, and through the CLI.
Outcome determinism() {
  Check c;
  const auto sc = handoff_scenario();
  std::vector<CampaignConfig> cfgs;
  for (std::uint64_t seed : {5, 6, 7, 8}) cfgs.push_back(sim::sim_config(sc, Policy::Legion, seed, {.rounds = 8}));
  const auto cfg = cfgs[0];
  const auto first = emit_report(sim::simulate_campaign(sc, cfg), ReportFormat::Json);
  for (int i = 0; i < 2; ++i) {
    c.expect(emit_report(sim::simulate_campaign(sc, cfg), ReportFormat::Json) == first, "repeat run differs");
  }
  const auto serial = sim::simulate_many(sc, cfgs, 1);
  const auto parallel = sim::simulate_many(sc, cfgs, 4);
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    c.expect(emit_report(serial[i], ReportFormat::Json) == emit_report(parallel[i], ReportFormat::Json),
             "jobs=1 vs jobs=4 differs at " + std::to_string(i));
  }
  c.expect(emit_report(serial[0], ReportFormat::Json) == first, "simulate_many differs from a single run");

  const fs::path dir = fs::temp_directory_path() / ("ensfuzz-det-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::string outputs[3];
  for (int i = 0; i < 3; ++i) {
    const auto out = dir / ("r" + std::to_string(i) + ".json");
    const std::string cmd = std::string("'") + ENSFUZZ_CLI + "' simulate --scenario '" + ENSFUZZ_SOURCE_DIR +
                            "/scenarios/handoff.toml' --policy legion --seed 5 --rounds 8 --out '" + out.string() +
                            "' 2>/dev/null";
    c.expect(std::system(cmd.c_str()) == 0, "cli run failed");
    outputs[i] = read_text_file(out);
  }
  c.expect(!outputs[0].empty() && outputs[0] == outputs[1] && outputs[1] == outputs[2], "cli outputs differ");
  c.expect(outputs[0] == first, "cli output differs from in-process run");
  fs::remove_all(dir);
  if (c.out.pass) c.out.detail = "3 repeats, jobs 1 vs 4, 3 CLI runs identical";
  return c.out;
}

// 10. Crash identity uses the top three frames only.
Outcome crash_dedup() {
  Check c;
  const Frame a{"a", 0x10}, b{"b", 0x20}, cc{"c", 0x30}, d{"d", 0x40}, e{"e", 0x50}, x{"x", 0x30};
  FuzzRecord m;
  auto run = [](std::vector<Frame> frames) {
    ExecutionResult r;
    r.coverage.add(1, 1);
    r.crashed = true;
    r.stack_frames = std::move(frames);
    return r;
  };
  c.expect(merge(m, run({a, b, cc, d})).new_unique_crash, "first crash not new");
  c.expect(!merge(m, run({a, b, cc, e})).new_unique_crash, "differs beyond frame 3 yet new");
  c.expect(!merge(m, run({a, b, cc})).new_unique_crash, "three-frame prefix yet new");
  c.expect(merge(m, run({a, b, x})).new_unique_crash, "third frame differs yet merged");
  c.expect(merge(m, run({a, Frame{"b", 0x21}, cc})).new_unique_crash, "offset differs yet merged");
  c.expect(merge(m, run({b, a, cc})).new_unique_crash, "order differs yet merged");
  c.expect(m.known_crashes.size() == 4 && m.crash_total == 6, "counts");
  // Address noise does not split a crash.
  c.expect(crash_id({normalize_frame("0x7ffe01 a+0x10"), normalize_frame("[0x4010] b+0x20"), cc}) ==
               crash_id({a, b, cc}),
           "addresses not stripped");
  if (c.out.pass) c.out.detail = "6 crash events -> 4 unique";
  return c.out;
}

// 11. Real processes: toy target, fake fuzzer script, 3 short rounds.
Outcome process_smoke() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = fs::temp_directory_path() / ("ensfuzz-smoke-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string text = read_text_file(ENSFUZZ_SOURCE_DIR "/tests/fixtures/toy/run.toml.in");
  auto subst = [&](const std::string& key, const std::string& value) {
    for (auto p = text.find(key); p != std::string::npos; p = text.find(key, p + value.size())) {
      text.replace(p, key.size(), value);
    }
  };
  subst("@WORKDIR@", (dir / "work").string());
  subst("@TOY_TARGET@", TOY_TARGET);
  subst("@TOY_RUNNER@", TOY_RUNNER);
  subst("@FIXTURES@", ENSFUZZ_SOURCE_DIR "/tests/fixtures");
  const auto cfg_file = dir / "run.toml";
  {
    std::ofstream out(cfg_file);
    out << text;
  }
  const auto report_file = dir / "report.json";
  const std::string cmd = std::string("'") + ENSFUZZ_CLI + "' run --config '" + cfg_file.string() + "' --out '" +
                          report_file.string() + "' 2>'" + (dir / "stderr.txt").string() + "'";
  const int status = std::system(cmd.c_str());
  c.expect(status == 0, "ensfuzz run exited with status " + std::to_string(status));
  CampaignReport r;
  try {
    r = parse_report(read_text_file(report_file));
  } catch (const std::exception& ex) {
    c.expect(false, std::string("report does not parse: ") + ex.what());
    return c.out;
  }
  std::size_t seeds = 0;
  for (const auto& round : r.rounds) {
    for (const auto& [f, st] : round.fuzzers) seeds += st.seeds;
  }
  c.expect(r.schema_version == kReportSchemaVersion, "schema version");
  c.expect(r.rounds.size() == 3, "rounds: " + std::to_string(r.rounds.size()));
  c.expect(seeds > 0, "no seeds harvested");
  c.expect(r.totals.unique_crashes >= 1, "no unique crash");
  c.expect(!r.crashes.empty() && r.crashes[0].frames.size() == 3 && r.crashes[0].frames[0].function == "check_magic",
           "crash bucket frames");
  // Round-trip through the JSON schema.
  c.expect(parse_report(emit_report(r, ReportFormat::Json)) == r, "report round trip");
  const double dt = seconds_since(t0);
  c.expect(dt < 60.0, "took " + fmt("%.1f s", dt));
  if (c.out.pass) {
    c.out.detail = std::to_string(seeds) + " seeds, " + std::to_string(r.totals.unique_crashes) + " unique crash(es), " +
                   std::to_string(r.totals.edges) + " edges, " + fmt("%.1f s", dt);
    fs::remove_all(dir);
  }
  return c.out;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, expect_red;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if ((a == "--only" || a == "--expect-red") && i + 1 < argc) {
      (a == "--only" ? only : expect_red).insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--only N]... [--expect-red N]...\n");
      return 2;
    }
  }

  const std::vector<Criterion> all{
      {1, "scheduler oracle equivalence", scheduler_oracle},
      {2, "priming completeness", priming_completeness},
      {3, "worked numeric fixture", worked_fixture},
      {4, "deep-edge oracle", deep_oracle},
      {5, "evaluation oracle", evaluation_oracle},
      {6, "bandit convergence", bandit_convergence},
      {7, "hand-off direction (LEGION vs NS/COV)", handoff_direction},
      {8, "fine-tuning behavior", fine_tuning},
      {9, "end-to-end determinism", determinism},
      {10, "crash dedup", crash_dedup},
      {11, "process-mode smoke test", process_smoke},
  };

  int unexpected = 0;
  for (const auto& cr : all) {
    if (!only.empty() && !only.contains(cr.id)) continue;
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool known = expect_red.contains(cr.id);
    std::printf("%s %2d %s: %s%s\n", o.pass ? "PASS" : "FAIL", cr.id, cr.name, o.detail.c_str(),
                !o.pass && known ? " [known red]" : (o.pass && known ? " [listed as known red]" : ""));
    std::fflush(stdout);
    if (!o.pass && !known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
