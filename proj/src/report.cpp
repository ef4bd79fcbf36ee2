#include "ensfuzz/report.hpp"

#include <sstream>

namespace ensfuzz {

using json = nlohmann::ordered_json;

namespace {

json totals_json(const RecordTotals& t) {
  return json{{"edges", t.edges},
              {"paths", t.paths},
              {"unique_crashes", t.unique_crashes},
              {"crash_events", t.crash_events},
              {"global_seeds", t.global_seeds}};
}

RecordTotals totals_from(const json& j) {
  RecordTotals t;
  t.edges = j.at("edges").get<std::size_t>();
  t.paths = j.at("paths").get<std::size_t>();
  t.unique_crashes = j.at("unique_crashes").get<std::size_t>();
  t.crash_events = j.at("crash_events").get<std::uint64_t>();
  t.global_seeds = j.at("global_seeds").get<std::size_t>();
  return t;
}

json crash_json(const CrashBucket& b) {
  json frames = json::array();
  for (const auto& f : b.frames) frames.push_back(f.str());
  json reps = json::array();
  for (const auto& r : b.representatives) reps.push_back(r.hex());
  return json{{"id", b.id.hex()}, {"frames", frames}, {"representatives", reps}};
}

CrashBucket crash_from(const json& j) {
  CrashBucket b;
  b.id = CrashId::from_hex(j.at("id").get<std::string>());
  for (const auto& f : j.at("frames")) b.frames.push_back(normalize_frame(f.get<std::string>()));
  for (const auto& r : j.at("representatives")) b.representatives.push_back(SeedId::from_hex(r.get<std::string>()));
  return b;
}

std::string num(double v) { return json(v).dump(); }

}  // namespace

std::map<FuzzerId, double> CampaignReport::resource_shares(std::size_t round_index) const {
  std::map<FuzzerId, double> shares;
  const auto& log = rounds.at(round_index);
  for (const auto& [f, s] : log.fuzzers) {
    shares[f] = units ? s.pulls / static_cast<double>(units) : 0.0;
  }
  return shares;
}

ReportFormat parse_format(std::string_view name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  throw Error("unknown report format: " + std::string(name));
}

json round_to_json(const RoundLog& log, std::size_t units) {
  json j;
  j["round"] = log.round;
  j["duration"] = log.duration;
  j["early_terminated"] = log.early_terminated;
  j["n_total"] = log.n_total;
  j["theta"] = log.theta.theta;
  j["assignment"] = log.schedule.assignment;
  json re = json::array();
  for (const auto& r : log.schedule.reassignments) {
    re.push_back(json{{"at", r.at_fraction}, {"unit", r.unit}, {"from", r.from}, {"to", r.to}});
  }
  j["reassignments"] = re;
  j["monitor_ticks"] = log.monitor_ticks;
  json stops = json::array();
  for (const auto& s : log.stops) {
    stops.push_back(json{{"at", s.at}, {"unit", s.unit}, {"fuzzer", s.fuzzer}, {"held", s.held}, {"reason", s.reason}});
  }
  j["stops"] = stops;
  j["totals"] = totals_json(log.totals);
  json fz = json::object();
  for (const auto& [f, s] : log.fuzzers) {
    fz[f] = json{{"units_held", s.units_held},
                 {"pulls", s.pulls},
                 {"share", units ? s.pulls / static_cast<double>(units) : 0.0},
                 {"gamma_new", s.gamma_new},
                 {"c", s.metrics.c},
                 {"seeds", s.seeds},
                 {"uploaded", s.uploaded}};
  }
  j["fuzzers"] = fz;
  json ev = json::object();
  for (const auto& [f, e] : log.evals) ev[f] = json{{"gamma", e.gamma}, {"t", e.t}};
  j["evals"] = ev;
  return j;
}

RoundLog round_from_json(const json& j) {
  RoundLog log;
  log.round = j.at("round").get<std::size_t>();
  log.duration = j.at("duration").get<double>();
  log.early_terminated = j.at("early_terminated").get<bool>();
  log.n_total = j.at("n_total").get<double>();
  log.theta.theta = j.at("theta").get<std::array<double, kMetricCount>>();
  log.schedule.assignment = j.at("assignment").get<std::vector<FuzzerId>>();
  for (const auto& r : j.at("reassignments")) {
    log.schedule.reassignments.push_back(Reassignment{r.at("at").get<double>(), r.at("unit").get<UnitId>(),
                                                      r.at("from").get<FuzzerId>(), r.at("to").get<FuzzerId>()});
  }
  log.monitor_ticks = j.at("monitor_ticks").get<std::vector<double>>();
  for (const auto& s : j.at("stops")) {
    log.stops.push_back(StopEvent{s.at("at").get<double>(), s.at("unit").get<UnitId>(),
                                  s.at("fuzzer").get<FuzzerId>(), s.at("held").get<double>(),
                                  s.at("reason").get<std::string>()});
  }
  log.totals = totals_from(j.at("totals"));
  for (const auto& [f, s] : j.at("fuzzers").items()) {
    FuzzerRoundStats st;
    st.units_held = s.at("units_held").get<std::size_t>();
    st.pulls = s.at("pulls").get<double>();
    st.gamma_new = s.at("gamma_new").get<double>();
    st.metrics.c = s.at("c").get<std::array<std::uint64_t, kMetricCount>>();
    st.seeds = s.at("seeds").get<std::size_t>();
    st.uploaded = s.at("uploaded").get<std::size_t>();
    log.fuzzers[f] = st;
  }
  for (const auto& [f, e] : j.at("evals").items()) {
    log.evals[f] = FuzzerEval{f, e.at("gamma").get<double>(), e.at("t").get<double>()};
  }
  return log;
}

json report_to_json(const CampaignReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["config"] = r.config;
  j["fuzzers"] = r.fuzzers;
  j["units"] = r.units;
  j["totals"] = totals_json(r.totals);
  j["duration"] = r.duration;
  json rounds = json::array();
  for (const auto& log : r.rounds) rounds.push_back(round_to_json(log, r.units));
  j["rounds"] = rounds;
  json crashes = json::array();
  for (const auto& b : r.crashes) crashes.push_back(crash_json(b));
  j["crashes"] = crashes;
  return j;
}

CampaignReport report_from_json(const json& j) {
  CampaignReport r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kReportSchemaVersion) {
    throw Error("unsupported report schema version " + std::to_string(r.schema_version));
  }
  r.config = j.at("config");
  r.fuzzers = j.at("fuzzers").get<std::vector<FuzzerId>>();
  r.units = j.at("units").get<std::size_t>();
  r.totals = totals_from(j.at("totals"));
  r.duration = j.at("duration").get<double>();
  for (const auto& log : j.at("rounds")) r.rounds.push_back(round_from_json(log));
  for (const auto& b : j.at("crashes")) r.crashes.push_back(crash_from(b));
  return r;
}

std::string emit_report(const CampaignReport& r, ReportFormat format) {
  if (format == ReportFormat::Json) return report_to_json(r).dump(2) + "\n";

  std::ostringstream out;
  out << "round,fuzzer,units_held,pulls,gamma_new,c0,c1,c2,c3,c4,"
         "theta0,theta1,theta2,theta3,theta4,edges_total,paths_total,crashes_total\n";
  for (const auto& log : r.rounds) {
    for (const auto& f : r.fuzzers) {
      FuzzerRoundStats s;
      if (auto it = log.fuzzers.find(f); it != log.fuzzers.end()) s = it->second;
      out << log.round << ',' << f << ',' << s.units_held << ',' << num(s.pulls) << ',' << num(s.gamma_new);
      for (auto c : s.metrics.c) out << ',' << c;
      for (auto t : log.theta.theta) out << ',' << num(t);
      out << ',' << log.totals.edges << ',' << log.totals.paths << ',' << log.totals.unique_crashes << '\n';
    }
  }
  return out.str();
}

std::string log_header_line(const CampaignReport& skeleton) {
  json j{{"type", "header"},
         {"schema_version", skeleton.schema_version},
         {"config", skeleton.config},
         {"fuzzers", skeleton.fuzzers},
         {"units", skeleton.units}};
  return j.dump() + "\n";
}

std::string log_round_line(const RoundLog& log, std::size_t units) {
  json j{{"type", "round"}};
  j.update(round_to_json(log, units));
  return j.dump() + "\n";
}

std::string log_final_line(const CampaignReport& report) {
  json crashes = json::array();
  for (const auto& b : report.crashes) crashes.push_back(crash_json(b));
  json j{{"type", "final"},
         {"totals", totals_json(report.totals)},
         {"duration", report.duration},
         {"crashes", crashes}};
  return j.dump() + "\n";
}

CampaignReport parse_report(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw Error("empty report input");

  // A line log starts with a header record on its own line.
  auto nl = text.find('\n', first);
  json head;
  try {
    head = json::parse(text.substr(first, nl == std::string_view::npos ? std::string_view::npos : nl - first));
  } catch (const json::parse_error&) {
    head = json();
  }
  if (!head.is_object() || head.value("type", "") != "header") {
    try {
      return report_from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw Error(std::string("malformed report: ") + e.what());
    }
  }

  CampaignReport r;
  bool finished = false;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  try {
    while (pos < text.size()) {
      auto end = text.find('\n', pos);
      auto line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
      pos = end == std::string_view::npos ? text.size() : end + 1;
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      auto rec = json::parse(line);
      const auto type = rec.at("type").get<std::string>();
      if (type == "header") {
        r.schema_version = rec.at("schema_version").get<int>();
        r.config = rec.at("config");
        r.fuzzers = rec.at("fuzzers").get<std::vector<FuzzerId>>();
        r.units = rec.at("units").get<std::size_t>();
      } else if (type == "round") {
        r.rounds.push_back(round_from_json(rec));
      } else if (type == "final") {
        r.totals = totals_from(rec.at("totals"));
        r.duration = rec.at("duration").get<double>();
        for (const auto& b : rec.at("crashes")) r.crashes.push_back(crash_from(b));
        finished = true;
      } else {
        throw ParseError(lineno, "unknown record type " + type);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(lineno, std::string("malformed log record: ") + e.what());
  }
  if (!finished) {
    if (!r.rounds.empty()) r.totals = r.rounds.back().totals;
    r.duration = 0.0;
    for (const auto& log : r.rounds) r.duration += log.duration;
  }
  return r;
}

std::vector<CrashBucket> bucket_crashes(const SeedPool& global,
                                        const std::map<SeedId, ExecutionResult>& results) {
  std::map<CrashId, CrashBucket> buckets;
  for (const auto& [id, seed] : global) {
    auto it = results.find(id);
    if (it == results.end() || !it->second.crashed) continue;
    const auto cid = crash_id(it->second.stack_frames);
    auto& b = buckets[cid];
    if (b.representatives.empty()) {
      b.id = cid;
      const auto& fr = it->second.stack_frames;
      b.frames.assign(fr.begin(), fr.begin() + static_cast<std::ptrdiff_t>(std::min(kCrashFrames, fr.size())));
    }
    b.representatives.push_back(id);
  }
  std::vector<CrashBucket> out;
  for (auto& [id, b] : buckets) out.push_back(std::move(b));
  return out;
}

RecordTotals totals_of(const FuzzRecord& m, std::size_t global_seeds) {
  return RecordTotals{m.global_coverage.size(), m.known_paths.size(), m.known_crashes.size(),
                      m.crash_total, global_seeds};
}

}  // namespace ensfuzz
