#include <doctest.h>

#include "ensfuzz/config.hpp"

using namespace ensfuzz;

namespace {

constexpr const char* kConfig = R"(
[campaign]
rounds = 3
units = 2
round_time = 4.0
monitor_time = 1.0
seed = 9
policy = "legion"
workdir = "work"

[target]
path = "bin/target"
runner = "/abs/runner"

[callgraph]
file = "cg.txt"

[adapters.fake]
kind = "process"
cmd = "fake.sh {target} {in} {out}"
)";

}  // namespace

TEST_CASE("run config parsing") {
  const auto rc = parse_run_config(kConfig, "/base");
  CHECK(rc.campaign.rounds == 3);
  CHECK(rc.campaign.units == 2);
  CHECK(rc.campaign.seed == 9);
  CHECK(rc.campaign.fuzzers == std::vector<FuzzerId>{"fake"});
  CHECK(rc.process.workdir == "/base/work");
  CHECK(rc.process.target.path == "/base/bin/target");
  CHECK(rc.process.target.runner == "/abs/runner");
  CHECK(rc.callgraph == "/base/cg.txt");
  CHECK(rc.process.adapters.at("fake").kind == AdapterKind::Process);
  CHECK(rc.campaign.labels["mode"] == "run");
}

TEST_CASE("run config errors") {
  CHECK_THROWS_AS(parse_run_config("[campaign]\nrounds = 1\n", "/"), Error);
  std::string bad = kConfig;
  bad.replace(bad.find("{out}"), 5, "");
  CHECK_THROWS_AS(parse_run_config(bad, "/"), Error);
  std::string bad_policy = kConfig;
  bad_policy.replace(bad_policy.find("\"legion\""), 8, "\"magic\"");
  CHECK_THROWS_AS(parse_run_config(bad_policy, "/"), Error);
}
