#include <doctest.h>

#include <cmath>

#include "ensfuzz/scheduler.hpp"
#include "../oracles.hpp"

using namespace ensfuzz;

namespace {

const std::vector<FuzzerId> kThree{"f1", "f2", "f3"};

SchedulerState worked_state() {
  SchedulerState s(kThree);
  s.evals()["f1"] = {"f1", 3.0, 1.0};
  s.evals()["f2"] = {"f2", 1.0, 1.0};
  s.evals()["f3"] = {"f3", 0.0, 1.0};
  return s;
}

MetricVector c0(std::uint64_t n) {
  MetricVector m;
  m.c[0] = n;
  return m;
}

WeightVector unit0() {
  WeightVector w;
  w.theta[0] = 1.0;
  return w;
}

}  // namespace

TEST_CASE("priming hands out every fuzzer once, lowest id first") {
  Rng rng(1);
  SchedulerState s(kThree);
  auto sched = schedule_round(s, kThree, 3, rng);
  CHECK(sched.assignment == std::vector<FuzzerId>{"f1", "f2", "f3"});
  CHECK(s.n_total() == 0.0);
}

TEST_CASE("fewer units than fuzzers primes the rest next round") {
  Rng rng(1);
  SchedulerState s(kThree);
  auto r1 = schedule_round(s, kThree, 2, rng);
  CHECK(r1.assignment == std::vector<FuzzerId>{"f1", "f2"});
  feedback(s, {{"f1", c0(2)}, {"f2", c0(1)}}, unit0(), {{"f1", 1.0}, {"f2", 1.0}});
  auto r2 = schedule_round(s, kThree, 2, rng);
  CHECK(r2.assignment.front() == "f3");
  CHECK(s.n_total() == 2.0);
}

TEST_CASE("priming with more units than fuzzers cycles the queue") {
  Rng rng(1);
  SchedulerState s(std::vector<FuzzerId>{"a", "b"});
  auto sched = schedule_round(s, std::vector<FuzzerId>{"a", "b"}, 5, rng);
  CHECK(sched.assignment == std::vector<FuzzerId>{"a", "b", "a", "b", "a"});
}

TEST_CASE("worked fixture") {
  auto s = worked_state();
  Rng rng(7);
  s.set_n_total(0.0);
  schedule_round(s, kThree, 1, rng);
  CHECK(s.n_total() == 3.0);

  const auto scores = score_candidates(s, kThree);
  REQUIRE(scores.size() == 3);
  CHECK(scores[0].q == doctest::Approx(0.75));
  CHECK(scores[1].q == doctest::Approx(0.5));
  CHECK(scores[2].q == 0.0);
  for (const auto& c : scores) CHECK(c.u == doctest::Approx(1.4823).epsilon(1e-4));

  const auto p = softmax_probabilities(scores);
  CHECK(p[0] == doctest::Approx(0.4442).epsilon(1e-3));
  CHECK(std::abs(p[0] - 0.4442) < 1e-4);
  CHECK(std::abs(p[1] - 0.3460) < 1e-4);
  CHECK(std::abs(p[2] - 0.2098) < 1e-4);
}

TEST_CASE("softmax_select") {
  Rng rng(11);
  std::vector<CandidateScore> one{{"only", 0.3, 0.4}};
  for (int i = 0; i < 10; ++i) CHECK(softmax_select(one, rng) == "only");

  std::vector<CandidateScore> tie{{"a", 0.5, 1.0}, {"b", 1.0, 0.5}};
  const auto p = softmax_probabilities(tie);
  CHECK(std::abs(p[0] - 0.5) < 1e-9);

  CHECK_THROWS_AS(softmax_probabilities(std::vector<CandidateScore>{}), Error);
  std::vector<CandidateScore> inf{{"a", 0.0, std::numeric_limits<double>::infinity()}};
  CHECK_THROWS_AS(softmax_probabilities(inf), Error);

  // One uniform variate per draw.
  Rng a(99), b(99);
  const std::vector<CandidateScore> three{{"x", 0.1, 0.0}, {"y", 0.2, 0.0}, {"z", 0.3, 0.0}};
  softmax_select(three, a);
  b();
  CHECK(a() == b());
}

TEST_CASE("softmax properties") {
  Rng rng(321);
  for (int iter = 0; iter < 500; ++iter) {
    std::vector<CandidateScore> scores;
    std::vector<double> raw;
    for (std::size_t i = 0, n = 1 + rng() % 10; i < n; ++i) {
      scores.push_back({"f" + std::to_string(i), uniform01(rng), 20.0 * uniform01(rng)});
      raw.push_back(scores.back().score());
    }
    const auto p = softmax_probabilities(scores);
    const auto want = oracle::softmax_direct(raw);
    double sum = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      sum += p[i];
      CHECK(std::abs(p[i] - want[i]) < 1e-9);
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (raw[i] > raw[j]) CHECK(p[i] >= p[j]);
      }
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);

    // A common shift changes nothing.
    auto shifted = scores;
    for (auto& s : shifted) s.u += 50.0;
    const auto ps = softmax_probabilities(shifted);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(ps[i] - p[i]) < 1e-12);
  }
}

TEST_CASE("scores stay finite after priming and q stays below one") {
  Rng rng(8);
  const std::vector<FuzzerId> fz{"a", "b", "c", "d"};
  SchedulerState s(fz);
  for (int round = 0; round < 20; ++round) {
    auto sched = schedule_round(s, fz, 3, rng);
    std::map<FuzzerId, MetricVector> m;
    std::map<FuzzerId, double> pulls;
    for (const auto& [f, n] : sched.units_held()) {
      m[f] = c0(rng() % 10);
      pulls[f] = static_cast<double>(n);
    }
    feedback(s, m, unit0(), pulls);
    for (const auto& c : score_candidates(s, fz)) {
      CHECK(std::isfinite(c.u));
      CHECK(c.q >= 0.0);
      CHECK(c.q < 1.0);
    }
  }
}

TEST_CASE("ln N is clamped for N below one") {
  SchedulerState s(std::vector<FuzzerId>{"a"});
  s.evals()["a"] = {"a", 1.0, 2.0};
  s.set_n_total(0.5);
  const auto c = score_candidates(s, std::vector<FuzzerId>{"a"});
  CHECK(c[0].u == 0.0);
  CHECK(c[0].score() == doctest::Approx(oracle::ucb_score(1.0, 2.0, 0.5)));
}

TEST_CASE("feedback") {
  SchedulerState s(kThree);
  feedback(s, {{"f1", c0(3)}, {"f2", c0(1)}, {"f3", c0(0)}}, unit0(), {{"f1", 1}, {"f2", 1}, {"f3", 1}});
  CHECK(*s.find("f1") == FuzzerEval{"f1", 3, 1});
  CHECK(*s.find("f2") == FuzzerEval{"f2", 1, 1});
  CHECK(*s.find("f3") == FuzzerEval{"f3", 0, 1});

  s.evals()["f1"] = {"f1", 5, 2};
  feedback(s, {{"f2", c0(2)}}, unit0(), {{"f2", 1.5}});
  CHECK(*s.find("f1") == FuzzerEval{"f1", 5, 2});
  CHECK(*s.find("f2") == FuzzerEval{"f2", 3, 1.5});

  feedback(s, {}, unit0(), {{"new", 0.5}});
  CHECK(*s.find("new") == FuzzerEval{"new", 0, 0.5});

  CHECK_THROWS_AS(feedback(s, {}, unit0(), {{"f1", 0.0}}), Error);
  CHECK_THROWS_AS(feedback(s, {}, unit0(), {{"f1", -1.0}}), Error);
}

TEST_CASE("n_total grows by the sum of pulls once per round") {
  auto s = worked_state();
  Rng rng(3);
  schedule_round(s, kThree, 6, rng);
  CHECK(s.n_total() == 3.0);
  schedule_round(s, kThree, 1, rng);
  CHECK(s.n_total() == 6.0);
}

TEST_CASE("retarget") {
  CHECK(retarget({{"f1", 4}, {"f2", 7}}, {"f1", "f2"}) == "f2");
  CHECK(retarget({{"f1", 3}, {"f2", 3}}, {"f1", "f2"}, {{"f1", 2}, {"f2", 1}}) == "f2");
  CHECK(retarget({{"f1", 3}, {"f2", 3}}, {"f1", "f2"}, {{"f1", 1}, {"f2", 1}}) == "f1");
  CHECK_FALSE(retarget({{"f1", 3}}, {}).has_value());
  CHECK(retarget({{"f1", 9}, {"f2", 1}}, {"f2"}) == "f2");
}

TEST_CASE("schedule helpers") {
  Schedule s;
  s.assignment = {"a", "b", "a"};
  s.reassignments = {{0.5, 1, "b", "a"}, {0.75, 2, "a", "c"}};
  CHECK(s.units_held() == std::map<FuzzerId, std::size_t>{{"a", 2}, {"b", 1}});
  CHECK(s.fuzzer_at(1, 0.4) == "b");
  CHECK(s.fuzzer_at(1, 0.5) == "a");
  CHECK(s.fuzzer_at(2, 0.9) == "c");
}
