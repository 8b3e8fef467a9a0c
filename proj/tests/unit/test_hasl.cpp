#include <cmath>
#include <vector>

#include "doctest.h"
#include "osctune/crn.hpp"
#include "osctune/error.hpp"
#include "osctune/hasl.hpp"
#include "osctune/lha.hpp"

using namespace osctune;

namespace {

CrnModel toy_model() {
  return parse_model(R"({"species":[{"name":"A","init":1},{"name":"B","init":2},{"name":"C","init":3}],
    "params":["k"],
    "reactions":[
      {"name":"R1","reactants":{"A":1,"B":1},"products":{"B":2},"rate":{"mass_action":"k"}},
      {"name":"R2","reactants":{"B":1,"C":1},"products":{"C":2},"rate":{"mass_action":"k"}},
      {"name":"R3","reactants":{"C":1,"A":1},"products":{"A":2},"rate":{"mass_action":"k"}}]})");
}

constexpr const char* kAverageA = R"({
  "variables": ["t", "x1", "n2"],
  "locations": [
    {"name": "l0", "initial": true, "flow": {"t": 1, "x1": "A"}},
    {"name": "l1", "final": true}
  ],
  "edges": [
    {"from": "l0", "to": "l1", "autonomous": true, "guard": "t = 4", "updates": {"x1": "x1 / 4"}},
    {"from": "l0", "to": "l0", "events": ["R1"], "guard": "t < 4", "updates": {"n2": "n2 + 1"}},
    {"from": "l0", "to": "l0", "events": {"all_except": ["R1"]}, "guard": "t < 4"}
  ]
})";

std::vector<PathEvent> toy_path() {
  return {{0.5, 2, State{{2, 2, 2}}}, {1.5, 2, State{{3, 2, 1}}}, {1.0, 0, State{{2, 3, 1}}}, {0.5, 0, State{{1, 4, 1}}}};
}

RunResult replay_with(const BoundLha& lha, std::vector<PathExpr>& ys, TargetExpr* z = nullptr) {
  Synchronizer sync(lha);
  for (auto& y : ys) y.attach(sync);
  if (z) z->attach(sync);
  replay_path(toy_model().initial_state(), toy_path(), sync, Termination::Deadlock, 1.0);
  return sync.result();
}

RunResult accepted_with_last(double y) {
  RunResult r;
  r.accepted = true;
  r.outcome = RunOutcome::Accepted;
  r.last = r.min = r.max = r.final_valuation = {y};
  return r;
}

}  // namespace

TEST_CASE("path expressions on the worked example") {
  const auto m = toy_model();
  const auto lha = BoundLha::bind(parse_lha(kAverageA), m);
  std::vector<PathExpr> ys{PathExpr::parse("last(x1)", lha), PathExpr::parse("max(n2) - last(n2)", lha),
                           PathExpr::parse("max(x1)", lha), PathExpr::parse("min(t)", lha),
                           PathExpr::parse("max(x1 - 2 * n2)", lha)};
  const auto run = replay_with(lha, ys);
  REQUIRE(run.accepted);
  CHECK(ys[0].eval(run) == doctest::Approx(2.0));
  CHECK(ys[1].eval(run) == 0.0);
  CHECK(ys[2].eval(run) == doctest::Approx(8.0));
  CHECK(ys[3].eval(run) == 0.0);
  // x1 - 2 n2 peaks just before the first R1 event: 6.5 - 0.
  CHECK(ys[4].eval(run) == doctest::Approx(6.5));
}

TEST_CASE("path expression errors") {
  const auto m = toy_model();
  const auto lha = BoundLha::bind(parse_lha(kAverageA), m);
  CHECK_THROWS(PathExpr::parse("last(nope)", lha));
  CHECK_THROWS(PathExpr::parse("x1", lha));
  auto y = PathExpr::parse("1 / last(n2)", lha);
  RunResult zero = accepted_with_last(0.0);
  zero.last = zero.min = zero.max = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(y.eval(zero), EvalError);
  RunResult rejected = zero;
  rejected.accepted = false;
  CHECK_THROWS_AS(PathExpr::parse("last(x1)", lha).eval(rejected), EvalError);
}

TEST_CASE("PROB with an always-accepting automaton") {
  const auto m = toy_model();
  Lha lha;
  lha.variables = {"t"};
  lha.locations = {{"done", true, true, "true", "", {}}};
  const auto bound = BoundLha::bind(lha, m);
  const auto report = estimate(TargetExpr::parse("PROB()", bound), bound, m, std::vector<double>{1.0}, 100, 3);
  CHECK(report.defined);
  CHECK(report.value == 1.0);
  CHECK(report.ci_low > 0.9);
  CHECK(report.ci_high == 1.0);
  CHECK(report.paths == 100);
}

TEST_CASE("AVG over identical runs has a degenerate interval") {
  const auto m = toy_model();
  const auto lha = BoundLha::bind(parse_lha(kAverageA), m);
  auto z = TargetExpr::parse("AVG(last(x1))", lha);
  std::vector<PathExpr> none;
  const auto run = replay_with(lha, none, &z);
  const std::vector<RunResult> runs{run, run, run};
  const auto report = z.evaluate(runs);
  CHECK(report.defined);
  CHECK(report.value == doctest::Approx(2.0));
  CHECK(report.ci_high - report.ci_low == 0.0);
}

TEST_CASE("AVG interval uses the Student t quantile") {
  // t_{0.975, 4} = 2.776445
  CHECK(student_t_half_width(1.0, 5) == doctest::Approx(2.776445 / std::sqrt(5.0)).epsilon(1e-6));
  CHECK(std::isinf(student_t_half_width(1.0, 1)));
  const auto [lo, hi] = wilson_interval(50, 100);
  CHECK(lo == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.5962).epsilon(1e-3));
}

TEST_CASE("CDF and PDF of two crafted runs") {
  const auto m = toy_model();
  Lha lha;
  lha.variables = {"y"};
  lha.locations = {{"done", true, true, "true", "", {}}};
  const auto bound = BoundLha::bind(lha, m);
  const std::vector<RunResult> runs{accepted_with_last(2.0), accepted_with_last(7.0)};

  const auto cdf = TargetExpr::parse("CDF(last(y), 1, 0, 10)", bound).evaluate(runs);
  REQUIRE(cdf.bins.size() == 10);
  for (std::size_t b = 0; b < 10; ++b) {
    const double expected = b < 2 ? 0.0 : (b < 7 ? 0.5 : 1.0);
    CHECK(cdf.bins[b].value == expected);
    CHECK(cdf.bins[b].low == static_cast<double>(b));
  }

  const auto pdf = TargetExpr::parse("PDF(last(y), 2, 0, 10)", bound).evaluate(runs);
  REQUIRE(pdf.bins.size() == 5);
  double mass = 0.0;
  for (const auto& bin : pdf.bins) mass += bin.value * (bin.high - bin.low);
  CHECK(mass == doctest::Approx(1.0));
  CHECK(pdf.bins[1].value == 0.25);
  CHECK(pdf.bins[3].value == 0.25);

  CHECK_THROWS(TargetExpr::parse("CDF(last(y), 1, 10, 0)", bound));
  CHECK_THROWS(TargetExpr::parse("PDF(last(y), 0, 0, 10)", bound));
}

TEST_CASE("composite targets") {
  const auto m = toy_model();
  Lha lha;
  lha.variables = {"y"};
  lha.locations = {{"done", true, true, "true", "", {}}};
  const auto bound = BoundLha::bind(lha, m);
  const std::vector<RunResult> runs{accepted_with_last(2.0), accepted_with_last(4.0)};
  CHECK(TargetExpr::parse("AVG(last(y)) + PROB()", bound).evaluate(runs).value == doctest::Approx(4.0));
  CHECK(TargetExpr::parse("AVG(last(y)) * AVG(last(y) / 2)", bound).evaluate(runs).value == doctest::Approx(4.5));
}
