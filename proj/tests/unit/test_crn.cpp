#include <algorithm>
#include <vector>

#include "doctest.h"
#include "osctune/crn.hpp"
#include "osctune/error.hpp"

using namespace osctune;

namespace {

State three_way_state(std::int64_t a, std::int64_t b, std::int64_t c) { return State{{a, b, c, 10, 10, 10}}; }

std::vector<std::int64_t> abc(const State& s) { return {s[0], s[1], s[2]}; }

}  // namespace

TEST_CASE("builtin three-way model") {
  const auto m = builtin_model("three-way");
  CHECK(m.species_count() == 6);
  CHECK(m.reaction_count() == 6);
  CHECK(m.params() == std::vector<std::string>{"r_A", "r_B", "r_C"});
  CHECK(m.initial_state() == State{{333, 333, 333, 10, 10, 10}});
  CHECK(validate_model(m.document()).empty());
}

TEST_CASE("builtin repressilator model") {
  const auto m = builtin_model("repressilator");
  // Genes are explicit species pinned at 1.
  CHECK(m.species_count() == 9);
  CHECK(m.reaction_count() == 12);
  CHECK(m.params() == std::vector<std::string>{"alpha", "beta", "n", "alpha0"});
  const auto p1 = *m.species_index("P1");
  const auto p3 = *m.species_index("P3");
  CHECK(m.initial_state()[p1] == 5);
  CHECK(m.initial_state()[p3] == 15);
  CHECK(m.initial_state()[*m.species_index("G1")] == 1);
}

TEST_CASE("mass-action propensity") {
  const auto m = builtin_model("three-way");
  const std::vector<double> theta{1, 1, 1};
  const auto r1 = *m.reaction_index("R1");
  CHECK(m.propensity(r1, three_way_state(1, 2, 0), theta) == 2.0);
  CHECK(m.propensity(r1, three_way_state(0, 2, 0), theta) == 0.0);
  // Homogeneous of degree one in the rate constant.
  const std::vector<double> doubled{2, 1, 1};
  CHECK(m.propensity(r1, three_way_state(7, 5, 0), doubled) == 2 * m.propensity(r1, three_way_state(7, 5, 0), theta));
}

TEST_CASE("hill propensity") {
  const auto m = builtin_model("repressilator");
  const auto r1 = *m.reaction_index("R1");
  State x = m.initial_state();
  x[*m.species_index("P3")] = 0;
  CHECK(m.propensity(r1, x, std::vector<double>{200, 2, 2, 0}) == 200.0);
  x[*m.species_index("P3")] = 3;
  CHECK(m.propensity(r1, x, std::vector<double>{200, 2, 2, 0.5}) == doctest::Approx(20.5));
}

TEST_CASE("falling factorial for repeated reactants") {
  const auto m = parse_model(R"({"species":[{"name":"X","init":5}],"params":["k"],
    "reactions":[{"name":"dimer","reactants":{"X":2},"products":{},"rate":{"mass_action":"k"}}]})");
  CHECK(m.propensity(0, State{{5}}, std::vector<double>{0.5}) == 0.5 * 5 * 4);
  CHECK(m.propensity(0, State{{1}}, std::vector<double>{0.5}) == 0.0);
}

TEST_CASE("apply_reaction follows the stoichiometry") {
  const auto m = builtin_model("three-way");
  CHECK(abc(m.applied(*m.reaction_index("R3"), three_way_state(1, 2, 3))) == std::vector<std::int64_t>{2, 2, 2});
  CHECK(abc(m.applied(*m.reaction_index("R1"), three_way_state(2, 3, 1))) == std::vector<std::int64_t>{1, 4, 1});
  const auto after = m.applied(*m.reaction_index("R4"), three_way_state(1, 1, 1));
  CHECK(after[*m.species_index("D_A")] == 10);
  CHECK(abc(after) == std::vector<std::int64_t>{2, 1, 0});
  State empty = three_way_state(0, 0, 0);
  CHECK_THROWS_AS(m.apply_reaction(*m.reaction_index("R1"), empty), SimulationError);
  CHECK(empty == three_way_state(0, 0, 0));
}

TEST_CASE("every three-way reaction conserves the total") {
  const auto m = builtin_model("three-way");
  for (std::size_t j = 0; j < m.reaction_count(); ++j) {
    std::int64_t net = 0;
    for (const auto& s : m.reaction(j).net_change) net += s.coefficient;
    CHECK(net == 0);
  }
  std::int64_t total = 0;
  for (const auto v : m.initial_state().populations) total += v;
  CHECK(total == 1029);
}

TEST_CASE("dependency graph covers every affected propensity") {
  for (const auto* name : {"three-way", "repressilator"}) {
    const auto m = builtin_model(name);
    const std::vector<double> theta = m.param_count() == 3 ? std::vector<double>{1.3, 0.7, 2.1}
                                                             : std::vector<double>{300, 2, 2.5, 0.1};
    State x = m.initial_state();
    for (std::size_t j = 0; j < m.reaction_count(); ++j) {
      for (std::size_t i = 0; i < m.reaction_count(); ++i) {
        if (m.propensity(i, x, theta) == 0.0) continue;
        const State y = m.applied(i, x);
        const auto& deps = m.dependents(i);
        const bool listed = std::find(deps.begin(), deps.end(), j) != deps.end();
        if (!listed) CHECK(m.propensity(j, x, theta) == m.propensity(j, y, theta));
      }
    }
  }
}

TEST_CASE("serialization round trip") {
  for (const auto& name : builtin_model_names()) {
    const auto m = builtin_model(name);
    CHECK(parse_model(serialize_model(m)) == m);
  }
  const auto empty = parse_model(R"({"species":[{"name":"X","init":0}],"params":[],"reactions":[]})");
  CHECK(empty.reaction_count() == 0);
  CHECK(parse_model(serialize_model(empty)) == empty);
}

TEST_CASE("validation diagnostics") {
  auto doc = builtin_model("three-way").document();
  CHECK(validate_model(doc).empty());

  auto bad_species = doc;
  bad_species.reactions[0].reactants.emplace_back("Z", 1);
  CHECK(validate_model(bad_species).size() == 1);

  auto bad_param = doc;
  bad_param.reactions[0].rate.parameter = "r_Z";
  CHECK(validate_model(bad_param).size() == 1);

  auto bad_coeff = doc;
  bad_coeff.reactions[0].products[0].second = -1;
  CHECK_FALSE(validate_model(bad_coeff).empty());

  auto dup = doc;
  dup.species.push_back(dup.species[0]);
  CHECK_FALSE(validate_model(dup).empty());

  CHECK_THROWS_AS(CrnModel::from_document(bad_species), ModelError);
}

TEST_CASE("syntax errors report line and column") {
  try {
    parse_model("{\n  \"species\": [,]\n}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("invalid propensities are simulation errors") {
  const auto m = parse_model(R"json({"species":[{"name":"X","init":1}],"params":["k"],
    "reactions":[{"name":"r","reactants":{},"products":{"X":1},"rate":{"expr":"k / (X - 1)"}}]})json");
  CHECK_THROWS_AS(m.propensity(0, State{{1}}, std::vector<double>{1}), SimulationError);
  CHECK_THROWS_AS(m.propensity(0, State{{0}}, std::vector<double>{1}), SimulationError);
}
