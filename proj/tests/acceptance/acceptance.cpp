// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Statistical criteria take a majority over seeds 1..3.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "osctune/abc.hpp"
#include "osctune/crn.hpp"
#include "osctune/experiment.hpp"
#include "osctune/lha.hpp"
#include "osctune/period.hpp"
#include "osctune/ssa.hpp"

using namespace osctune;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
int ran = 0;
std::set<int> selected;  // empty runs everything

void report(int id, const std::string& title, const Outcome& o, double seconds) {
  std::printf("criterion %d %s: %s (%s) [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), o.detail.c_str(),
              seconds);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

void run(int id, const std::string& title, const std::function<Outcome()>& body) {
  if (!selected.empty() && !selected.count(id)) return;
  ++ran;
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  report(id, title, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

// Runs `trial` for seeds 1..3, stopping once the vote is decided.
Outcome majority(const std::function<Outcome(std::uint64_t)>& trial) {
  int passed = 0;
  int failed = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3 && passed < 2 && failed < 2; ++seed) {
    const auto o = trial(seed);
    (o.pass ? passed : failed) += 1;
    detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) + (o.pass ? " pass: " : " fail: ") +
              o.detail;
    std::printf("  seed %llu %s: %s\n", static_cast<unsigned long long>(seed), o.pass ? "pass" : "fail", o.detail.c_str());
    std::fflush(stdout);
  }
  return {passed >= 2, detail};
}

std::string num(double x) {
  std::ostringstream ss;
  ss.precision(4);
  ss << x;
  return ss.str();
}

// ---------------------------------------------------------------------------
// Shared fixtures

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

PeriodMeterConfig step_meter(std::size_t n, double target, DistanceRule rule) {
  PeriodMeterConfig cfg;
  cfg.species = "X";
  cfg.low = 30;
  cfg.high = 70;
  cfg.n_periods = n;
  cfg.target = target;
  cfg.rule = rule;
  return cfg;
}

CrnModel single_species(std::int64_t init) {
  return parse_model(R"({"species":[{"name":"X","init":)" + std::to_string(init) +
                     R"(}],"params":["k"],"reactions":[{"name":"jump","reactants":{},"products":{"X":1},"rate":{"mass_action":"k"}}]})");
}

struct MeterValues {
  bool accepted = false;
  double mean = 0.0;
  double variance = 0.0;
  double distance = 0.0;
};

MeterValues read_meter(const RunResult& r, const BoundLha& lha) {
  MeterValues v;
  v.accepted = r.accepted;
  if (!r.accepted) return v;
  v.mean = r.last[*lha.variable_index(period_vars::kMean)];
  v.variance = r.last[*lha.variable_index(period_vars::kVariance)];
  v.distance = r.last[*lha.variable_index(period_vars::kDistance)];
  return v;
}

MeterValues replay_step_trace(const std::vector<TracePoint>& trace, const PeriodMeterConfig& cfg) {
  const auto model = single_species(trace.front().value);
  const auto lha = BoundLha::bind(build_period_lha(cfg), model);
  std::vector<PathEvent> events;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    events.push_back({trace[i].time - trace[i - 1].time, 0, State{{trace[i].value}}});
  }
  return read_meter(synchronize(lha, State{{trace.front().value}}, events, 1.0), lha);
}

PeriodMeterConfig threeway_meter(DistanceRule rule) {
  PeriodMeterConfig cfg;
  cfg.species = "A";
  cfg.low = 300;
  cfg.high = 360;
  cfg.n_periods = 4;
  cfg.target = 0.01;
  cfg.rule = rule;
  return cfg;
}

// Paths that accept finish within about N periods past the first low entry.
SafetyBounds tight_bounds(const PeriodMeterConfig& cfg) {
  SafetyBounds b;
  b.max_time = 10.0 * cfg.target * static_cast<double>(cfg.n_periods);
  return b;
}

ExperimentConfig threeway_config(std::vector<UniformPrior::Interval> prior, std::size_t particles, DistanceRule rule,
                                 std::uint64_t seed) {
  ExperimentConfig c;
  c.name = "acceptance";
  c.model = "three-way";
  c.prior = std::move(prior);
  for (const auto* p : {"r_A", "r_B", "r_C"}) {
    const bool free = std::any_of(c.prior.begin(), c.prior.end(), [&](const auto& iv) { return iv.name == p; });
    if (!free) c.fixed_params.emplace_back(p, 1.0);
  }
  c.meter = threeway_meter(rule);
  c.algorithm = AlgorithmKind::Rejection;
  c.particles = particles;
  c.epsilon = 0.2;
  c.master_seed = seed;
  c.parallelism = 0;
  c.bounds = tight_bounds(c.meter);
  return c;
}

// ---------------------------------------------------------------------------
// Criteria

Outcome worked_example() {
  const auto model = toy_model();
  const auto lha = BoundLha::bind(parse_lha(kAverageA), model);
  const std::vector<PathEvent> path{
      {0.5, 2, State{{2, 2, 2}}}, {1.5, 2, State{{3, 2, 1}}}, {1.0, 0, State{{2, 3, 1}}}, {0.5, 0, State{{1, 4, 1}}}};
  const auto r = synchronize(lha, model.initial_state(), path);
  const double x1 = r.final_valuation.at(1);
  const double n2 = r.final_valuation.at(2);
  const bool pass = r.accepted && r.final_location_name == "l1" && r.time == 4.0 && x1 == 2.0 && n2 == 2.0;
  return {pass, "location " + r.final_location_name + ", t=" + num(r.time) + ", x1=" + num(x1) + ", n2=" + num(n2)};
}

Outcome oracle_equivalence() {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<std::int64_t> level(0, 100);
  std::exponential_distribution<double> gap(1.0);
  double worst = 0.0;
  std::size_t compared = 0;
  std::size_t mismatched_acceptance = 0;

  for (int rep = 0; rep < 100; ++rep) {
    std::vector<TracePoint> trace{{0.0, level(gen)}};
    double t = 0.0;
    for (int i = 0; i < 80; ++i) {
      t += gap(gen) + 1e-3;
      trace.push_back({t, level(gen)});
    }
    const auto rule = rep % 2 == 0 ? DistanceRule::Min : DistanceRule::Max;
    const auto cfg = step_meter(3, 4.0, rule);
    const auto offline = analyze_trace(trace, cfg);
    const auto online = replay_step_trace(trace, cfg);
    if (online.accepted != offline.complete) ++mismatched_acceptance;
    if (!online.accepted || !offline.complete) continue;
    ++compared;
    worst = std::max({worst, std::fabs(online.mean - offline.mean), std::fabs(online.variance - offline.variance),
                      std::fabs(online.distance - offline.distance)});
  }

  const auto model = builtin_model("three-way");
  const std::vector<double> theta{1, 1, 1};
  std::size_t ssa_compared = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto cfg = threeway_meter(seed % 2 ? DistanceRule::Min : DistanceRule::Max);
    const auto lha = BoundLha::bind(build_period_lha(cfg), model);
    TraceRecorder rec;
    RngStream rng(seed);
    sample_path(model, theta, model.initial_state(), rng, rec, tight_bounds(cfg));
    const auto offline = analyze_trace(species_trace(rec, *model.species_index("A")), cfg);
    const auto online = read_meter(synchronize(lha, rec.initial(), rec.events(), 0.0), lha);
    if (online.accepted != offline.complete) ++mismatched_acceptance;
    if (!online.accepted || !offline.complete) continue;
    ++ssa_compared;
    worst = std::max({worst, std::fabs(online.mean - offline.mean), std::fabs(online.variance - offline.variance),
                      std::fabs(online.distance - offline.distance)});
  }
  const bool pass = worst <= 1e-9 && mismatched_acceptance == 0 && compared > 0 && ssa_compared > 0;
  return {pass, std::to_string(compared) + " synthetic and " + std::to_string(ssa_compared) +
                    " SSA traces compared, max abs difference " + num(worst) + ", acceptance mismatches " +
                    std::to_string(mismatched_acceptance)};
}

Outcome streaming_statistics() {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> period(0.5, 20.0);
  std::uniform_int_distribution<std::size_t> length(2, 30);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> periods(length(gen));
    for (auto& p : periods) p = period(gen);
    // One low entry per period, each preceded by a high visit.
    std::vector<TracePoint> trace{{0.0, 50}, {1.0, 10}};
    double t = 1.0;
    for (const double p : periods) {
      trace.push_back({t + 0.5 * p, 90});
      t += p;
      trace.push_back({t, 10});
    }
    const auto cfg = step_meter(periods.size(), 10.0, DistanceRule::Max);
    const auto online = replay_step_trace(trace, cfg);
    if (!online.accepted) return {false, "list " + std::to_string(rep) + " was not accepted"};
    // Two-pass reference over the realisations as the trace defines them.
    const auto seen = period_realizations(crossing_points(trace, cfg));
    double mean = 0.0;
    for (const double p : seen) mean += p;
    mean /= static_cast<double>(seen.size());
    double ss = 0.0;
    for (const double p : seen) ss += (p - mean) * (p - mean);
    const double var = ss / static_cast<double>(seen.size() - 1);
    worst = std::max({worst, std::fabs(online.mean - mean) / mean, std::fabs(online.variance - var) / var});
  }
  return {worst <= 1e-12, "1000 lists, max relative difference " + num(worst)};
}

Outcome conservation() {
  const auto model = builtin_model("three-way");
  struct Check {
    std::int64_t total = 0;
    std::uint64_t events = 0;
    bool ok = true;
    bool begin(const State& s) {
      total = std::accumulate(s.populations.begin(), s.populations.end(), std::int64_t{0});
      return true;
    }
    bool on_event(double, std::size_t, const State& s) {
      ++events;
      ok = ok && std::accumulate(s.populations.begin(), s.populations.end(), std::int64_t{0}) == total;
      return true;
    }
    void end(Termination, double) {}
  } check;
  RngStream rng(1);
  SafetyBounds bounds;
  bounds.max_events = 1'000'000;
  sample_path(model, std::vector<double>{1, 1, 1}, model.initial_state(), rng, check, bounds);
  const bool pass = check.ok && check.total == 1029 && check.events == 1'000'000;
  return {pass, std::to_string(check.events) + " events, total " + std::to_string(check.total)};
}

// Number of local maxima of a sequence, counting plateaus once.
std::size_t local_maxima(const std::vector<double>& v) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    const bool left = i == 0 || v[i - 1] < v[i];
    const bool right = j + 1 == v.size() || v[j + 1] < v[i];
    if (left && right && v[i] > 0.0) ++count;
    i = j + 1;
  }
  return count;
}

Outcome experiment1_trial(std::uint64_t seed) {
  const auto config = threeway_config({{"r_A", 0.0, 10.0}}, 200, DistanceRule::Min, seed);
  const auto result = execute_experiment(config);
  const auto& particles = result.posterior().particles;
  if (particles.size() != 200) return {false, "only " + std::to_string(particles.size()) + " particles"};
  std::size_t inside = 0;
  std::vector<double> hist(50, 0.0);
  for (const auto& p : particles) {
    if (p.theta[0] >= 0.0 && p.theta[0] <= 4.5) ++inside;
    hist[*bin_of(p.theta[0], 0.0, 10.0, 50)] += 1.0;
  }
  std::vector<double> smooth(50, 0.0);
  for (std::size_t b = 0; b < 50; ++b) {
    double s = 0.0;
    int n = 0;
    for (int d = -1; d <= 1; ++d) {
      const auto k = static_cast<std::ptrdiff_t>(b) + d;
      if (k < 0 || k >= 50) continue;
      s += hist[static_cast<std::size_t>(k)];
      ++n;
    }
    smooth[b] = s / n;
  }
  const double frac = static_cast<double>(inside) / 200.0;
  const auto maxima = local_maxima(smooth);
  return {frac >= 0.95 && maxima == 1, "in [0,4.5]: " + num(frac) + ", local maxima: " + std::to_string(maxima) +
                                           ", simulations: " + std::to_string(result.simulations)};
}

// Weighted Gaussian KDE with Scott bandwidth on two coordinates.
struct Kde2 {
  std::vector<double> x, y, w;
  double hx = 1.0, hy = 1.0;

  double at(double px, double py) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double dx = (px - x[i]) / hx;
      const double dy = (py - y[i]) / hy;
      s += w[i] * std::exp(-0.5 * (dx * dx + dy * dy));
    }
    return s / (2.0 * M_PI * hx * hy);
  }
};

Kde2 make_kde(const std::vector<Particle>& ps, std::size_t a, std::size_t b) {
  Kde2 k;
  double wsum = 0.0;
  for (const auto& p : ps) wsum += p.weight;
  for (const auto& p : ps) {
    k.x.push_back(p.theta[a]);
    k.y.push_back(p.theta[b]);
    k.w.push_back(p.weight / wsum);
  }
  auto sd = [&](const std::vector<double>& v) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) m += k.w[i] * v[i];
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += k.w[i] * (v[i] - m) * (v[i] - m);
    return std::sqrt(s);
  };
  const double factor = std::pow(static_cast<double>(ps.size()), -1.0 / 6.0);
  k.hx = std::max(sd(k.x), 1e-9) * factor;
  k.hy = std::max(sd(k.y), 1e-9) * factor;
  return k;
}

// (px, py) is inside the highest-density region holding 80% of the mass.
bool in_hdr80(const std::vector<Particle>& ps, std::size_t a, std::size_t b, double px, double py) {
  const auto k = make_kde(ps, a, b);
  std::vector<std::pair<double, double>> dens;  // density at particle, weight
  for (std::size_t i = 0; i < k.x.size(); ++i) dens.emplace_back(k.at(k.x[i], k.y[i]), k.w[i]);
  std::sort(dens.begin(), dens.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
  double mass = 0.0;
  double level = dens.back().first;
  for (const auto& [d, w] : dens) {
    mass += w;
    if (mass >= 0.8) {
      level = d;
      break;
    }
  }
  return k.at(px, py) >= level;
}

Outcome experiment2_trial(std::uint64_t seed) {
  const auto config = threeway_config({{"r_A", 0, 10}, {"r_B", 0, 10}, {"r_C", 0, 10}}, 100, DistanceRule::Max, seed);
  const auto result = execute_experiment(config);
  const auto& ps = result.posterior().particles;
  if (ps.size() != 100) return {false, "only " + std::to_string(ps.size()) + " particles"};
  double inside = 0.0;
  double total = 0.0;
  for (const auto& p : ps) {
    total += p.weight;
    if (p.theta[0] <= 4.0 && p.theta[1] <= 3.0 && p.theta[2] <= 4.0) inside += p.weight;
  }
  const double frac = inside / total;
  std::string regions;
  bool all_in = true;
  const char* names[] = {"r_A", "r_B", "r_C"};
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = a + 1; b < 3; ++b) {
      const bool in = in_hdr80(ps, a, b, 1.0, 1.0);
      all_in = all_in && in;
      regions += std::string(" ") + names[a] + "/" + names[b] + (in ? ":in" : ":out");
    }
  }
  return {frac >= 0.9 && all_in, "mass in box: " + num(frac) + ", (1,1) in 80% region:" + regions +
                                     ", simulations: " + std::to_string(result.simulations)};
}

Outcome repressilator_trial(std::uint64_t seed) {
  ExperimentConfig c;
  c.name = "acceptance";
  c.model = "repressilator";
  c.fixed_params = {{"alpha0", 0.0}};
  c.prior = {{"alpha", 50, 5000}, {"beta", 0.1, 5}, {"n", 0.5, 5}};
  c.meter.species = "P1";
  c.meter.low = 50;
  c.meter.high = 200;
  c.meter.n_periods = 4;
  c.meter.target = 20.0;
  c.meter.rule = DistanceRule::Max;
  c.algorithm = AlgorithmKind::Rejection;
  c.particles = 100;
  c.epsilon = 0.1;
  c.master_seed = seed;
  c.parallelism = 0;
  c.bounds = tight_bounds(c.meter);
  const auto result = execute_experiment(c);
  if (result.posterior().particles.size() != 100) return {false, "incomplete posterior"};
  std::vector<double> ratio;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& m = result.summary.marginals[i];
    ratio.push_back((m.q75 - m.q25) / (c.prior[i].upper - c.prior[i].lower));
  }
  const bool pass = ratio[2] < ratio[0] && ratio[2] < ratio[1];
  return {pass, "IQR/width alpha " + num(ratio[0]) + ", beta " + num(ratio[1]) + ", n " + num(ratio[2]) +
                    ", simulations: " + std::to_string(result.simulations)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome abc_postconditions() {
  std::vector<std::string> problems;

  auto rej = threeway_config({{"r_A", 0, 10}}, 30, DistanceRule::Min, 11);
  const auto r = execute_experiment(rej);
  for (const auto& p : r.posterior().particles) {
    if (!(p.distance <= rej.epsilon)) problems.push_back("rejection particle with d > eps");
  }

  // Most of U(0,10) never oscillates, which would end SMC after generation 0.
  auto smc = threeway_config({{"r_A", 0, 4}}, 40, DistanceRule::Min, 12);
  smc.algorithm = AlgorithmKind::Smc;
  smc.alpha = 0.5;
  smc.epsilon_target = 0.2;
  smc.max_generations = 10;
  const auto s = execute_experiment(smc);
  double previous = std::numeric_limits<double>::infinity();
  double worst_sum = 0.0;
  for (const auto& g : s.generations) {
    double sum = 0.0;
    for (const auto& p : g.particles) sum += p.weight;
    worst_sum = std::max(worst_sum, std::fabs(sum - 1.0));
    if (g.epsilon > previous) problems.push_back("epsilon increased at generation " + std::to_string(g.index));
    previous = g.epsilon;
  }
  if (worst_sum > 1e-12) problems.push_back("weight sum off by " + num(worst_sum));
  if (s.generations.size() < 2) problems.push_back("SMC stopped after one generation (" + s.termination + ")");

  const auto dir = fs::temp_directory_path() / "osctune_acceptance_rerun";
  fs::remove_all(dir);
  std::size_t files = 0;
  for (auto* cfg : {&rej, &smc}) {
    cfg->output_dir = (dir / "a").string();
    run_experiment(*cfg);
    cfg->output_dir = (dir / "b").string();
    run_experiment(*cfg);
    for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
      if (!entry.is_regular_file()) continue;
      const auto rel = fs::relative(entry.path(), dir / "a");
      std::string first = slurp(entry.path());
      std::string second = slurp(dir / "b" / rel);
      if (rel == "manifest.json") {
        // Wall-clock runtime is the one field allowed to differ.
        auto ja = nlohmann::ordered_json::parse(first);
        auto jb = nlohmann::ordered_json::parse(second);
        ja.erase("runtime_seconds");
        jb.erase("runtime_seconds");
        ja["config"].erase("output_dir");
        jb["config"].erase("output_dir");
        first = ja.dump();
        second = jb.dump();
      }
      ++files;
      if (first != second) problems.push_back("rerun differs in " + rel.generic_string());
    }
    fs::remove_all(dir);
  }

  std::string detail = std::to_string(r.posterior().particles.size()) + " rejection particles, " +
                       std::to_string(s.generations.size()) + " SMC generations (" + s.termination + "), " +
                       std::to_string(files) + " artifacts compared";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

Outcome distance_rule() {
  const bool zero = period_distance(20.0, 0.0, 20.0, DistanceRule::Min) == 0.0 &&
                    period_distance(20.0, 0.0, 20.0, DistanceRule::Max) == 0.0;
  // |6 - 5| / 5 = 0.2 and sqrt(6.25) / 5 = 0.5, both exact in binary.
  const bool min_case = period_distance(6.0, 6.25, 5.0, DistanceRule::Min) == 0.2;
  const bool max_case = period_distance(6.0, 6.25, 5.0, DistanceRule::Max) == 0.5;
  // The same comparison at the documented scale.
  const double lit_min = period_distance(0.012, 0.005 * 0.005, 0.01, DistanceRule::Min);
  const double lit_max = period_distance(0.012, 0.005 * 0.005, 0.01, DistanceRule::Max);
  const bool literal = lit_min == std::fabs(0.012 - 0.01) / 0.01 && lit_max == std::sqrt(0.005 * 0.005) / 0.01 &&
                       std::fabs(lit_min - 0.2) < 1e-12 && std::fabs(lit_max - 0.5) < 1e-12;
  return {zero && min_case && max_case && literal,
          std::string("zero ") + (zero ? "ok" : "bad") + ", min " + (min_case ? "ok" : "bad") + ", max " +
              (max_case ? "ok" : "bad") + ", target 0.01 case " + num(lit_min) + "/" + num(lit_max)};
}

}  // namespace

// Optional arguments pick criteria by number, e.g. `acceptance 2 8`.
int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  run(1, "worked synchronisation example", worked_example);
  run(2, "online meter equals offline oracle", oracle_equivalence);
  run(3, "streaming mean and variance", streaming_statistics);
  run(4, "three-way conservation over 1e6 events", conservation);
  run(5, "three-way 1-D posterior support and unimodality", [] { return majority(experiment1_trial); });
  run(6, "three-way 3-D posterior box and 80% regions", [] { return majority(experiment2_trial); });
  run(7, "repressilator n is the narrowest marginal", [] { return majority(repressilator_trial); });
  run(8, "ABC postconditions and reruns", abc_postconditions);
  run(9, "distance rule arithmetic", distance_rule);
  std::printf("%d of %d criteria failed\n", failures, ran);
  return failures == 0 ? 0 : 1;
}
