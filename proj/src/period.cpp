#include "osctune/period.hpp"

#include <cmath>
#include <limits>

#include "osctune/error.hpp"

namespace osctune {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Constant names used inside the generated automaton.
constexpr const char* kL = "L_thr";
constexpr const char* kH = "H_thr";
constexpr const char* kN = "N_per";
constexpr const char* kTarget = "target_tp";
constexpr const char* kCut = "t_cut";

}  // namespace

const char* to_string(DistanceRule rule) noexcept { return rule == DistanceRule::Min ? "min" : "max"; }

DistanceRule distance_rule_from_string(std::string_view text) {
  if (text == "min") return DistanceRule::Min;
  if (text == "max") return DistanceRule::Max;
  throw ConfigError("distance rule must be 'min' or 'max', got '" + std::string(text) + "'");
}

void PeriodMeterConfig::validate() const {
  if (species.empty()) throw ConfigError("period meter: species is empty");
  if (low < 0 || low >= high) throw ConfigError("period meter: thresholds need 0 <= L < H");
  if (n_periods < 2) throw ConfigError("period meter: at least two periods are needed for a variance");
  if (!(target > 0.0) || !std::isfinite(target)) throw ConfigError("period meter: target period must be positive");
}

SafetyBounds PeriodMeterConfig::default_bounds() const {
  SafetyBounds b;
  b.max_time = 100.0 * target * static_cast<double>(n_periods);
  b.max_events = 100'000'000;
  return b;
}

Lha build_period_lha(const PeriodMeterConfig& cfg, double reject_above) {
  cfg.validate();
  namespace v = period_vars;
  const std::string a = cfg.species;
  const std::string in_low = a + " <= " + kL;
  const std::string in_mid = a + " > " + kL + " && " + a + " < " + kH;
  const std::string in_high = a + " >= " + kH;

  Lha lha;
  lha.variables = {v::kTime, v::kClock, v::kCount, v::kObserved, v::kTop, v::kStarted,
                   v::kLast, v::kMean,  v::kM2,    v::kVariance, v::kDistance};
  lha.constants = {{kL, static_cast<double>(cfg.low)},
                   {kH, static_cast<double>(cfg.high)},
                   {kN, static_cast<double>(cfg.n_periods)},
                   {kTarget, cfg.target}};

  const std::vector<std::pair<std::string, FlowSpec>> clocks = {{v::kTime, 1.0}, {v::kClock, 1.0}};
  lha.locations = {
      {"low", true, false, in_low, "low", clocks},
      {"mid", true, false, in_mid, "mid", clocks},
      {"high", true, false, in_high, "high", clocks},
      {"end", false, true, "true", "end", {}},
  };
  lha.initial_updates = {{v::kObserved, a}};

  using Updates = std::vector<std::pair<std::string, std::string>>;
  const std::string observe = a;
  auto sync = [&](const std::string& from, const std::string& to, const std::string& guard, Updates updates) {
    updates.emplace_back(v::kObserved, observe);
    lha.edges.push_back({from, to, false, EventSetSpec::everything(), guard, std::move(updates)});
  };

  // Welford update with the period just closed (t_cur) as the new sample.
  const std::string dev = std::string("(") + v::kClock + " - " + v::kMean + ")";
  const std::string n = v::kCount;
  const std::string m2_next = std::string(v::kM2) + " + " + dev + "^2 * " + n + " / (" + n + " + 1)";
  const std::string started = std::string(v::kStarted) + " = 1";

  for (const std::string from : {"mid", "high"}) {
    sync(from, "low", in_low + " && " + v::kStarted + " = 0",
         {{v::kStarted, "1"}, {v::kTime, "0"}, {v::kClock, "0"}, {v::kTop, "0"}});
    sync(from, "low", in_low + " && " + started + " && " + v::kTop + " = 1 && " + n + " = 0",
         {{v::kLast, v::kClock},
          {v::kMean, v::kClock},
          {v::kM2, "0"},
          {v::kVariance, "0"},
          {v::kCount, "1"},
          {v::kClock, "0"},
          {v::kTop, "0"}});
    sync(from, "low", in_low + " && " + started + " && " + v::kTop + " = 1 && " + n + " >= 1",
         {{v::kLast, v::kClock},
          {v::kMean, std::string(v::kMean) + " + " + dev + " / (" + n + " + 1)"},
          {v::kM2, m2_next},
          {v::kVariance, "(" + m2_next + ") / " + n},
          {v::kCount, n + " + 1"},
          {v::kClock, "0"},
          {v::kTop, "0"}});
    sync(from, "low", in_low + " && " + started + " && " + v::kTop + " = 0", {});
  }
  sync("low", "low", in_low, {});
  for (const std::string from : {"low", "mid", "high"}) sync(from, "mid", in_mid, {});
  for (const std::string from : {"low", "mid"}) sync(from, "high", in_high, {{v::kTop, "1"}});
  sync("high", "high", in_high, {});

  const std::string combine = cfg.rule == DistanceRule::Min ? "min" : "max";
  const std::string distance = combine + "(abs(" + v::kMean + " - " + kTarget + ") / " + kTarget + ", sqrt(" +
                               v::kVariance + ") / " + kTarget + ")";
  for (const std::string from : {"low", "mid", "high"}) {
    lha.edges.push_back({from, "end", true, {}, n + " >= " + kN, {{v::kDistance, distance}}});
  }

  // t is the sum of the periods closed so far plus the open one, so past
  // N * target * (1 + eps) the mean term alone exceeds eps.
  if (cfg.rule == DistanceRule::Max && std::isfinite(reject_above)) {
    lha.constants.emplace_back(kCut, static_cast<double>(cfg.n_periods) * cfg.target * (1.0 + reject_above) * (1.0 + 1e-9));
    lha.locations.push_back({"cut", false, false, "true", "cut", {}});
    for (const std::string from : {"low", "mid", "high"}) {
      lha.edges.push_back({from, "cut", true, {}, started + " && " + v::kTime + " >= " + kCut, {}});
    }
  }
  return lha;
}

// ---------------------------------------------------------------------------
// Offline oracle

std::vector<TracePoint> species_trace(const TraceRecorder& recorder, std::size_t species) {
  std::vector<TracePoint> out;
  out.reserve(recorder.events().size() + 1);
  out.push_back({0.0, recorder.initial()[species]});
  double t = 0.0;
  for (const auto& e : recorder.events()) {
    t += e.sojourn;
    out.push_back({t, e.new_state[species]});
  }
  return out;
}

Region region_of(std::int64_t value, const PeriodMeterConfig& cfg) noexcept {
  if (value <= cfg.low) return Region::Low;
  if (value >= cfg.high) return Region::High;
  return Region::Mid;
}

CrossingGroups crossing_points(std::span<const TracePoint> trace, const PeriodMeterConfig& cfg) {
  CrossingGroups groups;
  if (trace.empty()) return groups;
  // Which kind of crossing was seen last decides whether a new group opens.
  enum class Last { None, Low, High } last = Last::None;
  Region prev = region_of(trace[0].value, cfg);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const Region cur = region_of(trace[i].value, cfg);
    if (cur == Region::Low && prev != Region::Low) {
      if (last != Last::Low) groups.low.emplace_back();
      groups.low.back().push_back(trace[i].time);
      last = Last::Low;
    } else if (cur == Region::High && prev != Region::High) {
      if (last != Last::High) groups.high.emplace_back();
      groups.high.back().push_back(trace[i].time);
      last = Last::High;
    }
    prev = cur;
  }
  return groups;
}

std::vector<double> period_realizations(const CrossingGroups& groups) {
  std::vector<double> periods;
  for (std::size_t k = 0; k + 1 < groups.low.size(); ++k) {
    periods.push_back(groups.low[k + 1].front() - groups.low[k].front());
  }
  return periods;
}

PeriodStats period_stats(std::span<const double> periods) {
  PeriodStats stats;
  if (periods.empty()) return stats;
  double sum = 0.0;
  for (const double p : periods) sum += p;
  stats.mean = sum / static_cast<double>(periods.size());
  if (periods.size() >= 2) {
    double ss = 0.0;
    for (const double p : periods) ss += (p - stats.mean) * (p - stats.mean);
    stats.variance = ss / static_cast<double>(periods.size() - 1);
  }
  return stats;
}

double period_distance(double mean, double variance, double target, DistanceRule rule) {
  const double mean_error = std::fabs(mean - target) / target;
  const double spread = std::sqrt(variance) / target;
  return rule == DistanceRule::Min ? std::min(mean_error, spread) : std::max(mean_error, spread);
}

CrossingAnalysis analyze_trace(std::span<const TracePoint> trace, const PeriodMeterConfig& cfg) {
  CrossingAnalysis out;
  out.groups = crossing_points(trace, cfg);
  auto all = period_realizations(out.groups);
  out.periods_available = all.size();
  if (all.size() > cfg.n_periods) all.resize(cfg.n_periods);
  out.periods = std::move(all);
  const auto stats = period_stats(out.periods);
  out.mean = stats.mean;
  out.variance = stats.variance.value_or(0.0);
  out.complete = out.periods.size() == cfg.n_periods;
  if (out.complete) out.distance = period_distance(out.mean, out.variance, cfg.target, cfg.rule);
  return out;
}

// ---------------------------------------------------------------------------
// Online meter

PeriodMeter::PeriodMeter(const CrnModel& model, PeriodMeterConfig cfg, double reject_above)
    : model_(&model), cfg_(std::move(cfg)), lha_([&] {
        if (!model.species_index(cfg_.species)) {
          throw ConfigError("period meter: species '" + cfg_.species + "' is not in the model");
        }
        return BoundLha::bind(build_period_lha(cfg_, reject_above), model);
      }()) {}

RunResult PeriodMeter::run(std::span<const double> theta, RngStream& rng, const SafetyBounds& bounds) const {
  return synchronize_ssa(lha_, *model_, theta, model_->initial_state(), rng, bounds);
}

double PeriodMeter::distance_of(const RunResult& run, const BoundLha& lha) {
  if (!run.accepted) return kInf;
  return run.last[*lha.variable_index(period_vars::kDistance)];
}

double PeriodMeter::measure(std::span<const double> theta, std::uint64_t seed, const SafetyBounds& bounds) const {
  RngStream rng(seed);
  return distance_of(run(theta, rng, bounds), lha_);
}

double measure_distance(const CrnModel& model, std::span<const double> theta, const PeriodMeterConfig& cfg,
                        std::uint64_t seed, const SafetyBounds& bounds) {
  return PeriodMeter(model, cfg).measure(theta, seed, bounds);
}

}  // namespace osctune
