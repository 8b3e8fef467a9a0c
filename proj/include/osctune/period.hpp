#pragma once

// Noisy-period distance meter.
//
// Thresholds L < H partition a species' population into low = [0, L],
// mid = (L, H) and high = [H, inf). A low-crossing is a jump into low from
// outside it, a high-crossing a jump into high. Maximal runs of low-crossings
// not separated by a high-crossing form groups; the k-th period is the time
// between the first crossings of groups k and k+1, so the partial segment
// before the first group never counts.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "osctune/crn.hpp"
#include "osctune/lha.hpp"
#include "osctune/ssa.hpp"

namespace osctune {

enum class DistanceRule { Min, Max };

const char* to_string(DistanceRule rule) noexcept;
DistanceRule distance_rule_from_string(std::string_view text);

struct PeriodMeterConfig {
  std::string species;
  std::int64_t low = 0;   // L
  std::int64_t high = 1;  // H
  std::size_t n_periods = 2;
  double target = 1.0;
  DistanceRule rule = DistanceRule::Min;

  /// Throws ConfigError unless 0 <= L < H, N >= 2 and target > 0.
  void validate() const;

  /// max_time = 100 * target * N, max_events = 1e8.
  SafetyBounds default_bounds() const;
};

/// Variable names of the built automaton.
namespace period_vars {
inline constexpr const char* kTime = "t";          // since first non-spurious period start
inline constexpr const char* kClock = "t_cur";     // since last registered low-entry
inline constexpr const char* kCount = "n";         // detected periods
inline constexpr const char* kObserved = "n_A";    // observed population
inline constexpr const char* kTop = "top";         // high region visited since last registration
inline constexpr const char* kStarted = "started"; // first low-entry seen
inline constexpr const char* kLast = "t_p";        // last period duration
inline constexpr const char* kMean = "mean_tp";
inline constexpr const char* kM2 = "m2_tp";        // sum of squared deviations
inline constexpr const char* kVariance = "var_tp";
inline constexpr const char* kDistance = "d";
}  // namespace period_vars

/// Locations low, mid, high (all initial, selected by the initial population)
/// and the final location end. A finite reject_above under the max rule adds
/// a non-final location cut, entered once the running mean is bound to miss
/// the target by more than reject_above.
Lha build_period_lha(const PeriodMeterConfig& cfg,
                     double reject_above = std::numeric_limits<double>::infinity());

// ---------------------------------------------------------------------------
// Offline oracle over a recorded piecewise-constant trace.

struct TracePoint {
  double time;
  std::int64_t value;
};

/// Observed species as (time, value) pairs; the first point is the initial
/// state.
std::vector<TracePoint> species_trace(const TraceRecorder& recorder, std::size_t species);

struct CrossingGroups {
  std::vector<std::vector<double>> low;
  std::vector<std::vector<double>> high;
};

enum class Region { Low, Mid, High };
Region region_of(std::int64_t value, const PeriodMeterConfig& cfg) noexcept;

CrossingGroups crossing_points(std::span<const TracePoint> trace, const PeriodMeterConfig& cfg);

/// t_k = min(group k+1) - min(group k). Empty with fewer than two groups.
std::vector<double> period_realizations(const CrossingGroups& groups);

struct PeriodStats {
  double mean = 0.0;
  std::optional<double> variance;  // needs at least two periods
};

/// Two-pass mean and unbiased variance.
PeriodStats period_stats(std::span<const double> periods);

double period_distance(double mean, double variance, double target, DistanceRule rule);

struct CrossingAnalysis {
  CrossingGroups groups;
  std::vector<double> periods;  // first N realisations
  std::size_t periods_available = 0;
  bool complete = false;        // at least N periods
  double mean = 0.0;
  double variance = 0.0;
  double distance = std::numeric_limits<double>::infinity();
};

CrossingAnalysis analyze_trace(std::span<const TracePoint> trace, const PeriodMeterConfig& cfg);

// ---------------------------------------------------------------------------
// Online meter.

class PeriodMeter {
 public:
  /// Distances <= reject_above are unaffected by the cutoff; larger ones may
  /// come back as +inf.
  PeriodMeter(const CrnModel& model, PeriodMeterConfig cfg,
              double reject_above = std::numeric_limits<double>::infinity());

  const PeriodMeterConfig& config() const noexcept { return cfg_; }
  const BoundLha& automaton() const noexcept { return lha_; }

  RunResult run(std::span<const double> theta, RngStream& rng, const SafetyBounds& bounds) const;

  /// last(d) on acceptance, +inf otherwise.
  double measure(std::span<const double> theta, std::uint64_t seed, const SafetyBounds& bounds) const;

  static double distance_of(const RunResult& run, const BoundLha& lha);

 private:
  const CrnModel* model_;
  PeriodMeterConfig cfg_;
  BoundLha lha_;
};

double measure_distance(const CrnModel& model, std::span<const double> theta, const PeriodMeterConfig& cfg,
                        std::uint64_t seed, const SafetyBounds& bounds);

}  // namespace osctune
