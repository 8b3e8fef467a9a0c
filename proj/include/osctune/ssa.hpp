#pragma once

// Gillespie direct-method simulation streamed into an observer.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "osctune/crn.hpp"
#include "osctune/rng.hpp"

namespace osctune {

struct PathEvent {
  double sojourn;  // time spent in the pre-event state
  std::size_t reaction;
  State new_state;
  bool operator==(const PathEvent&) const = default;
};

enum class Termination { Stopped, Deadlock, TimeBound, EventBound };

const char* to_string(Termination t) noexcept;

struct SafetyBounds {
  double max_time = std::numeric_limits<double>::infinity();
  std::uint64_t max_events = 100'000'000;
};

struct PathSummary {
  Termination reason = Termination::Stopped;
  std::uint64_t events = 0;
  double time = 0.0;
};

struct NextEvent {
  double sojourn;
  std::size_t reaction;
};

/// Direct-method step from already-drawn uniforms in (0,1): sojourn is
/// -ln(u_time)/total, reaction is the first index whose cumulative
/// propensity exceeds u_select*total. Returns nullopt when total is zero.
std::optional<NextEvent> select_event(std::span<const double> propensities, double u_time, double u_select);

/// Fills `out` with all propensities and returns their sum.
double compute_propensities(const CrnModel& model, std::span<const double> theta, const State& x, std::vector<double>& out);

std::optional<NextEvent> next_event(const CrnModel& model, std::span<const double> theta, const State& x, RngStream& rng);

/// Receives a path online. `begin` and `on_event` return false to stop the
/// simulation. `end` reports why the stream ended and, for time-bounded or
/// deadlocked paths, how long the last state persists (infinite on deadlock).
template <typename T>
concept PathObserver = requires(T obs, const State& s, double d, std::size_t j, Termination r) {
  { obs.begin(s) } -> std::convertible_to<bool>;
  { obs.on_event(d, j, s) } -> std::convertible_to<bool>;
  obs.end(r, d);
};

template <PathObserver Observer>
PathSummary sample_path(const CrnModel& model, std::span<const double> theta, const State& init, RngStream& rng,
                        Observer& observer, const SafetyBounds& bounds = {}) {
  PathSummary summary;
  State x = init;
  if (!observer.begin(x)) return summary;
  // Only propensities that read a changed species are recomputed; the values
  // are identical to a full recomputation.
  std::vector<double> props;
  compute_propensities(model, theta, x, props);
  for (;;) {
    if (summary.events >= bounds.max_events) {
      summary.reason = Termination::EventBound;
      observer.end(summary.reason, 0.0);
      return summary;
    }
    const double u_time = rng.uniform();
    const double u_select = rng.uniform();
    const auto next = select_event(props, u_time, u_select);
    if (!next) {
      summary.reason = Termination::Deadlock;
      observer.end(summary.reason, std::numeric_limits<double>::infinity());
      return summary;
    }
    if (summary.time + next->sojourn > bounds.max_time) {
      summary.reason = Termination::TimeBound;
      observer.end(summary.reason, bounds.max_time - summary.time);
      summary.time = bounds.max_time;
      return summary;
    }
    model.apply_reaction(next->reaction, x);
    for (const auto j : model.dependents(next->reaction)) props[j] = model.propensity(j, x, theta);
    summary.time += next->sojourn;
    ++summary.events;
    if (!observer.on_event(next->sojourn, next->reaction, x)) {
      summary.reason = Termination::Stopped;
      return summary;
    }
  }
}

/// Observer that materialises the whole path.
class TraceRecorder {
 public:
  bool begin(const State& s) {
    initial_ = s;
    events_.clear();
    return true;
  }
  bool on_event(double sojourn, std::size_t reaction, const State& s) {
    events_.push_back({sojourn, reaction, s});
    return true;
  }
  void end(Termination reason, double) { reason_ = reason; }

  const State& initial() const noexcept { return initial_; }
  const std::vector<PathEvent>& events() const noexcept { return events_; }
  Termination reason() const noexcept { return reason_; }

  /// Absolute event times (cumulative sojourns).
  std::vector<double> times() const;

  /// CSV with header `time,reaction,<species...>`, an initial-state row
  /// (empty reaction) and one row per event.
  void write_csv(std::ostream& out, const CrnModel& model) const;

 private:
  State initial_;
  std::vector<PathEvent> events_;
  Termination reason_ = Termination::Stopped;
};

/// Replays a recorded path into an observer, as the simulator would.
template <PathObserver Observer>
PathSummary replay_path(const State& init, std::span<const PathEvent> events, Observer& observer,
                        Termination final_reason = Termination::Deadlock, double final_remaining = 0.0) {
  PathSummary summary;
  if (!observer.begin(init)) return summary;
  for (const auto& e : events) {
    summary.time += e.sojourn;
    ++summary.events;
    if (!observer.on_event(e.sojourn, e.reaction, e.new_state)) return summary;
  }
  summary.reason = final_reason;
  observer.end(final_reason, final_remaining);
  return summary;
}

}  // namespace osctune
