#pragma once

// Linear hybrid automata and their synchronisation with a CRN path.
//
// The product state is (model state, location, valuation). Between two path
// events every variable evolves linearly with the flow of the current
// location; autonomous edges fire at the analytic root of their guard and
// take priority over the next path event. On a path event the first enabled
// synchronised edge (declaration order) whose event set contains the
// reaction fires; if none is enabled the path is rejected.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "osctune/crn.hpp"
#include "osctune/expr.hpp"
#include "osctune/rng.hpp"
#include "osctune/ssa.hpp"

namespace osctune {

// ---------------------------------------------------------------------------
// Document form.

/// Constant rate, or the current population of a named species.
using FlowSpec = std::variant<double, std::string>;

struct LocationSpec {
  std::string name;
  bool initial = false;
  bool final = false;
  std::string entry = "true";  // selects this initial location from the initial model state
  std::string label;           // proposition label, carried but not interpreted
  std::vector<std::pair<std::string, FlowSpec>> flows;  // unspecified variables have flow 0
  bool operator==(const LocationSpec&) const = default;
};

struct EventSetSpec {
  bool all = false;
  std::vector<std::string> names;   // used when all == false
  std::vector<std::string> except;  // used when all == true
  bool operator==(const EventSetSpec&) const = default;

  static EventSetSpec everything() { return {true, {}, {}}; }
};

struct EdgeSpec {
  std::string from;
  std::string to;
  bool autonomous = false;
  EventSetSpec events;
  std::string guard = "true";
  std::vector<std::pair<std::string, std::string>> updates;  // variable := expression
  bool operator==(const EdgeSpec&) const = default;
};

struct Lha {
  std::vector<std::string> variables;
  std::vector<std::pair<std::string, double>> constants;
  std::vector<LocationSpec> locations;
  std::vector<std::pair<std::string, std::string>> initial_updates;
  std::vector<EdgeSpec> edges;
  bool operator==(const Lha&) const = default;

  std::optional<std::size_t> variable_index(std::string_view name) const;
};

Lha parse_lha(std::string_view json_text);
std::string serialize_lha(const Lha& lha);

// ---------------------------------------------------------------------------
// Compiled form, bound to the species and reactions of one model.

struct FlowTerm {
  double constant = 0.0;
  std::int32_t species = -1;  // >= 0 selects a species population
};

struct BoundEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  bool autonomous = false;
  std::vector<bool> events;  // indexed by reaction
  expr::Guard guard;
  std::vector<std::pair<std::uint32_t, expr::Program>> updates;
};

struct BoundLocation {
  std::string name;
  bool initial = false;
  bool final = false;
  expr::Guard entry;
  std::vector<FlowTerm> flows;  // one per variable
  std::vector<std::size_t> autonomous_edges;
  std::vector<std::size_t> sync_edges;
  // What the earliest autonomous firing depends on besides time: variables
  // and species read by the autonomous guards, plus species driving the flows
  // of those variables.
  std::vector<std::uint32_t> pending_vars;
  std::vector<std::uint32_t> pending_species;
};

class BoundLha {
 public:
  /// Throws ModelError if the automaton is malformed or references unknown
  /// species, reactions, variables or constants.
  static BoundLha bind(const Lha& lha, const CrnModel& model);

  std::size_t variable_count() const noexcept { return variables_.size(); }
  const std::vector<std::string>& variables() const noexcept { return variables_; }
  std::optional<std::size_t> variable_index(std::string_view name) const;
  std::optional<std::size_t> location_index(std::string_view name) const;
  const std::vector<BoundLocation>& locations() const noexcept { return locations_; }
  const std::vector<BoundEdge>& edges() const noexcept { return edges_; }
  const std::vector<std::pair<std::uint32_t, expr::Program>>& initial_updates() const noexcept { return initial_updates_; }

  /// Resolver for expressions over this automaton's variables, the model's
  /// species and the automaton constants.
  expr::Resolver resolver() const;

 private:
  std::vector<std::string> variables_;
  std::vector<std::pair<std::string, double>> constants_;
  std::vector<std::string> species_;
  std::vector<BoundLocation> locations_;
  std::vector<BoundEdge> edges_;
  std::vector<std::pair<std::uint32_t, expr::Program>> initial_updates_;
};

// ---------------------------------------------------------------------------
// Product process.

struct SyncState {
  State model_state;
  std::size_t location = 0;
  std::vector<double> valuation;
  double time = 0.0;
};

struct AutonomousFire {
  double delay;
  std::size_t edge;
};

/// Earliest delay >= 0 at which an autonomous edge leaving the current
/// location becomes enabled, assuming the model state stays fixed. Ties go to
/// the edge declared first. Throws SimulationError if the earliest enabling
/// instant is not attained (left-open constraint).
std::optional<AutonomousFire> earliest_autonomous_fire(const SyncState& state, const BoundLha& lha);

enum class RunOutcome { Accepted, NoInitialLocation, NoEnabledEdge, PathEnded };

const char* to_string(RunOutcome o) noexcept;

struct RunResult {
  bool accepted = false;
  RunOutcome outcome = RunOutcome::PathEnded;
  Termination path_end = Termination::Stopped;  // meaningful when outcome == PathEnded
  std::size_t final_location = 0;
  std::string final_location_name;
  std::vector<double> final_valuation;
  std::vector<double> last;
  std::vector<double> min;
  std::vector<double> max;
  double time = 0.0;
  std::uint64_t events = 0;
  std::uint64_t autonomous_firings = 0;
  std::uint64_t nondeterministic_choices = 0;
  // Aggregates of extra expressions registered with Synchronizer::track().
  std::vector<double> tracked_last;
  std::vector<double> tracked_min;
  std::vector<double> tracked_max;
};

enum class StepKind { Initial, Synchronised, Autonomous };

struct ProductStep {
  StepKind kind;
  double time;
  std::optional<std::size_t> reaction;
  State model_state;
  std::size_t location;
  std::vector<double> valuation;
};

/// Path observer implementing the product process M x A online.
class Synchronizer {
 public:
  explicit Synchronizer(const BoundLha& lha, bool record_product = false);

  /// Aggregates (last/min/max) of `program` along the run, sampled at every
  /// product-state change. Returns its index in RunResult::tracked_*.
  std::size_t track(expr::Program program);

  bool begin(const State& init);
  bool on_event(double sojourn, std::size_t reaction, const State& new_state);
  void end(Termination reason, double remaining);

  bool done() const noexcept { return done_; }
  const SyncState& state() const noexcept { return state_; }
  const RunResult& result() const noexcept { return result_; }
  const std::vector<ProductStep>& product_path() const noexcept { return product_; }

 private:
  void advance(double delay);
  void fire(const BoundEdge& edge);
  void observe();
  void record(StepKind kind, std::optional<std::size_t> reaction);
  void finish(RunOutcome outcome);
  // Fires autonomous edges due within `remaining`, then lets time flow to
  // the end of the window. Returns true once the run has finished.
  bool run_autonomous(double remaining);
  expr::Env env() const noexcept { return {state_.valuation, state_.model_state.populations, {}}; }

  const BoundLha* lha_;
  bool record_;
  SyncState state_;
  RunResult result_;
  bool done_ = false;
  // Earliest autonomous firing as an absolute time; valid until the location,
  // valuation (other than by flow) or model state changes.
  std::optional<std::pair<double, std::size_t>> pending_;
  bool pending_valid_ = false;
  std::vector<double> scratch_;
  std::vector<expr::Program> tracked_;
  std::vector<ProductStep> product_;
};

/// Synchronises a fixed path. `final_remaining` is how long the last state
/// persists after the final event (infinite for a deadlocked path).
RunResult synchronize(const BoundLha& lha, const State& init, std::span<const PathEvent> events,
                      double final_remaining = std::numeric_limits<double>::infinity());

/// Synchronises a freshly simulated path; the simulation stops as soon as the
/// automaton accepts or rejects.
RunResult synchronize_ssa(const BoundLha& lha, const CrnModel& model, std::span<const double> theta,
                          const State& init, RngStream& rng, const SafetyBounds& bounds = {});

}  // namespace osctune
