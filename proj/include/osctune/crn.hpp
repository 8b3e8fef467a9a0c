#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "osctune/expr.hpp"

namespace osctune {

/// Population vector of a CRN, one non-negative count per species.
struct State {
  std::vector<std::int64_t> populations;

  std::size_t size() const noexcept { return populations.size(); }
  std::int64_t operator[](std::size_t i) const { return populations[i]; }
  std::int64_t& operator[](std::size_t i) { return populations[i]; }
  bool operator==(const State&) const = default;
};

// ---------------------------------------------------------------------------
// Document form: names and source strings exactly as read from a model file.

struct SpeciesDecl {
  std::string name;
  std::int64_t init = 0;
  bool operator==(const SpeciesDecl&) const = default;
};

struct RateDecl {
  enum class Kind { MassAction, Expression };
  Kind kind = Kind::MassAction;
  std::string parameter;  // mass action by named parameter, empty if constant
  double constant = 0.0;  // mass action by literal constant
  std::string expression;
  bool operator==(const RateDecl&) const = default;
};

struct ReactionDecl {
  std::string name;
  std::vector<std::pair<std::string, std::int64_t>> reactants;
  std::vector<std::pair<std::string, std::int64_t>> products;
  RateDecl rate;
  bool operator==(const ReactionDecl&) const = default;
};

struct ModelDocument {
  std::vector<SpeciesDecl> species;
  std::vector<std::string> params;
  std::vector<ReactionDecl> reactions;
  bool operator==(const ModelDocument&) const = default;
};

/// Parses the JSON model format without semantic checks. Throws ParseError.
ModelDocument parse_model_document(std::string_view text);
std::string serialize_model_document(const ModelDocument& doc);

/// Empty iff every model invariant holds.
std::vector<std::string> validate_model(const ModelDocument& doc);

// ---------------------------------------------------------------------------
// Compiled form.

struct Stoich {
  std::uint32_t species;
  std::int64_t coefficient;
};

struct Reaction {
  std::string name;
  std::vector<Stoich> reactants;
  std::vector<Stoich> products;
  std::vector<Stoich> net_change;  // products - reactants, zero entries dropped
  RateDecl::Kind rate_kind = RateDecl::Kind::MassAction;
  std::optional<std::uint32_t> rate_param;
  double rate_constant = 0.0;
  expr::Program rate_expression;
};

/// Immutable parametric chemical reaction network.
class CrnModel {
 public:
  /// Throws ModelError listing every diagnostic when the document is invalid.
  static CrnModel from_document(ModelDocument doc);

  const ModelDocument& document() const noexcept { return doc_; }
  std::size_t species_count() const noexcept { return doc_.species.size(); }
  std::size_t reaction_count() const noexcept { return reactions_.size(); }
  std::size_t param_count() const noexcept { return doc_.params.size(); }

  const std::string& species_name(std::size_t i) const { return doc_.species[i].name; }
  const std::vector<std::string>& params() const noexcept { return doc_.params; }
  const Reaction& reaction(std::size_t j) const { return reactions_[j]; }
  const State& initial_state() const noexcept { return initial_; }

  std::optional<std::size_t> species_index(std::string_view name) const;
  std::optional<std::size_t> param_index(std::string_view name) const;
  std::optional<std::size_t> reaction_index(std::string_view name) const;

  /// Stochastic propensity of reaction j in state x. Returns 0 when any
  /// reactant is below its coefficient. Throws SimulationError on a negative
  /// or non-finite rate.
  double propensity(std::size_t j, const State& x, std::span<const double> theta) const;

  /// Reactions whose propensity may change when reaction j fires.
  const std::vector<std::uint32_t>& dependents(std::size_t j) const { return dependents_[j]; }

  /// x := x - reactants + products. Throws SimulationError on underflow.
  void apply_reaction(std::size_t j, State& x) const;
  State applied(std::size_t j, State x) const {
    apply_reaction(j, x);
    return x;
  }

  bool operator==(const CrnModel& other) const { return doc_ == other.doc_; }

 private:
  ModelDocument doc_;
  std::vector<Reaction> reactions_;
  std::vector<std::vector<std::uint32_t>> dependents_;
  State initial_;
};

CrnModel parse_model(std::string_view text);
std::string serialize_model(const CrnModel& model);

/// Names accepted by builtin_model(): "three-way", "repressilator".
std::vector<std::string> builtin_model_names();
std::optional<std::string> builtin_model_text(std::string_view name);
CrnModel builtin_model(std::string_view name);

}  // namespace osctune
