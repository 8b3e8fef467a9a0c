#include "osctune/lha.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "osctune/error.hpp"

namespace osctune {

using ojson = nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kMaxZeroDelayFirings = 1'000'000;

[[noreturn]] void schema_error(const std::string& msg) { throw ParseError("LHA schema: " + msg, 0, 0); }

std::vector<std::pair<std::string, std::string>> read_assignments(const ojson& node, const std::string& where) {
  std::vector<std::pair<std::string, std::string>> out;
  if (node.is_null()) return out;
  if (!node.is_object()) schema_error(where + " must be an object of variable -> expression");
  for (const auto& [name, value] : node.items()) {
    if (value.is_string()) out.emplace_back(name, value.get<std::string>());
    else if (value.is_number()) out.emplace_back(name, value.dump());
    else schema_error(where + "." + name + " must be an expression string or a number");
  }
  return out;
}

ojson write_assignments(const std::vector<std::pair<std::string, std::string>>& entries) {
  ojson out = ojson::object();
  for (const auto& [name, value] : entries) out[name] = value;
  return out;
}

struct Interval {
  double lo = 0.0;
  bool lo_closed = true;
  double hi = kInf;
  bool hi_closed = false;
  bool empty = false;
};

Interval empty_interval() {
  Interval i;
  i.empty = true;
  return i;
}

// Set of delays d >= 0 with h0 + slope*d (op) 0.
Interval solve_constraint(double h0, double slope, expr::CmpOp op) {
  using expr::CmpOp;
  const bool now = expr::Guard::test(h0, op);
  if (slope == 0.0) return now ? Interval{} : empty_interval();
  const double root = -h0 / slope;
  const bool rising = slope > 0.0;
  switch (op) {
    case CmpOp::Equal:
      if (now) return {0.0, true, 0.0, true, false};
      if (root > 0.0) return {root, true, root, true, false};
      return empty_interval();
    case CmpOp::GreaterEq:
    case CmpOp::LessEq: {
      // Eventually-true direction: h increases for >=, decreases for <=.
      const bool towards = (op == CmpOp::GreaterEq) == rising;
      if (towards) return now ? Interval{} : Interval{std::max(root, 0.0), true, kInf, false, false};
      return now ? Interval{0.0, true, std::max(root, 0.0), true, false} : empty_interval();
    }
    case CmpOp::Greater:
    case CmpOp::Less: {
      const bool towards = (op == CmpOp::Greater) == rising;
      if (towards) return now ? Interval{} : Interval{std::max(root, 0.0), false, kInf, false, false};
      return now ? Interval{0.0, true, std::max(root, 0.0), false, false} : empty_interval();
    }
  }
  return empty_interval();
}

Interval intersect(const Interval& a, const Interval& b) {
  if (a.empty || b.empty) return empty_interval();
  Interval out;
  if (a.lo > b.lo) {
    out.lo = a.lo;
    out.lo_closed = a.lo_closed;
  } else if (b.lo > a.lo) {
    out.lo = b.lo;
    out.lo_closed = b.lo_closed;
  } else {
    out.lo = a.lo;
    out.lo_closed = a.lo_closed && b.lo_closed;
  }
  if (a.hi < b.hi) {
    out.hi = a.hi;
    out.hi_closed = a.hi_closed;
  } else if (b.hi < a.hi) {
    out.hi = b.hi;
    out.hi_closed = b.hi_closed;
  } else {
    out.hi = a.hi;
    out.hi_closed = a.hi_closed && b.hi_closed;
  }
  if (out.lo > out.hi || (out.lo == out.hi && !(out.lo_closed && out.hi_closed))) return empty_interval();
  return out;
}


}  // namespace

// ---------------------------------------------------------------------------
// Document

std::optional<std::size_t> Lha::variable_index(std::string_view name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i] == name) return i;
  }
  return std::nullopt;
}

Lha parse_lha(std::string_view json_text) {
  ojson root;
  try {
    root = ojson::parse(json_text.begin(), json_text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < json_text.size(); ++i) {
      if (json_text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("LHA syntax error: " + std::string(e.what()), line, col);
  }
  if (!root.is_object()) schema_error("top level must be an object");
  try {
  Lha lha;
  for (const auto& v : root.value("variables", ojson::array())) {
    if (!v.is_string()) schema_error("variables must be strings");
    lha.variables.push_back(v.get<std::string>());
  }
  const ojson constants = root.value("constants", ojson::object());
  for (const auto& [name, value] : constants.items()) {
    if (!value.is_number()) schema_error("constant " + name + " must be a number");
    lha.constants.emplace_back(name, value.get<double>());
  }
  for (const auto& l : root.value("locations", ojson::array())) {
    if (!l.is_object() || !l.contains("name")) schema_error("locations need a name");
    LocationSpec loc;
    loc.name = l["name"].get<std::string>();
    loc.initial = l.value("initial", false);
    loc.final = l.value("final", false);
    loc.entry = l.value("entry", std::string("true"));
    loc.label = l.value("label", std::string());
    const ojson flows = l.value("flow", ojson::object());
    for (const auto& [var, flow] : flows.items()) {
      if (flow.is_number()) loc.flows.emplace_back(var, flow.get<double>());
      else if (flow.is_string()) loc.flows.emplace_back(var, flow.get<std::string>());
      else schema_error("flow of " + var + " must be a number or a species name");
    }
    lha.locations.push_back(std::move(loc));
  }
  lha.initial_updates = read_assignments(root.value("initial_updates", ojson()), "initial_updates");
  for (const auto& e : root.value("edges", ojson::array())) {
    if (!e.is_object() || !e.contains("from") || !e.contains("to")) schema_error("edges need 'from' and 'to'");
    EdgeSpec edge;
    edge.from = e["from"].get<std::string>();
    edge.to = e["to"].get<std::string>();
    edge.autonomous = e.value("autonomous", false);
    if (!edge.autonomous) {
      const auto ev = e.value("events", ojson("ALL"));
      if (ev.is_string() && ev.get<std::string>() == "ALL") {
        edge.events = EventSetSpec::everything();
      } else if (ev.is_array()) {
        for (const auto& n : ev) edge.events.names.push_back(n.get<std::string>());
      } else if (ev.is_object() && ev.contains("all_except")) {
        edge.events.all = true;
        for (const auto& n : ev["all_except"]) edge.events.except.push_back(n.get<std::string>());
      } else {
        schema_error("events must be \"ALL\", a list of reaction names, or {\"all_except\": [...]}");
      }
    }
    edge.guard = e.value("guard", std::string("true"));
    edge.updates = read_assignments(e.value("updates", ojson()), "updates");
    lha.edges.push_back(std::move(edge));
  }
  return lha;
  } catch (const nlohmann::json::exception& e) {
    schema_error(e.what());
  }
}

std::string serialize_lha(const Lha& lha) {
  ojson root;
  root["variables"] = lha.variables;
  root["constants"] = ojson::object();
  for (const auto& [name, value] : lha.constants) root["constants"][name] = value;
  root["locations"] = ojson::array();
  for (const auto& loc : lha.locations) {
    ojson l;
    l["name"] = loc.name;
    l["initial"] = loc.initial;
    l["final"] = loc.final;
    l["entry"] = loc.entry;
    if (!loc.label.empty()) l["label"] = loc.label;
    l["flow"] = ojson::object();
    for (const auto& [var, flow] : loc.flows) {
      if (const auto* c = std::get_if<double>(&flow)) l["flow"][var] = *c;
      else l["flow"][var] = std::get<std::string>(flow);
    }
    root["locations"].push_back(std::move(l));
  }
  root["initial_updates"] = write_assignments(lha.initial_updates);
  root["edges"] = ojson::array();
  for (const auto& e : lha.edges) {
    ojson edge;
    edge["from"] = e.from;
    edge["to"] = e.to;
    edge["autonomous"] = e.autonomous;
    if (!e.autonomous) {
      if (e.events.all && e.events.except.empty()) edge["events"] = "ALL";
      else if (e.events.all) edge["events"] = {{"all_except", e.events.except}};
      else edge["events"] = e.events.names;
    }
    edge["guard"] = e.guard;
    edge["updates"] = write_assignments(e.updates);
    root["edges"].push_back(std::move(edge));
  }
  return root.dump(2);
}

// ---------------------------------------------------------------------------
// Binding

std::optional<std::size_t> BoundLha::variable_index(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i] == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> BoundLha::location_index(std::string_view name) const {
  for (std::size_t i = 0; i < locations_.size(); ++i) {
    if (locations_[i].name == name) return i;
  }
  return std::nullopt;
}

expr::Resolver BoundLha::resolver() const {
  return [this](std::string_view name) -> std::optional<expr::Binding> {
    if (auto i = variable_index(name)) return expr::Slot{expr::SlotKind::Var, static_cast<std::uint32_t>(*i)};
    for (std::size_t i = 0; i < species_.size(); ++i) {
      if (species_[i] == name) return expr::Slot{expr::SlotKind::Species, static_cast<std::uint32_t>(i)};
    }
    for (const auto& [cname, value] : constants_) {
      if (cname == name) return value;
    }
    return std::nullopt;
  };
}

BoundLha BoundLha::bind(const Lha& lha, const CrnModel& model) {
  BoundLha out;
  out.variables_ = lha.variables;
  out.constants_ = lha.constants;
  for (std::size_t i = 0; i < model.species_count(); ++i) out.species_.push_back(model.species_name(i));

  std::set<std::string> names;
  for (const auto& v : lha.variables) {
    if (!names.insert(v).second) throw ModelError("LHA: duplicate variable '" + v + "'");
  }
  for (const auto& [c, value] : lha.constants) {
    if (!names.insert(c).second) throw ModelError("LHA: constant '" + c + "' clashes with another name");
  }
  for (const auto& s : out.species_) {
    if (names.count(s)) throw ModelError("LHA: name '" + s + "' clashes with a model species");
  }

  const auto resolve = out.resolver();
  auto compile_expr = [&](const std::string& text, const std::string& where) {
    try {
      const auto node = expr::parse(text);
      return expr::Program::compile(node, resolve);
    } catch (const Error& e) {
      throw ModelError("LHA " + where + ": " + e.what());
    }
  };
  auto compile_guard = [&](const std::string& text, const std::string& where) {
    try {
      return expr::Guard::compile(expr::parse(text), resolve);
    } catch (const Error& e) {
      throw ModelError("LHA " + where + ": " + e.what());
    }
  };
  auto compile_updates = [&](const std::vector<std::pair<std::string, std::string>>& updates, const std::string& where) {
    std::vector<std::pair<std::uint32_t, expr::Program>> out_updates;
    for (const auto& [var, text] : updates) {
      const auto idx = out.variable_index(var);
      if (!idx) throw ModelError("LHA " + where + ": update of undeclared variable '" + var + "'");
      out_updates.emplace_back(static_cast<std::uint32_t>(*idx), compile_expr(text, where + " update of " + var));
    }
    return out_updates;
  };

  bool any_initial = false;
  bool any_final = false;
  for (const auto& spec : lha.locations) {
    if (out.location_index(spec.name)) throw ModelError("LHA: duplicate location '" + spec.name + "'");
    BoundLocation loc;
    loc.name = spec.name;
    loc.initial = spec.initial;
    loc.final = spec.final;
    loc.entry = compile_guard(spec.entry, "entry of " + spec.name);
    loc.flows.assign(lha.variables.size(), FlowTerm{});
    for (const auto& [var, flow] : spec.flows) {
      const auto idx = out.variable_index(var);
      if (!idx) throw ModelError("LHA: flow of undeclared variable '" + var + "' in " + spec.name);
      if (const auto* c = std::get_if<double>(&flow)) {
        loc.flows[*idx].constant = *c;
      } else {
        const auto sp = model.species_index(std::get<std::string>(flow));
        if (!sp) throw ModelError("LHA: flow references unknown species '" + std::get<std::string>(flow) + "'");
        loc.flows[*idx].species = static_cast<std::int32_t>(*sp);
      }
    }
    any_initial |= spec.initial;
    any_final |= spec.final;
    out.locations_.push_back(std::move(loc));
  }
  if (!any_initial) throw ModelError("LHA: no initial location");
  if (!any_final) throw ModelError("LHA: no final location");

  for (std::size_t k = 0; k < lha.edges.size(); ++k) {
    const auto& spec = lha.edges[k];
    const std::string where = "edge " + std::to_string(k) + " (" + spec.from + " -> " + spec.to + ")";
    BoundEdge edge;
    const auto from = out.location_index(spec.from);
    const auto to = out.location_index(spec.to);
    if (!from || !to) throw ModelError("LHA " + where + ": unknown endpoint");
    edge.from = *from;
    edge.to = *to;
    edge.autonomous = spec.autonomous;
    edge.guard = compile_guard(spec.guard, where + " guard");
    edge.updates = compile_updates(spec.updates, where);
    if (spec.autonomous) {
      for (const auto& clause : edge.guard.clauses()) {
        for (const auto& c : clause) {
          if (!c.affine) throw ModelError("LHA " + where + ": autonomous guard must be linear in the variables");
        }
      }
      out.locations_[edge.from].autonomous_edges.push_back(k);
    } else {
      edge.events.assign(model.reaction_count(), spec.events.all);
      const auto& listed = spec.events.all ? spec.events.except : spec.events.names;
      for (const auto& name : listed) {
        const auto j = model.reaction_index(name);
        if (!j) throw ModelError("LHA " + where + ": unknown event '" + name + "'");
        edge.events[*j] = !spec.events.all;
      }
      out.locations_[edge.from].sync_edges.push_back(k);
    }
    out.edges_.push_back(std::move(edge));
  }
  for (auto& loc : out.locations_) {
    std::set<std::uint32_t> vars;
    std::set<std::uint32_t> species;
    for (const auto k : loc.autonomous_edges) {
      for (const auto& clause : out.edges_[k].guard.clauses()) {
        for (const auto& c : clause) {
          for (const auto v : c.diff.variables()) vars.insert(v);
          for (const auto sp : c.diff.species()) species.insert(sp);
        }
      }
    }
    for (const auto v : vars) {
      if (loc.flows[v].species >= 0) species.insert(static_cast<std::uint32_t>(loc.flows[v].species));
    }
    loc.pending_vars.assign(vars.begin(), vars.end());
    loc.pending_species.assign(species.begin(), species.end());
  }
  out.initial_updates_ = compile_updates(lha.initial_updates, "initial updates");
  return out;
}

// ---------------------------------------------------------------------------
// Product process

std::optional<AutonomousFire> earliest_autonomous_fire(const SyncState& state, const BoundLha& lha) {
  const auto& loc = lha.locations()[state.location];
  if (loc.autonomous_edges.empty()) return std::nullopt;
  thread_local std::vector<double> rates;
  thread_local std::vector<double> shifted;
  rates.resize(loc.flows.size());
  shifted.resize(state.valuation.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const auto& f = loc.flows[i];
    rates[i] = f.species >= 0 ? static_cast<double>(state.model_state.populations[static_cast<std::size_t>(f.species)])
                              : f.constant;
    shifted[i] = state.valuation[i] + rates[i];
  }
  const expr::Env now{state.valuation, state.model_state.populations, {}};
  const expr::Env later{shifted, state.model_state.populations, {}};

  std::optional<AutonomousFire> best;
  for (const auto k : loc.autonomous_edges) {
    const auto& edge = lha.edges()[k];
    std::optional<double> edge_delay;
    auto consider = [&](const Interval& iv) {
      if (iv.empty) return;
      if (!iv.lo_closed) {
        throw SimulationError("autonomous edge " + std::to_string(k) + " has a guard whose enabling instant is not attained");
      }
      if (!edge_delay || iv.lo < *edge_delay) edge_delay = iv.lo;
    };
    if (edge.guard.always_true()) {
      consider(Interval{});
    } else {
      for (const auto& clause : edge.guard.clauses()) {
        Interval iv;
        for (const auto& c : clause) {
          const double h0 = c.diff.eval(now);
          bool moving = false;
          for (const auto v : c.vars) moving = moving || rates[v] != 0.0;
          const double slope = moving ? c.diff.eval(later) - h0 : 0.0;
          iv = intersect(iv, solve_constraint(h0, slope, c.op));
          if (iv.empty) break;
        }
        consider(iv);
      }
    }
    if (edge_delay && (!best || *edge_delay < best->delay)) best = AutonomousFire{*edge_delay, k};
  }
  return best;
}

const char* to_string(RunOutcome o) noexcept {
  switch (o) {
    case RunOutcome::Accepted: return "accepted";
    case RunOutcome::NoInitialLocation: return "no_initial_location";
    case RunOutcome::NoEnabledEdge: return "no_enabled_edge";
    case RunOutcome::PathEnded: return "path_ended";
  }
  return "unknown";
}

Synchronizer::Synchronizer(const BoundLha& lha, bool record_product) : lha_(&lha), record_(record_product) {}

std::size_t Synchronizer::track(expr::Program program) {
  tracked_.push_back(std::move(program));
  return tracked_.size() - 1;
}

void Synchronizer::observe() {
  const auto n = state_.valuation.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = state_.valuation[i];
    result_.min[i] = std::min(result_.min[i], v);
    result_.max[i] = std::max(result_.max[i], v);
  }
  if (!tracked_.empty()) {
    const auto e = env();
    for (std::size_t i = 0; i < tracked_.size(); ++i) {
      const double v = tracked_[i].eval(e);
      result_.tracked_last[i] = v;
      result_.tracked_min[i] = std::min(result_.tracked_min[i], v);
      result_.tracked_max[i] = std::max(result_.tracked_max[i], v);
    }
  }
}

void Synchronizer::record(StepKind kind, std::optional<std::size_t> reaction) {
  if (!record_) return;
  product_.push_back({kind, state_.time, reaction, state_.model_state, state_.location, state_.valuation});
}

void Synchronizer::finish(RunOutcome outcome) {
  done_ = true;
  result_.outcome = outcome;
  result_.accepted = outcome == RunOutcome::Accepted;
  result_.final_location = state_.location;
  result_.final_location_name = lha_->locations()[state_.location].name;
  result_.final_valuation = state_.valuation;
  result_.last = state_.valuation;
  result_.time = state_.time;
}

bool Synchronizer::begin(const State& init) {
  const auto n = lha_->variable_count();
  state_ = SyncState{init, 0, std::vector<double>(n, 0.0), 0.0};
  result_ = RunResult{};
  result_.min.assign(n, std::numeric_limits<double>::infinity());
  result_.max.assign(n, -std::numeric_limits<double>::infinity());
  result_.tracked_last.assign(tracked_.size(), 0.0);
  result_.tracked_min.assign(tracked_.size(), std::numeric_limits<double>::infinity());
  result_.tracked_max.assign(tracked_.size(), -std::numeric_limits<double>::infinity());
  done_ = false;
  pending_valid_ = false;
  product_.clear();

  const auto& locs = lha_->locations();
  std::optional<std::size_t> start;
  for (std::size_t i = 0; i < locs.size(); ++i) {
    if (!locs[i].initial || !locs[i].entry.holds(env())) continue;
    if (start) ++result_.nondeterministic_choices;
    else start = i;
  }
  if (!start) {
    finish(RunOutcome::NoInitialLocation);
    return false;
  }
  state_.location = *start;
  if (!lha_->initial_updates().empty()) {
    scratch_.clear();
    for (const auto& [var, program] : lha_->initial_updates()) scratch_.push_back(program.eval(env()));
    for (std::size_t u = 0; u < scratch_.size(); ++u) state_.valuation[lha_->initial_updates()[u].first] = scratch_[u];
  }
  observe();
  record(StepKind::Initial, std::nullopt);
  if (locs[state_.location].final) {
    finish(RunOutcome::Accepted);
    return false;
  }
  return !run_autonomous(0.0);
}

void Synchronizer::advance(double delay) {
  if (delay <= 0.0) return;
  const auto& loc = lha_->locations()[state_.location];
  for (std::size_t i = 0; i < loc.flows.size(); ++i) {
    const auto& f = loc.flows[i];
    const double rate = f.species >= 0 ? static_cast<double>(state_.model_state.populations[static_cast<std::size_t>(f.species)])
                                       : f.constant;
    if (rate != 0.0) state_.valuation[i] += rate * delay;
  }
  state_.time += delay;
  observe();
}

void Synchronizer::fire(const BoundEdge& edge) {
  if (!edge.updates.empty()) {
    const auto e = env();
    scratch_.clear();
    for (const auto& [var, program] : edge.updates) scratch_.push_back(program.eval(e));
    for (std::size_t u = 0; u < scratch_.size(); ++u) state_.valuation[edge.updates[u].first] = scratch_[u];
  }
  if (edge.to != state_.location) {
    pending_valid_ = false;
  } else if (pending_valid_) {
    const auto& deps = lha_->locations()[edge.to].pending_vars;
    for (const auto& [var, program] : edge.updates) {
      if (std::binary_search(deps.begin(), deps.end(), var)) {
        pending_valid_ = false;
        break;
      }
    }
  }
  state_.location = edge.to;
  observe();
}

bool Synchronizer::run_autonomous(double remaining) {
  std::uint64_t zero_delay = 0;
  for (;;) {
    if (!pending_valid_) {
      const auto fire_at = earliest_autonomous_fire(state_, *lha_);
      pending_.reset();
      if (fire_at) pending_.emplace(state_.time + fire_at->delay, fire_at->edge);
      pending_valid_ = true;
    }
    std::optional<AutonomousFire> next;
    if (pending_) next = AutonomousFire{std::max(0.0, pending_->first - state_.time), pending_->second};
    if (!next || next->delay > remaining) {
      if (std::isfinite(remaining)) advance(remaining);
      return false;
    }
    advance(next->delay);
    remaining -= next->delay;
    zero_delay = next->delay > 0.0 ? 0 : zero_delay + 1;
    if (zero_delay > kMaxZeroDelayFirings) throw SimulationError("autonomous edges fire forever without time progress");
    fire(lha_->edges()[next->edge]);
    ++result_.autonomous_firings;
    record(StepKind::Autonomous, std::nullopt);
    if (lha_->locations()[state_.location].final) {
      finish(RunOutcome::Accepted);
      return true;
    }
  }
}

bool Synchronizer::on_event(double sojourn, std::size_t reaction, const State& new_state) {
  if (done_) return false;
  if (run_autonomous(sojourn)) return false;
  for (const auto sp : lha_->locations()[state_.location].pending_species) {
    if (state_.model_state.populations[sp] != new_state.populations[sp]) {
      pending_valid_ = false;
      break;
    }
  }
  state_.model_state = new_state;
  ++result_.events;

  const auto& loc = lha_->locations()[state_.location];
  const auto e = env();
  const BoundEdge* chosen = nullptr;
  for (const auto k : loc.sync_edges) {
    const auto& edge = lha_->edges()[k];
    if (!edge.events[reaction] || !edge.guard.holds(e)) continue;
    if (chosen) {
      ++result_.nondeterministic_choices;
      break;
    }
    chosen = &edge;
  }
  if (!chosen) {
    observe();
    record(StepKind::Synchronised, reaction);
    finish(RunOutcome::NoEnabledEdge);
    return false;
  }
  fire(*chosen);
  record(StepKind::Synchronised, reaction);
  if (lha_->locations()[state_.location].final) {
    finish(RunOutcome::Accepted);
    return false;
  }
  return !run_autonomous(0.0);
}

void Synchronizer::end(Termination reason, double remaining) {
  if (done_) return;
  if (run_autonomous(remaining)) return;
  finish(RunOutcome::PathEnded);
  result_.path_end = reason;
}

RunResult synchronize(const BoundLha& lha, const State& init, std::span<const PathEvent> events, double final_remaining) {
  Synchronizer sync(lha);
  replay_path(init, events, sync, std::isinf(final_remaining) ? Termination::Deadlock : Termination::TimeBound,
              final_remaining);
  return sync.result();
}

RunResult synchronize_ssa(const BoundLha& lha, const CrnModel& model, std::span<const double> theta, const State& init,
                          RngStream& rng, const SafetyBounds& bounds) {
  Synchronizer sync(lha);
  sample_path(model, theta, init, rng, sync, bounds);
  return sync.result();
}

}  // namespace osctune
