#include "osctune/crn.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "osctune/error.hpp"

namespace osctune {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::string_view kThreeWay = R"({
  "species": [
    {"name": "A", "init": 333}, {"name": "B", "init": 333}, {"name": "C", "init": 333},
    {"name": "D_A", "init": 10}, {"name": "D_B", "init": 10}, {"name": "D_C", "init": 10}
  ],
  "params": ["r_A", "r_B", "r_C"],
  "reactions": [
    {"name": "R1", "reactants": {"A": 1, "B": 1}, "products": {"B": 2}, "rate": {"mass_action": "r_A"}},
    {"name": "R2", "reactants": {"B": 1, "C": 1}, "products": {"C": 2}, "rate": {"mass_action": "r_B"}},
    {"name": "R3", "reactants": {"C": 1, "A": 1}, "products": {"A": 2}, "rate": {"mass_action": "r_C"}},
    {"name": "R4", "reactants": {"D_A": 1, "C": 1}, "products": {"D_A": 1, "A": 1}, "rate": {"mass_action": "r_C"}},
    {"name": "R5", "reactants": {"D_B": 1, "A": 1}, "products": {"D_B": 1, "B": 1}, "rate": {"mass_action": "r_A"}},
    {"name": "R6", "reactants": {"D_C": 1, "B": 1}, "products": {"D_C": 1, "C": 1}, "rate": {"mass_action": "r_B"}}
  ]
})";

constexpr std::string_view kRepressilator = R"({
  "species": [
    {"name": "G1", "init": 1}, {"name": "G2", "init": 1}, {"name": "G3", "init": 1},
    {"name": "M1", "init": 0}, {"name": "M2", "init": 0}, {"name": "M3", "init": 0},
    {"name": "P1", "init": 5}, {"name": "P2", "init": 0}, {"name": "P3", "init": 15}
  ],
  "params": ["alpha", "beta", "n", "alpha0"],
  "reactions": [
    {"name": "R1", "reactants": {"G1": 1}, "products": {"G1": 1, "M1": 1}, "rate": {"expr": "alpha/(1+P3^n)+alpha0"}},
    {"name": "R2", "reactants": {"G2": 1}, "products": {"G2": 1, "M2": 1}, "rate": {"expr": "alpha/(1+P1^n)+alpha0"}},
    {"name": "R3", "reactants": {"G3": 1}, "products": {"G3": 1, "M3": 1}, "rate": {"expr": "alpha/(1+P2^n)+alpha0"}},
    {"name": "R4", "reactants": {"M1": 1}, "products": {"M1": 1, "P1": 1}, "rate": {"mass_action": "beta"}},
    {"name": "R5", "reactants": {"M2": 1}, "products": {"M2": 1, "P2": 1}, "rate": {"mass_action": "beta"}},
    {"name": "R6", "reactants": {"M3": 1}, "products": {"M3": 1, "P3": 1}, "rate": {"mass_action": "beta"}},
    {"name": "R7", "reactants": {"M1": 1}, "products": {}, "rate": {"mass_action": 1}},
    {"name": "R8", "reactants": {"M2": 1}, "products": {}, "rate": {"mass_action": 1}},
    {"name": "R9", "reactants": {"M3": 1}, "products": {}, "rate": {"mass_action": 1}},
    {"name": "R10", "reactants": {"P1": 1}, "products": {}, "rate": {"mass_action": 1}},
    {"name": "R11", "reactants": {"P2": 1}, "products": {}, "rate": {"mass_action": 1}},
    {"name": "R12", "reactants": {"P3": 1}, "products": {}, "rate": {"mass_action": 1}}
  ]
})";

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

[[noreturn]] void schema_error(const std::string& msg) { throw ParseError("model schema: " + msg, 0, 0); }

std::vector<std::pair<std::string, std::int64_t>> read_stoich(const ojson& node, const std::string& where) {
  std::vector<std::pair<std::string, std::int64_t>> out;
  if (node.is_null()) return out;
  if (!node.is_object()) schema_error(where + " must be an object of species -> coefficient");
  for (const auto& [name, coeff] : node.items()) {
    if (!coeff.is_number_integer()) schema_error(where + "." + name + " must be an integer");
    out.emplace_back(name, coeff.get<std::int64_t>());
  }
  return out;
}

ojson write_stoich(const std::vector<std::pair<std::string, std::int64_t>>& entries) {
  ojson out = ojson::object();
  for (const auto& [name, coeff] : entries) out[name] = coeff;
  return out;
}

}  // namespace

ModelDocument parse_model_document(std::string_view text) {
  ojson root;
  try {
    root = ojson::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("model syntax error: " + std::string(e.what()), line, col);
  }
  if (!root.is_object()) schema_error("top level must be an object");

  ModelDocument doc;
  for (const auto& sp : root.value("species", ojson::array())) {
    if (!sp.is_object() || !sp.contains("name") || !sp["name"].is_string()) schema_error("species entries need a name");
    SpeciesDecl decl;
    decl.name = sp["name"].get<std::string>();
    const auto init = sp.value("init", ojson(0));
    if (!init.is_number_integer()) schema_error("species " + decl.name + ": init must be an integer");
    decl.init = init.get<std::int64_t>();
    doc.species.push_back(std::move(decl));
  }
  for (const auto& p : root.value("params", ojson::array())) {
    if (!p.is_string()) schema_error("params must be strings");
    doc.params.push_back(p.get<std::string>());
  }
  for (const auto& r : root.value("reactions", ojson::array())) {
    if (!r.is_object() || !r.contains("name") || !r["name"].is_string()) schema_error("reaction entries need a name");
    ReactionDecl decl;
    decl.name = r["name"].get<std::string>();
    decl.reactants = read_stoich(r.value("reactants", ojson()), decl.name + ".reactants");
    decl.products = read_stoich(r.value("products", ojson()), decl.name + ".products");
    const auto rate = r.value("rate", ojson());
    if (!rate.is_object()) schema_error(decl.name + ": rate must be an object");
    if (rate.contains("mass_action")) {
      decl.rate.kind = RateDecl::Kind::MassAction;
      const auto& k = rate["mass_action"];
      if (k.is_string()) decl.rate.parameter = k.get<std::string>();
      else if (k.is_number()) decl.rate.constant = k.get<double>();
      else schema_error(decl.name + ": mass_action must be a parameter name or a number");
    } else if (rate.contains("expr") && rate["expr"].is_string()) {
      decl.rate.kind = RateDecl::Kind::Expression;
      decl.rate.expression = rate["expr"].get<std::string>();
    } else {
      schema_error(decl.name + ": rate needs 'mass_action' or 'expr'");
    }
    doc.reactions.push_back(std::move(decl));
  }
  return doc;
}

std::string serialize_model_document(const ModelDocument& doc) {
  ojson root;
  root["species"] = ojson::array();
  for (const auto& sp : doc.species) root["species"].push_back({{"name", sp.name}, {"init", sp.init}});
  root["params"] = doc.params;
  root["reactions"] = ojson::array();
  for (const auto& r : doc.reactions) {
    ojson rate;
    if (r.rate.kind == RateDecl::Kind::Expression) rate["expr"] = r.rate.expression;
    else if (!r.rate.parameter.empty()) rate["mass_action"] = r.rate.parameter;
    else rate["mass_action"] = r.rate.constant;
    root["reactions"].push_back(
        {{"name", r.name}, {"reactants", write_stoich(r.reactants)}, {"products", write_stoich(r.products)}, {"rate", rate}});
  }
  return root.dump(2);
}

std::vector<std::string> validate_model(const ModelDocument& doc) {
  std::vector<std::string> diags;
  std::set<std::string> species;
  std::set<std::string> params;
  for (const auto& sp : doc.species) {
    if (sp.name.empty()) diags.push_back("species with empty name");
    if (!species.insert(sp.name).second) diags.push_back("duplicate species '" + sp.name + "'");
    if (sp.init < 0) diags.push_back("species '" + sp.name + "' has negative initial population");
  }
  for (const auto& p : doc.params) {
    if (!params.insert(p).second) diags.push_back("duplicate parameter '" + p + "'");
    if (species.count(p)) diags.push_back("parameter '" + p + "' shadows a species");
  }
  std::set<std::string> reactions;
  for (const auto& r : doc.reactions) {
    if (!reactions.insert(r.name).second) diags.push_back("duplicate reaction '" + r.name + "'");
    for (const auto* side : {&r.reactants, &r.products}) {
      for (const auto& [name, coeff] : *side) {
        if (!species.count(name)) diags.push_back("reaction '" + r.name + "' references undeclared species '" + name + "'");
        if (coeff <= 0) diags.push_back("reaction '" + r.name + "' has non-positive coefficient for '" + name + "'");
      }
    }
    if (r.rate.kind == RateDecl::Kind::MassAction) {
      if (!r.rate.parameter.empty() && !params.count(r.rate.parameter)) {
        diags.push_back("reaction '" + r.name + "' references undeclared parameter '" + r.rate.parameter + "'");
      }
      if (r.rate.parameter.empty() && (!std::isfinite(r.rate.constant) || r.rate.constant < 0)) {
        diags.push_back("reaction '" + r.name + "' has an invalid rate constant");
      }
    } else {
      try {
        const auto node = expr::parse(r.rate.expression);
        if (expr::is_boolean(node)) diags.push_back("reaction '" + r.name + "' rate expression is boolean");
        for (const auto& id : expr::identifiers(node)) {
          if (!species.count(id) && !params.count(id)) {
            diags.push_back("reaction '" + r.name + "' rate references undeclared parameter '" + id + "'");
          }
        }
      } catch (const ParseError& e) {
        diags.push_back("reaction '" + r.name + "' rate expression: " + e.what());
      }
    }
  }
  return diags;
}

CrnModel CrnModel::from_document(ModelDocument doc) {
  const auto diags = validate_model(doc);
  if (!diags.empty()) {
    std::string msg = "invalid model:";
    for (const auto& d : diags) msg += "\n  " + d;
    throw ModelError(msg);
  }
  CrnModel model;
  model.doc_ = std::move(doc);
  const auto& d = model.doc_;
  for (const auto& sp : d.species) model.initial_.populations.push_back(sp.init);

  const expr::Resolver resolve = [&model](std::string_view name) -> std::optional<expr::Binding> {
    if (auto i = model.species_index(name)) return expr::Slot{expr::SlotKind::Species, static_cast<std::uint32_t>(*i)};
    if (auto i = model.param_index(name)) return expr::Slot{expr::SlotKind::Param, static_cast<std::uint32_t>(*i)};
    return std::nullopt;
  };

  for (const auto& decl : d.reactions) {
    Reaction r;
    r.name = decl.name;
    std::vector<std::int64_t> delta(d.species.size(), 0);
    for (const auto& [name, coeff] : decl.reactants) {
      const auto i = static_cast<std::uint32_t>(*model.species_index(name));
      r.reactants.push_back({i, coeff});
      delta[i] -= coeff;
    }
    for (const auto& [name, coeff] : decl.products) {
      const auto i = static_cast<std::uint32_t>(*model.species_index(name));
      r.products.push_back({i, coeff});
      delta[i] += coeff;
    }
    for (std::uint32_t i = 0; i < delta.size(); ++i) {
      if (delta[i] != 0) r.net_change.push_back({i, delta[i]});
    }
    r.rate_kind = decl.rate.kind;
    if (decl.rate.kind == RateDecl::Kind::MassAction) {
      if (!decl.rate.parameter.empty()) r.rate_param = static_cast<std::uint32_t>(*model.param_index(decl.rate.parameter));
      r.rate_constant = decl.rate.constant;
    } else {
      r.rate_expression = expr::Program::compile(expr::parse(decl.rate.expression), resolve);
    }
    model.reactions_.push_back(std::move(r));
  }

  // Species each propensity reads: reactants (availability and mass action)
  // plus any species in a rate expression.
  std::vector<std::vector<std::uint32_t>> reads(model.reactions_.size());
  for (std::size_t j = 0; j < model.reactions_.size(); ++j) {
    const auto& r = model.reactions_[j];
    for (const auto& term : r.reactants) reads[j].push_back(term.species);
    if (r.rate_kind == RateDecl::Kind::Expression) {
      for (const auto sp : r.rate_expression.species()) reads[j].push_back(sp);
    }
  }
  model.dependents_.resize(model.reactions_.size());
  for (std::size_t i = 0; i < model.reactions_.size(); ++i) {
    for (std::uint32_t j = 0; j < model.reactions_.size(); ++j) {
      bool affected = false;
      for (const auto& change : model.reactions_[i].net_change) {
        affected = affected || std::find(reads[j].begin(), reads[j].end(), change.species) != reads[j].end();
      }
      if (affected) model.dependents_[i].push_back(j);
    }
  }
  return model;
}

std::optional<std::size_t> CrnModel::species_index(std::string_view name) const {
  for (std::size_t i = 0; i < doc_.species.size(); ++i) {
    if (doc_.species[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> CrnModel::param_index(std::string_view name) const {
  for (std::size_t i = 0; i < doc_.params.size(); ++i) {
    if (doc_.params[i] == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> CrnModel::reaction_index(std::string_view name) const {
  for (std::size_t i = 0; i < reactions_.size(); ++i) {
    if (reactions_[i].name == name) return i;
  }
  return std::nullopt;
}

double CrnModel::propensity(std::size_t j, const State& x, std::span<const double> theta) const {
  const Reaction& r = reactions_[j];
  for (const auto& s : r.reactants) {
    if (x.populations[s.species] < s.coefficient) return 0.0;
  }
  double value = 0.0;
  if (r.rate_kind == RateDecl::Kind::MassAction) {
    value = r.rate_param ? theta[*r.rate_param] : r.rate_constant;
    for (const auto& s : r.reactants) {
      const auto pop = x.populations[s.species];
      for (std::int64_t k = 0; k < s.coefficient; ++k) value *= static_cast<double>(pop - k);
    }
  } else {
    try {
      value = r.rate_expression.eval({{}, x.populations, theta});
    } catch (const EvalError& e) {
      throw SimulationError("reaction '" + r.name + "': " + e.what());
    }
  }
  if (!std::isfinite(value) || value < 0.0) {
    throw SimulationError("reaction '" + r.name + "' has invalid propensity " + std::to_string(value));
  }
  return value;
}

void CrnModel::apply_reaction(std::size_t j, State& x) const {
  const Reaction& r = reactions_[j];
  for (const auto& s : r.reactants) {
    if (x.populations[s.species] < s.coefficient) {
      throw SimulationError("reaction '" + r.name + "' fired without enough '" + species_name(s.species) + "'");
    }
  }
  for (const auto& s : r.net_change) x.populations[s.species] += s.coefficient;
}

CrnModel parse_model(std::string_view text) { return CrnModel::from_document(parse_model_document(text)); }

std::string serialize_model(const CrnModel& model) { return serialize_model_document(model.document()); }

std::vector<std::string> builtin_model_names() { return {"three-way", "repressilator"}; }

std::optional<std::string> builtin_model_text(std::string_view name) {
  if (name == "three-way") return std::string(kThreeWay);
  if (name == "repressilator") return std::string(kRepressilator);
  return std::nullopt;
}

CrnModel builtin_model(std::string_view name) {
  const auto text = builtin_model_text(name);
  if (!text) throw ModelError("unknown builtin model '" + std::string(name) + "'");
  return parse_model(*text);
}

}  // namespace osctune
