#include "osctune/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "osctune/error.hpp"

namespace osctune {

namespace {

using ojson = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// JSON has no infinity; non-finite values are written as strings.
ojson json_number(double x) {
  if (!std::isfinite(x)) return fmt(x);
  return x;
}

[[noreturn]] void config_error(const std::string& msg) { throw ConfigError("config: " + msg); }

double get_number(const ojson& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) config_error(where + "." + key + " is required");
  if (!it->is_number()) config_error(where + "." + key + " must be a number");
  return it->get<double>();
}

std::uint64_t get_count(const ojson& obj, const char* key, const std::string& where) {
  const double v = get_number(obj, key, where);
  if (v < 0 || v != std::floor(v) || v > 9.0e18) config_error(where + "." + key + " must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

void check_keys(const ojson& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const auto* a : allowed) ok = ok || key == a;
    if (!ok) config_error("unknown key '" + key + "' in " + where);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ojson parse_json(std::string_view text, const std::string& what) {
  try {
    return ojson::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const auto limit = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(what + " syntax error: " + e.what(), line, col);
  }
}

UniformPrior make_prior(const ExperimentConfig& config) { return UniformPrior(config.prior); }

unsigned resolve_parallelism(unsigned requested) {
  return requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

std::string safe_name(const std::string& name) {
  std::string out;
  for (const char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') ? c : '_';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (const char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

ExperimentConfig parse_config(std::string_view json_text, std::filesystem::path base_dir) {
  const ojson root = parse_json(json_text, "config");
  if (!root.is_object()) config_error("top level must be an object");
  check_keys(root, "config", {"name", "model", "fixed_params", "prior", "meter", "algorithm", "master_seed",
                              "parallelism", "output_dir", "bounds"});

  ExperimentConfig c;
  c.base_dir = std::move(base_dir);
  c.name = root.value("name", std::string());

  if (!root.contains("model")) config_error("model is required");
  const auto& model = root["model"];
  if (model.is_string()) {
    c.model = model.get<std::string>();
  } else if (model.is_object()) {
    c.model_json = model.dump();
  } else {
    config_error("model must be a builtin name, a path or an inline model object");
  }

  if (root.contains("fixed_params")) {
    if (!root["fixed_params"].is_object()) config_error("fixed_params must be an object");
    for (const auto& [name, value] : root["fixed_params"].items()) {
      if (!value.is_number()) config_error("fixed_params." + name + " must be a number");
      c.fixed_params.emplace_back(name, value.get<double>());
    }
  }

  if (!root.contains("prior") || !root["prior"].is_object()) config_error("prior must be an object");
  for (const auto& [name, bounds] : root["prior"].items()) {
    if (!bounds.is_array() || bounds.size() != 2 || !bounds[0].is_number() || !bounds[1].is_number()) {
      config_error("prior." + name + " must be [lower, upper]");
    }
    c.prior.push_back({name, bounds[0].get<double>(), bounds[1].get<double>()});
  }

  if (!root.contains("meter") || !root["meter"].is_object()) config_error("meter must be an object");
  const auto& meter = root["meter"];
  check_keys(meter, "meter", {"species", "L", "H", "n_periods", "target", "distance"});
  if (!meter.contains("species") || !meter["species"].is_string()) config_error("meter.species must be a string");
  c.meter.species = meter["species"].get<std::string>();
  const double low = get_number(meter, "L", "meter");
  const double high = get_number(meter, "H", "meter");
  if (low != std::floor(low) || high != std::floor(high)) config_error("meter thresholds must be integers");
  c.meter.low = static_cast<std::int64_t>(low);
  c.meter.high = static_cast<std::int64_t>(high);
  c.meter.n_periods = get_count(meter, "n_periods", "meter");
  c.meter.target = get_number(meter, "target", "meter");
  if (meter.contains("distance")) {
    if (!meter["distance"].is_string()) config_error("meter.distance must be \"min\" or \"max\"");
    c.meter.rule = distance_rule_from_string(meter["distance"].get<std::string>());
  }

  if (!root.contains("algorithm") || !root["algorithm"].is_object()) config_error("algorithm must be an object");
  const auto& alg = root["algorithm"];
  const std::string kind = alg.value("kind", std::string());
  if (kind == "rejection") {
    check_keys(alg, "algorithm", {"kind", "particles", "epsilon", "max_simulations"});
    c.algorithm = AlgorithmKind::Rejection;
    c.particles = get_count(alg, "particles", "algorithm");
    c.epsilon = get_number(alg, "epsilon", "algorithm");
    if (alg.contains("max_simulations")) c.max_simulations = get_count(alg, "max_simulations", "algorithm");
  } else if (kind == "smc") {
    check_keys(alg, "algorithm",
               {"kind", "particles", "alpha", "epsilon_target", "max_generations", "max_simulations_per_generation"});
    c.algorithm = AlgorithmKind::Smc;
    c.particles = get_count(alg, "particles", "algorithm");
    if (alg.contains("alpha")) c.alpha = get_number(alg, "alpha", "algorithm");
    c.epsilon_target = get_number(alg, "epsilon_target", "algorithm");
    if (alg.contains("max_generations")) c.max_generations = get_count(alg, "max_generations", "algorithm");
    if (alg.contains("max_simulations_per_generation")) {
      c.max_simulations = get_count(alg, "max_simulations_per_generation", "algorithm");
    }
  } else {
    config_error("algorithm.kind must be \"rejection\" or \"smc\"");
  }

  if (root.contains("master_seed")) c.master_seed = get_count(root, "master_seed", "config");
  if (root.contains("parallelism")) c.parallelism = static_cast<unsigned>(get_count(root, "parallelism", "config"));
  if (root.contains("output_dir")) {
    if (!root["output_dir"].is_string()) config_error("output_dir must be a string");
    c.output_dir = root["output_dir"].get<std::string>();
  }
  if (root.contains("bounds")) {
    const auto& b = root["bounds"];
    if (!b.is_object()) config_error("bounds must be an object");
    check_keys(b, "bounds", {"max_time", "max_events"});
    SafetyBounds bounds = c.meter.default_bounds();
    if (b.contains("max_time")) bounds.max_time = get_number(b, "max_time", "bounds");
    if (b.contains("max_events")) bounds.max_events = get_count(b, "max_events", "bounds");
    c.bounds = bounds;
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const ojson root = parse_json(text, "config");
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  if (root.is_object() && root.contains("manifest_version") && root.contains("config")) {
    return parse_config(root["config"].dump(), base);
  }
  return parse_config(text, base);
}

std::string config_to_json(const ExperimentConfig& c) {
  ojson root;
  if (!c.name.empty()) root["name"] = c.name;
  root["model"] = c.model_json.empty() ? ojson(c.model) : ojson::parse(c.model_json);
  root["fixed_params"] = ojson::object();
  for (const auto& [name, value] : c.fixed_params) root["fixed_params"][name] = value;
  root["prior"] = ojson::object();
  for (const auto& iv : c.prior) root["prior"][iv.name] = ojson::array({iv.lower, iv.upper});
  root["meter"] = {{"species", c.meter.species},
                   {"L", c.meter.low},
                   {"H", c.meter.high},
                   {"n_periods", c.meter.n_periods},
                   {"target", c.meter.target},
                   {"distance", to_string(c.meter.rule)}};
  if (c.algorithm == AlgorithmKind::Rejection) {
    root["algorithm"] = {{"kind", "rejection"}, {"particles", c.particles}, {"epsilon", c.epsilon}};
    if (c.max_simulations) root["algorithm"]["max_simulations"] = c.max_simulations;
  } else {
    root["algorithm"] = {{"kind", "smc"},
                         {"particles", c.particles},
                         {"alpha", c.alpha},
                         {"epsilon_target", c.epsilon_target},
                         {"max_generations", c.max_generations}};
    if (c.max_simulations) root["algorithm"]["max_simulations_per_generation"] = c.max_simulations;
  }
  root["master_seed"] = c.master_seed;
  root["parallelism"] = c.parallelism;
  root["output_dir"] = c.output_dir;
  if (c.bounds) root["bounds"] = {{"max_time", c.bounds->max_time}, {"max_events", c.bounds->max_events}};
  return root.dump(2);
}

CrnModel load_model(const std::string& spec, const std::filesystem::path& base_dir) {
  if (const auto text = builtin_model_text(spec)) return parse_model(*text);
  std::filesystem::path path(spec);
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  if (!std::filesystem::exists(path)) {
    std::string names;
    for (const auto& n : builtin_model_names()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("model '" + spec + "' is neither a builtin (" + names + ") nor an existing file");
  }
  return parse_model(read_file(path));
}

CrnModel load_model(const ExperimentConfig& config) {
  if (!config.model_json.empty()) return parse_model(config.model_json);
  return load_model(config.model, config.base_dir);
}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> diags;
  std::optional<CrnModel> model;
  try {
    model = load_model(c);
  } catch (const Error& e) {
    diags.push_back(e.what());
  }

  try {
    c.meter.validate();
  } catch (const Error& e) {
    diags.push_back(e.what());
  }
  if (c.prior.empty()) diags.push_back("prior must name at least one parameter");
  for (const auto& iv : c.prior) {
    if (!(iv.lower < iv.upper) || !std::isfinite(iv.lower) || !std::isfinite(iv.upper)) {
      diags.push_back("prior for '" + iv.name + "' needs finite lower < upper");
    }
  }
  if (c.particles == 0) diags.push_back("algorithm.particles must be positive");
  if (c.algorithm == AlgorithmKind::Rejection) {
    if (!(c.epsilon > 0.0)) diags.push_back("algorithm.epsilon must be positive");
  } else {
    if (c.particles < 2) diags.push_back("SMC needs at least two particles");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) diags.push_back("algorithm.alpha must lie in (0, 1)");
    if (!(c.epsilon_target >= 0.0)) diags.push_back("algorithm.epsilon_target must be non-negative");
  }
  if (c.bounds && !(c.bounds->max_time > 0.0)) diags.push_back("bounds.max_time must be positive");

  if (model) {
    if (!model->species_index(c.meter.species)) {
      diags.push_back("meter species '" + c.meter.species + "' is not in the model");
    }
    std::set<std::string> seen;
    auto claim = [&](const std::string& name, const char* where) {
      if (!model->param_index(name)) diags.push_back(std::string(where) + " names unknown parameter '" + name + "'");
      if (!seen.insert(name).second) diags.push_back("parameter '" + name + "' is given more than once");
    };
    for (const auto& [name, value] : c.fixed_params) claim(name, "fixed_params");
    for (const auto& iv : c.prior) claim(iv.name, "prior");
    for (const auto& p : model->params()) {
      if (!seen.count(p)) diags.push_back("parameter '" + p + "' is neither fixed nor given a prior");
    }
  }
  return diags;
}

// ---------------------------------------------------------------------------
// Running

ExperimentResult execute_experiment(const ExperimentConfig& config) {
  const auto diags = validate_config(config);
  if (!diags.empty()) {
    std::string msg = "invalid config:";
    for (const auto& d : diags) msg += "\n  " + d;
    throw ConfigError(msg);
  }
  const auto start = std::chrono::steady_clock::now();
  const CrnModel model = load_model(config);
  const UniformPrior prior = make_prior(config);
  const ParameterSpace space(model, config.fixed_params, prior);
  const double reject_above =
      config.algorithm == AlgorithmKind::Rejection ? config.epsilon : std::numeric_limits<double>::infinity();
  const PeriodMeter meter(model, config.meter, reject_above);
  const DistanceFn distance = make_period_distance(meter, space, config.effective_bounds());

  ExperimentResult result;
  if (config.algorithm == AlgorithmKind::Rejection) {
    RejectionOptions opts;
    opts.particles = config.particles;
    opts.epsilon = config.epsilon;
    opts.master_seed = config.master_seed;
    opts.parallelism = config.parallelism;
    opts.max_simulations = config.max_simulations;
    auto r = abc_rejection(prior, distance, opts);
    result.aborted = r.aborted;
    result.termination = r.aborted ? "budget_exhausted" : "complete";
    result.generations.push_back(std::move(r.generation));
  } else {
    SmcOptions opts;
    opts.particles = config.particles;
    opts.alpha = config.alpha;
    opts.epsilon_target = config.epsilon_target;
    opts.max_generations = config.max_generations;
    opts.master_seed = config.master_seed;
    opts.parallelism = config.parallelism;
    opts.max_simulations_per_generation = config.max_simulations;
    auto r = abc_smc(prior, distance, opts);
    result.aborted = r.aborted;
    result.termination = to_string(r.termination);
    result.kernel_floor_warnings = r.kernel_floor_warnings;
    result.generations = std::move(r.generations);
  }
  for (const auto& g : result.generations) result.simulations += g.simulations;
  result.summary = posterior_summary(result.posterior(), prior);
  result.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void write_posterior_csv(std::ostream& out, const Generation& generation, const UniformPrior& prior) {
  out << "particle_index";
  for (const auto& iv : prior.intervals()) out << ',' << iv.name;
  out << ",weight,distance\n";
  for (std::size_t i = 0; i < generation.particles.size(); ++i) {
    const auto& p = generation.particles[i];
    out << i;
    for (const double x : p.theta) out << ',' << fmt(x);
    out << ',' << fmt(p.weight) << ',' << fmt(p.distance) << '\n';
  }
}

std::string generations_json(const ExperimentResult& result) {
  ojson root;
  root["termination"] = result.termination;
  root["aborted"] = result.aborted;
  root["generations"] = ojson::array();
  for (const auto& g : result.generations) {
    double weight_sum = 0.0;
    for (const auto& p : g.particles) weight_sum += p.weight;
    root["generations"].push_back({{"index", g.index},
                                   {"epsilon", json_number(g.epsilon)},
                                   {"particles", g.particles.size()},
                                   {"simulations", g.simulations},
                                   {"proposals", g.proposals},
                                   {"acceptance_rate", g.acceptance_rate},
                                   {"weight_sum", weight_sum}});
  }
  return root.dump(2) + "\n";
}

void write_marginal_csv(std::ostream& out, const Marginal& m) {
  out << "bin_low,bin_high,mass\n";
  const auto bins = m.mass.size();
  const double width = (m.upper - m.lower) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = m.lower + width * static_cast<double>(b);
    const double hi = b + 1 == bins ? m.upper : m.lower + width * static_cast<double>(b + 1);
    out << fmt(lo) << ',' << fmt(hi) << ',' << fmt(m.mass[b]) << '\n';
  }
}

void write_joint_csv(std::ostream& out, const JointHistogram& joint, const PosteriorSummary& summary) {
  const auto& a = summary.marginals[joint.first];
  const auto& b = summary.marginals[joint.second];
  auto edge = [&](const Marginal& m, std::size_t k) {
    if (k == joint.bins) return m.upper;
    return m.lower + (m.upper - m.lower) / static_cast<double>(joint.bins) * static_cast<double>(k);
  };
  out << a.name << "_bin_low," << a.name << "_bin_high," << b.name << "_bin_low," << b.name << "_bin_high,mass\n";
  for (std::size_t i = 0; i < joint.bins; ++i) {
    for (std::size_t j = 0; j < joint.bins; ++j) {
      out << fmt(edge(a, i)) << ',' << fmt(edge(a, i + 1)) << ',' << fmt(edge(b, j)) << ',' << fmt(edge(b, j + 1)) << ','
          << fmt(joint.mass[i * joint.bins + j]) << '\n';
    }
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result = execute_experiment(config);
  const CrnModel model = load_model(config);
  const UniformPrior prior = make_prior(config);

  namespace fs = std::filesystem;
  const fs::path dir(config.output_dir);
  fs::create_directories(dir / "marginals");
  fs::create_directories(dir / "joint");

  std::vector<std::string> outputs;
  auto emit = [&](const fs::path& rel, const std::string& text) {
    write_text(dir / rel, text);
    outputs.push_back(rel.generic_string());
  };

  std::ostringstream posterior;
  write_posterior_csv(posterior, result.posterior(), prior);
  emit("posterior.csv", posterior.str());
  emit("generations.json", generations_json(result));
  for (const auto& m : result.summary.marginals) {
    std::ostringstream ss;
    write_marginal_csv(ss, m);
    emit(fs::path("marginals") / (safe_name(m.name) + ".csv"), ss.str());
  }
  for (const auto& j : result.summary.joints) {
    std::ostringstream ss;
    write_joint_csv(ss, j, result.summary);
    const auto& a = result.summary.marginals[j.first].name;
    const auto& b = result.summary.marginals[j.second].name;
    emit(fs::path("joint") / (safe_name(a) + "__" + safe_name(b) + ".csv"), ss.str());
  }

  // The echoed config embeds the model so the manifest alone reproduces the run.
  ExperimentConfig echo = config;
  echo.model_json = serialize_model(model);
  ojson manifest;
  manifest["manifest_version"] = 1;
  manifest["tool"] = "osctune";
  manifest["version"] = kVersion;
  manifest["compiler"] = __VERSION__;
  manifest["config"] = ojson::parse(config_to_json(echo));
  manifest["model_source"] = config.model_json.empty() ? config.model : "inline";
  manifest["master_seed"] = config.master_seed;
  manifest["parallelism"] = resolve_parallelism(config.parallelism);
  manifest["bounds"] = {{"max_time", config.effective_bounds().max_time},
                        {"max_events", config.effective_bounds().max_events}};
  manifest["runtime_seconds"] = result.runtime_seconds;
  manifest["simulations"] = result.simulations;
  manifest["termination"] = result.termination;
  manifest["aborted"] = result.aborted;
  manifest["kernel_floor_warnings"] = result.kernel_floor_warnings;
  manifest["outputs"] = outputs;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// Traces

void simulate_trace(const CrnModel& model, const SimulateRequest& request, std::ostream& out) {
  std::vector<double> theta(model.param_count(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& [name, value] : request.params) {
    const auto i = model.param_index(name);
    if (!i) throw ConfigError("unknown parameter '" + name + "'");
    theta[*i] = value;
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (std::isnan(theta[i])) throw ConfigError("parameter '" + model.params()[i] + "' needs a value");
  }
  if (!request.t_max && !request.n_events) throw ConfigError("simulate needs a time bound or an event count");

  if (request.n_events && *request.n_events == 0) {
    out << "time,reaction";
    for (std::size_t i = 0; i < model.species_count(); ++i) out << ',' << model.species_name(i);
    out << '\n';
    return;
  }
  SafetyBounds bounds;
  bounds.max_time = request.t_max.value_or(kInf);
  bounds.max_events = request.n_events.value_or(std::numeric_limits<std::uint64_t>::max());
  RngStream rng(request.seed);
  TraceRecorder recorder;
  sample_path(model, theta, model.initial_state(), rng, recorder, bounds);
  recorder.write_csv(out, model);
}

std::vector<TracePoint> read_trace_csv(std::istream& in, const std::string& species) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trace CSV is empty", 1, 1);
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "time" || header[1] != "reaction") {
    throw ParseError("trace CSV header must start with time,reaction", 1, 1);
  }
  std::size_t column = 0;
  for (std::size_t i = 2; i < header.size(); ++i) {
    if (header[i] == species) column = i;
  }
  if (column == 0) throw ParseError("trace CSV has no column '" + species + "'", 1, 1);

  std::vector<TracePoint> trace;
  std::size_t line_no = 1;
  double previous = -kInf;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()),
                       line_no, 1);
    }
    TracePoint p{};
    try {
      std::size_t used = 0;
      p.time = std::stod(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument("time");
      const long long v = std::stoll(cells[column], &used);
      if (used != cells[column].size()) throw std::invalid_argument("value");
      p.value = v;
    } catch (const std::exception&) {
      throw ParseError("malformed number", line_no, 1);
    }
    if (!(p.time >= previous)) throw ParseError("times must be non-decreasing", line_no, 1);
    previous = p.time;
    trace.push_back(p);
  }
  return trace;
}

std::string crossing_report_json(const CrossingAnalysis& a) {
  ojson root;
  auto groups = [](const std::vector<std::vector<double>>& gs) {
    ojson arr = ojson::array();
    for (const auto& g : gs) arr.push_back(g);
    return arr;
  };
  root["low_groups"] = groups(a.groups.low);
  root["high_groups"] = groups(a.groups.high);
  root["periods"] = a.periods;
  root["periods_available"] = a.periods_available;
  root["complete"] = a.complete;
  root["mean"] = a.periods.empty() ? ojson(nullptr) : ojson(a.mean);
  root["variance"] = a.periods.size() >= 2 ? ojson(a.variance) : ojson(nullptr);
  root["distance"] = json_number(a.distance);
  return root.dump(2) + "\n";
}

}  // namespace osctune
