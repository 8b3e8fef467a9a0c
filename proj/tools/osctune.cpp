// Command-line front end: run, simulate, analyze-trace, validate.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "osctune/error.hpp"
#include "osctune/experiment.hpp"

namespace {

using namespace osctune;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kAborted = 2;

std::pair<std::string, double> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected name=value, got '" + text + "'");
  std::size_t used = 0;
  const std::string rhs = text.substr(eq + 1);
  double value = 0.0;
  try {
    value = std::stod(rhs, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != rhs.size()) throw ConfigError("bad number in '" + text + "'");
  return {text.substr(0, eq), value};
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, std::optional<unsigned> parallelism,
            std::optional<std::string> out) {
  ExperimentConfig config = load_config(path);
  if (seed) config.master_seed = *seed;
  if (parallelism) config.parallelism = *parallelism;
  if (out) config.output_dir = *out;
  if (const auto diags = validate_config(config); !diags.empty()) {
    for (const auto& d : diags) std::cerr << "error: " << d << '\n';
    return kInvalid;
  }
  const auto result = run_experiment(config);
  const auto& post = result.posterior();
  std::cout << "termination: " << result.termination << '\n'
            << "particles: " << post.particles.size() << '\n'
            << "simulations: " << result.simulations << '\n'
            << "runtime_seconds: " << result.runtime_seconds << '\n';
  for (const auto& m : result.summary.marginals) {
    std::cout << m.name << ": mean " << m.mean << ", iqr [" << m.q25 << ", " << m.q75 << "]\n";
  }
  std::cout << "output: " << config.output_dir << '\n';
  if (result.aborted) {
    std::cerr << "simulation budget exhausted; partial results written\n";
    return kAborted;
  }
  return kOk;
}

int cmd_validate(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto root = nlohmann::json::parse(ss.str(), nullptr, false);
  const bool is_model = root.is_object() && root.contains("reactions");
  if (is_model) {
    const auto doc = parse_model_document(ss.str());
    const auto diags = validate_model(doc);
    for (const auto& d : diags) std::cerr << "error: " << d << '\n';
    if (!diags.empty()) return kInvalid;
    std::cout << "model ok: " << doc.species.size() << " species, " << doc.reactions.size() << " reactions\n";
    return kOk;
  }
  const auto config = load_config(path);
  const auto diags = validate_config(config);
  for (const auto& d : diags) std::cerr << "error: " << d << '\n';
  if (!diags.empty()) return kInvalid;
  std::cout << "config ok\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameter inference for noisy oscillators"};
  app.require_subcommand(1);

  std::string run_path;
  std::optional<std::uint64_t> run_seed;
  std::optional<unsigned> run_parallelism;
  std::optional<std::string> run_out;
  auto* run = app.add_subcommand("run", "Run an inference experiment from a config or manifest");
  run->add_option("config", run_path, "Experiment config (JSON) or manifest.json")->required();
  run->add_option("--seed", run_seed, "Override master_seed");
  run->add_option("--parallelism", run_parallelism, "Override worker count (0 = all cores)");
  run->add_option("--out", run_out, "Override output_dir");

  std::string sim_model;
  std::vector<std::string> sim_params;
  std::optional<double> sim_t_max;
  std::optional<std::uint64_t> sim_events;
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "Write one SSA trajectory as CSV");
  sim->add_option("--model", sim_model, "Builtin model name or model file")->required();
  sim->add_option("--param,-p", sim_params, "Parameter value, name=value (repeatable)");
  sim->add_option("--t-max", sim_t_max, "Simulated time horizon");
  sim->add_option("--events", sim_events, "Maximum number of events");
  sim->add_option("--seed", sim_seed, "Random seed");
  sim->add_option("--out,-o", sim_out, "Output file (default stdout)");

  std::string an_trace;
  std::string an_config;
  PeriodMeterConfig an_meter;
  std::string an_rule = "min";
  auto* an = app.add_subcommand("analyze-trace", "Offline period analysis of a trace CSV");
  an->add_option("trace", an_trace, "Trace CSV written by simulate")->required();
  an->add_option("--config", an_config, "Take the meter settings from an experiment config");
  an->add_option("--species", an_meter.species, "Observed species");
  an->add_option("--low,-L", an_meter.low, "Low threshold L");
  an->add_option("--high,-H", an_meter.high, "High threshold H");
  an->add_option("--periods,-N", an_meter.n_periods, "Number of periods");
  an->add_option("--target", an_meter.target, "Target period");
  an->add_option("--distance", an_rule, "Distance rule: min or max");

  std::string val_path;
  auto* val = app.add_subcommand("validate", "Check a config or model file without simulating");
  val->add_option("file", val_path, "Config or model JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(run_path, run_seed, run_parallelism, run_out);

    if (sim->parsed()) {
      const CrnModel model = load_model(sim_model);
      SimulateRequest req;
      for (const auto& p : sim_params) req.params.push_back(parse_assignment(p));
      req.t_max = sim_t_max;
      req.n_events = sim_events;
      req.seed = sim_seed;
      if (sim_out.empty()) {
        simulate_trace(model, req, std::cout);
      } else {
        std::ofstream out(sim_out, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + sim_out + "'");
        simulate_trace(model, req, out);
      }
      return kOk;
    }

    if (an->parsed()) {
      PeriodMeterConfig meter = an_meter;
      if (!an_config.empty()) {
        meter = load_config(an_config).meter;
      } else {
        meter.rule = distance_rule_from_string(an_rule);
      }
      meter.validate();
      std::ifstream in(an_trace, std::ios::binary);
      if (!in) throw ConfigError("cannot open '" + an_trace + "'");
      const auto trace = read_trace_csv(in, meter.species);
      std::cout << crossing_report_json(analyze_trace(trace, meter));
      return kOk;
    }

    if (val->parsed()) return cmd_validate(val_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kOk;
}
