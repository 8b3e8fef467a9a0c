#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <map>

#include "osctune/error.hpp"
#include "osctune/experiment.hpp"
#include "osctune/period.hpp"

namespace py = pybind11;
using namespace osctune;

namespace {

std::vector<double> theta_from(const CrnModel& model, const std::map<std::string, double>& params) {
  std::vector<double> theta(model.param_count(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& [name, value] : params) {
    const auto i = model.param_index(name);
    if (!i) throw ConfigError("unknown parameter '" + name + "'");
    theta[*i] = value;
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (theta[i] != theta[i]) throw ConfigError("parameter '" + model.params()[i] + "' needs a value");
  }
  return theta;
}

PeriodMeterConfig meter_from(const std::string& species, std::int64_t low, std::int64_t high, std::size_t n_periods,
                             double target, const std::string& rule) {
  PeriodMeterConfig cfg;
  cfg.species = species;
  cfg.low = low;
  cfg.high = high;
  cfg.n_periods = n_periods;
  cfg.target = target;
  cfg.rule = distance_rule_from_string(rule);
  cfg.validate();
  return cfg;
}

py::dict simulate(const std::string& model_spec, const std::map<std::string, double>& params,
                  std::optional<double> t_max, std::optional<std::uint64_t> n_events, std::uint64_t seed) {
  const auto model = load_model(model_spec);
  const auto theta = theta_from(model, params);
  if (!t_max && !n_events) throw ConfigError("simulate needs t_max or n_events");
  SafetyBounds bounds;
  bounds.max_time = t_max.value_or(std::numeric_limits<double>::infinity());
  bounds.max_events = n_events.value_or(std::numeric_limits<std::uint64_t>::max());
  TraceRecorder rec;
  {
    py::gil_scoped_release release;
    RngStream rng(seed);
    sample_path(model, theta, model.initial_state(), rng, rec, bounds);
  }
  std::vector<std::string> species;
  for (std::size_t i = 0; i < model.species_count(); ++i) species.push_back(model.species_name(i));
  std::vector<double> times{0.0};
  std::vector<std::string> reactions{""};
  std::vector<std::vector<std::int64_t>> states{rec.initial().populations};
  double t = 0.0;
  for (const auto& e : rec.events()) {
    t += e.sojourn;
    times.push_back(t);
    reactions.push_back(model.reaction(e.reaction).name);
    states.push_back(e.new_state.populations);
  }
  py::dict out;
  out["species"] = species;
  out["time"] = times;
  out["reaction"] = reactions;
  out["state"] = states;
  return out;
}

py::dict analysis_dict(const CrossingAnalysis& a) {
  py::dict out;
  out["low_groups"] = a.groups.low;
  out["high_groups"] = a.groups.high;
  out["periods"] = a.periods;
  out["complete"] = a.complete;
  out["mean"] = a.mean;
  out["variance"] = a.variance;
  out["distance"] = a.distance;
  return out;
}

py::dict result_dict(const ExperimentConfig& config, const ExperimentResult& r) {
  py::list particles;
  for (const auto& p : r.posterior().particles) {
    py::dict d;
    py::dict theta;
    for (std::size_t i = 0; i < config.prior.size(); ++i) theta[py::str(config.prior[i].name)] = p.theta[i];
    d["theta"] = theta;
    d["weight"] = p.weight;
    d["distance"] = p.distance;
    particles.append(d);
  }
  py::list epsilons;
  for (const auto& g : r.generations) epsilons.append(g.epsilon);
  py::dict out;
  out["particles"] = particles;
  out["epsilons"] = epsilons;
  out["termination"] = r.termination;
  out["aborted"] = r.aborted;
  out["simulations"] = r.simulations;
  return out;
}

ExperimentConfig config_from(const std::string& text_or_path) {
  const auto first = text_or_path.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text_or_path[first] == '{') return parse_config(text_or_path);
  return load_config(text_or_path);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stochastic simulation, period metering and ABC inference for oscillating reaction networks";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  m.def("builtin_models", &builtin_model_names);

  m.def("simulate", &simulate, py::arg("model"), py::arg("params"), py::arg("t_max") = py::none(),
        py::arg("n_events") = py::none(), py::arg("seed") = 1,
        "Simulate one trajectory; returns species, time, reaction and state columns.");

  m.def(
      "measure_distance",
      [](const std::string& model_spec, const std::map<std::string, double>& params, const std::string& species,
         std::int64_t low, std::int64_t high, std::size_t n_periods, double target, const std::string& rule,
         std::uint64_t seed, std::optional<double> max_time, std::optional<double> reject_above) {
        const auto model = load_model(model_spec);
        const auto theta = theta_from(model, params);
        const auto cfg = meter_from(species, low, high, n_periods, target, rule);
        auto bounds = cfg.default_bounds();
        if (max_time) bounds.max_time = *max_time;
        py::gil_scoped_release release;
        const PeriodMeter meter(model, cfg, reject_above.value_or(std::numeric_limits<double>::infinity()));
        return meter.measure(theta, seed, bounds);
      },
      py::arg("model"), py::arg("params"), py::arg("species"), py::arg("low"), py::arg("high"),
      py::arg("n_periods"), py::arg("target"), py::arg("rule") = "min", py::arg("seed") = 1,
      py::arg("max_time") = py::none(), py::arg("reject_above") = py::none());

  m.def(
      "period_distance",
      [](double mean, double variance, double target, const std::string& rule) {
        return period_distance(mean, variance, target, distance_rule_from_string(rule));
      },
      py::arg("mean"), py::arg("variance"), py::arg("target"), py::arg("rule") = "min");

  m.def(
      "analyze_trace",
      [](const std::vector<double>& times, const std::vector<std::int64_t>& values, std::int64_t low,
         std::int64_t high, std::size_t n_periods, double target, const std::string& rule) {
        if (times.size() != values.size()) throw ConfigError("times and values differ in length");
        std::vector<TracePoint> trace;
        for (std::size_t i = 0; i < times.size(); ++i) trace.push_back({times[i], values[i]});
        return analysis_dict(analyze_trace(trace, meter_from("X", low, high, n_periods, target, rule)));
      },
      py::arg("times"), py::arg("values"), py::arg("low"), py::arg("high"), py::arg("n_periods"),
      py::arg("target"), py::arg("rule") = "min");

  m.def(
      "validate_config", [](const std::string& text_or_path) { return validate_config(config_from(text_or_path)); },
      py::arg("config"), "Config JSON text or path; returns the list of problems.");

  m.def(
      "run_experiment",
      [](const std::string& text_or_path, std::optional<std::string> output_dir) {
        auto config = config_from(text_or_path);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          if (output_dir) {
            config.output_dir = *output_dir;
            r = run_experiment(config);
          } else {
            r = execute_experiment(config);
          }
        }
        return result_dict(config, r);
      },
      py::arg("config"), py::arg("output_dir") = py::none(),
      "Runs inference; writes artifacts only when output_dir is given.");
}
