#pragma once

// Experiment configuration, orchestration and artifact export.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "osctune/abc.hpp"
#include "osctune/crn.hpp"
#include "osctune/period.hpp"
#include "osctune/ssa.hpp"

namespace osctune {

inline constexpr const char* kVersion = "0.1.0";

enum class AlgorithmKind { Rejection, Smc };

struct ExperimentConfig {
  std::string name;
  std::string model;       // builtin name or path (relative paths resolve against base_dir)
  std::string model_json;  // inline model document; takes precedence over `model`
  std::filesystem::path base_dir;
  std::vector<std::pair<std::string, double>> fixed_params;
  std::vector<UniformPrior::Interval> prior;
  PeriodMeterConfig meter;
  AlgorithmKind algorithm = AlgorithmKind::Rejection;
  std::size_t particles = 100;
  double epsilon = 0.1;  // rejection tolerance
  double alpha = 0.5;
  double epsilon_target = 0.1;
  std::size_t max_generations = 20;
  std::uint64_t max_simulations = 0;  // rejection: total; SMC: per generation; 0 = unlimited
  std::uint64_t master_seed = 1;
  unsigned parallelism = 0;           // 0 = available cores
  std::string output_dir = "out";
  std::optional<SafetyBounds> bounds;  // default: meter.default_bounds()

  SafetyBounds effective_bounds() const { return bounds.value_or(meter.default_bounds()); }
};

/// Structural parse; throws ConfigError (or ParseError for bad JSON) on the
/// first structural problem. Cross-checks against the model are done by
/// validate_config.
ExperimentConfig parse_config(std::string_view json_text, std::filesystem::path base_dir = {});
/// Accepts a config file or a manifest.json written by run_experiment.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form; parse_config(config_to_json(c)) == c up to base_dir.
std::string config_to_json(const ExperimentConfig& config);

/// Loads a builtin model or a model file. Throws ConfigError/ParseError/ModelError.
CrnModel load_model(const std::string& spec, const std::filesystem::path& base_dir = {});
CrnModel load_model(const ExperimentConfig& config);

/// Every semantic problem with the config, empty when valid. Never simulates.
std::vector<std::string> validate_config(const ExperimentConfig& config);

struct ExperimentResult {
  std::vector<Generation> generations;
  std::string termination;  // "complete" for rejection, SmcTermination otherwise
  bool aborted = false;
  std::uint64_t simulations = 0;
  std::size_t kernel_floor_warnings = 0;
  double runtime_seconds = 0.0;
  PosteriorSummary summary;

  const Generation& posterior() const { return generations.back(); }
};

/// Runs the configured inference without writing anything.
ExperimentResult execute_experiment(const ExperimentConfig& config);

/// Runs the inference and writes posterior.csv, generations.json,
/// marginals/, joint/ and manifest.json under config.output_dir.
/// Throws ConfigError listing every validation failure before simulating.
ExperimentResult run_experiment(const ExperimentConfig& config);

void write_posterior_csv(std::ostream& out, const Generation& generation, const UniformPrior& prior);
std::string generations_json(const ExperimentResult& result);
void write_marginal_csv(std::ostream& out, const Marginal& marginal);
void write_joint_csv(std::ostream& out, const JointHistogram& joint, const PosteriorSummary& summary);

// ---------------------------------------------------------------------------
// Single trajectories

struct SimulateRequest {
  std::vector<std::pair<std::string, double>> params;  // must cover every model parameter
  std::optional<double> t_max;
  std::optional<std::uint64_t> n_events;
  std::uint64_t seed = 1;
};

/// Writes a trace CSV. With n_events = 0 only the header is written.
void simulate_trace(const CrnModel& model, const SimulateRequest& request, std::ostream& out);

/// Reads `species` from a trace CSV with header `time,reaction,<species...>`.
/// Throws ParseError on malformed input.
std::vector<TracePoint> read_trace_csv(std::istream& in, const std::string& species);

/// JSON report of the offline oracle.
std::string crossing_report_json(const CrossingAnalysis& analysis);

}  // namespace osctune
