#pragma once

// Likelihood-free inference over a scalar distance: rejection ABC and
// sequential Monte Carlo ABC.
//
// Every random draw comes from a stream derived from
// (master_seed, generation, particle, attempt), so results do not depend on
// the number of worker threads.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "osctune/crn.hpp"
#include "osctune/period.hpp"
#include "osctune/rng.hpp"

namespace osctune {

/// Independent uniform priors over the free parameters.
class UniformPrior {
 public:
  struct Interval {
    std::string name;
    double lower;
    double upper;
  };

  UniformPrior() = default;
  /// Throws ConfigError unless lower < upper for every interval.
  explicit UniformPrior(std::vector<Interval> intervals);

  std::size_t dimension() const noexcept { return intervals_.size(); }
  const std::vector<Interval>& intervals() const noexcept { return intervals_; }

  std::vector<double> sample(RngStream& rng) const;
  bool contains(std::span<const double> theta) const noexcept;
  double density(std::span<const double> theta) const noexcept;

 private:
  std::vector<Interval> intervals_;
};

/// Maps free-parameter vectors (prior order) to full model parameter vectors.
class ParameterSpace {
 public:
  /// Every model parameter must appear exactly once in either `fixed` or
  /// `prior`. Throws ConfigError otherwise.
  ParameterSpace(const CrnModel& model, const std::vector<std::pair<std::string, double>>& fixed, const UniformPrior& prior);

  std::vector<double> full(std::span<const double> free) const;

 private:
  std::vector<double> base_;
  std::vector<std::size_t> free_slots_;
};

/// d(theta, seed): +inf when the simulated path is rejected.
using DistanceFn = std::function<double(std::span<const double> free_theta, std::uint64_t seed)>;

DistanceFn make_period_distance(const PeriodMeter& meter, const ParameterSpace& space, SafetyBounds bounds);

struct Particle {
  std::vector<double> theta;
  double weight = 0.0;
  double distance = std::numeric_limits<double>::infinity();
};

struct Generation {
  std::size_t index = 0;
  double epsilon = std::numeric_limits<double>::infinity();  // tolerance that produced it
  std::vector<Particle> particles;
  std::uint64_t simulations = 0;
  std::uint64_t proposals = 0;  // includes proposals outside the prior
  double acceptance_rate = 0.0;  // accepted / simulations
};

/// Lower empirical quantile: the ceil(alpha * n)-th smallest value, +inf
/// sorting last.
double quantile(double alpha, std::span<const double> distances);

/// Smallest x whose cumulative normalised weight reaches q.
double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q);

// ---------------------------------------------------------------------------
// Rejection

struct RejectionOptions {
  std::size_t particles = 100;
  double epsilon = 0.1;
  std::uint64_t master_seed = 1;
  unsigned parallelism = 1;          // 0 = hardware concurrency
  std::uint64_t max_simulations = 0;  // 0 = unlimited
};

struct RejectionResult {
  Generation generation;  // only filled slots when aborted
  bool aborted = false;
};

RejectionResult abc_rejection(const UniformPrior& prior, const DistanceFn& distance, const RejectionOptions& opts);

// ---------------------------------------------------------------------------
// Sequential Monte Carlo

struct GaussianKernel {
  std::vector<double> sigma;
  bool degenerate = false;  // some sigma hit the floor
};

/// sigma_i^2 = 2 * weighted variance of parameter i, floored at
/// 1e-12 * prior width.
GaussianKernel fit_kernel(const Generation& previous, const UniformPrior& prior);
std::vector<double> perturb(const GaussianKernel& kernel, std::span<const double> center, RngStream& rng);
double kernel_density(const GaussianKernel& kernel, std::span<const double> theta, std::span<const double> center);

/// prior(theta) / sum_j w_j K(theta | theta_j).
double smc_weight(std::span<const double> theta, const Generation& previous, const GaussianKernel& kernel,
                  const UniformPrior& prior);

struct SmcOptions {
  std::size_t particles = 100;
  double alpha = 0.5;
  double epsilon_target = 0.1;
  std::size_t max_generations = 20;  // SMC generations after the prior generation
  std::uint64_t master_seed = 1;
  unsigned parallelism = 1;
  std::uint64_t max_simulations_per_generation = 0;  // 0 = unlimited
  double stagnation = 1e-3;
};

enum class SmcTermination { TargetReached, Stagnated, MaxGenerations, NoFiniteDistances, BudgetExhausted };

const char* to_string(SmcTermination t) noexcept;

struct SmcResult {
  std::vector<Generation> generations;  // generation 0 is the prior sample
  SmcTermination termination = SmcTermination::MaxGenerations;
  bool aborted = false;
  std::size_t kernel_floor_warnings = 0;

  const Generation& final() const { return generations.back(); }
};

SmcResult abc_smc(const UniformPrior& prior, const DistanceFn& distance, const SmcOptions& opts);

// ---------------------------------------------------------------------------
// Posterior summaries

struct Marginal {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> mass;  // per bin
  double mean = 0.0;
  double variance = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct JointHistogram {
  std::size_t first = 0;
  std::size_t second = 0;
  std::size_t bins = 0;
  std::vector<double> mass;  // row-major, first parameter indexes rows
};

struct Correlation {
  std::size_t first = 0;
  std::size_t second = 0;
  double value = 0.0;
  bool defined = false;
};

struct PosteriorSummary {
  std::vector<Marginal> marginals;
  std::vector<JointHistogram> joints;
  std::vector<Correlation> correlations;
};

/// Bin index of `x` in [lower, upper] split into `bins` equal cells; values
/// equal to `upper` land in the last cell, values outside map to nullopt.
std::optional<std::size_t> bin_of(double x, double lower, double upper, std::size_t bins) noexcept;

PosteriorSummary posterior_summary(const Generation& generation, const UniformPrior& prior, std::size_t bins = 50);

}  // namespace osctune
