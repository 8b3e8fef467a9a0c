#include "osctune/abc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "osctune/error.hpp"

namespace osctune {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Stream keys: (generation, particle, attempt, purpose).
constexpr std::uint64_t kDrawStream = 0;
constexpr std::uint64_t kSimStream = 1;

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

/// Runs job(i) for i in [0, n) on `workers` threads; rethrows the first
/// exception after all workers have joined.
template <typename Job>
void parallel_for(std::size_t n, unsigned workers, Job&& job) {
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

class SimulationBudget {
 public:
  explicit SimulationBudget(std::uint64_t limit) : limit_(limit) {}
  // Reserves one simulation; false once the budget is spent.
  bool take() {
    const auto used = count_.fetch_add(1) + 1;
    if (limit_ != 0 && used > limit_) {
      exhausted_ = true;
      return false;
    }
    return true;
  }
  bool exhausted() const { return exhausted_.load(); }

 private:
  std::uint64_t limit_;
  std::atomic<std::uint64_t> count_{0};
  std::atomic<bool> exhausted_{false};
};

void normalise(std::vector<Particle>& particles) {
  double sum = 0.0;
  for (const auto& p : particles) sum += p.weight;
  if (!(sum > 0.0)) throw SimulationError("all particle weights are zero");
  for (auto& p : particles) p.weight /= sum;
}

std::size_t resample_index(const std::vector<Particle>& particles, double u) {
  const double target = u;  // weights are normalised
  double cumulative = 0.0;
  for (std::size_t j = 0; j < particles.size(); ++j) {
    cumulative += particles[j].weight;
    if (cumulative > target) return j;
  }
  for (std::size_t j = particles.size(); j-- > 0;) {
    if (particles[j].weight > 0.0) return j;
  }
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Prior and parameter space

UniformPrior::UniformPrior(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  for (const auto& iv : intervals_) {
    if (!(iv.lower < iv.upper) || !std::isfinite(iv.lower) || !std::isfinite(iv.upper)) {
      throw ConfigError("prior for '" + iv.name + "' needs finite lower < upper");
    }
  }
}

std::vector<double> UniformPrior::sample(RngStream& rng) const {
  std::vector<double> theta(intervals_.size());
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(intervals_[i].lower, intervals_[i].upper);
  return theta;
}

bool UniformPrior::contains(std::span<const double> theta) const noexcept {
  if (theta.size() != intervals_.size()) return false;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!(theta[i] >= intervals_[i].lower && theta[i] <= intervals_[i].upper)) return false;
  }
  return true;
}

double UniformPrior::density(std::span<const double> theta) const noexcept {
  if (!contains(theta)) return 0.0;
  double d = 1.0;
  for (const auto& iv : intervals_) d /= (iv.upper - iv.lower);
  return d;
}

ParameterSpace::ParameterSpace(const CrnModel& model, const std::vector<std::pair<std::string, double>>& fixed,
                               const UniformPrior& prior) {
  const auto n = model.param_count();
  base_.assign(n, 0.0);
  std::vector<int> seen(n, 0);
  for (const auto& [name, value] : fixed) {
    const auto i = model.param_index(name);
    if (!i) throw ConfigError("fixed parameter '" + name + "' is not a model parameter");
    base_[*i] = value;
    ++seen[*i];
  }
  for (const auto& iv : prior.intervals()) {
    const auto i = model.param_index(iv.name);
    if (!i) throw ConfigError("prior parameter '" + iv.name + "' is not a model parameter");
    free_slots_.push_back(*i);
    ++seen[*i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i] != 1) {
      throw ConfigError("parameter '" + model.params()[i] + "' must be either fixed or given a prior exactly once");
    }
  }
}

std::vector<double> ParameterSpace::full(std::span<const double> free) const {
  std::vector<double> theta = base_;
  for (std::size_t k = 0; k < free_slots_.size(); ++k) theta[free_slots_[k]] = free[k];
  return theta;
}

DistanceFn make_period_distance(const PeriodMeter& meter, const ParameterSpace& space, SafetyBounds bounds) {
  return [&meter, &space, bounds](std::span<const double> free, std::uint64_t seed) {
    const auto theta = space.full(free);
    return meter.measure(theta, seed, bounds);
  };
}

// ---------------------------------------------------------------------------
// Quantiles

double quantile(double alpha, std::span<const double> distances) {
  if (distances.empty()) throw ConfigError("quantile of an empty list");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("quantile level must lie in (0, 1)");
  std::vector<double> sorted(distances.begin(), distances.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = std::ceil(alpha * static_cast<double>(sorted.size()) - 1e-9);
  const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(rank), 1, sorted.size());
  return sorted[k - 1];
}

double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double cumulative = 0.0;
  for (const auto i : order) {
    cumulative += weights[i] / total;
    if (cumulative >= q - 1e-12) return values[i];
  }
  return values[order.back()];
}

// ---------------------------------------------------------------------------
// Rejection

RejectionResult abc_rejection(const UniformPrior& prior, const DistanceFn& distance, const RejectionOptions& opts) {
  if (opts.particles == 0) throw ConfigError("rejection ABC needs at least one particle");
  if (!(opts.epsilon > 0.0)) throw ConfigError("rejection ABC needs epsilon > 0");

  const std::size_t n = opts.particles;
  std::vector<Particle> slots(n);
  std::vector<char> filled(n, 0);
  std::vector<std::uint64_t> simulations(n, 0);
  SimulationBudget budget(opts.max_simulations);

  parallel_for(n, worker_count(opts.parallelism, n), [&](std::size_t i) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (!budget.take()) return;
      auto draw = RngStream::child(opts.master_seed, {0, i, attempt, kDrawStream});
      auto theta = prior.sample(draw);
      const double d = distance(theta, RngStream::derive_seed(opts.master_seed, {0, i, attempt, kSimStream}));
      ++simulations[i];
      if (d <= opts.epsilon) {
        slots[i] = Particle{std::move(theta), 0.0, d};
        filled[i] = 1;
        return;
      }
    }
  });

  RejectionResult result;
  result.aborted = budget.exhausted();
  auto& gen = result.generation;
  gen.index = 0;
  gen.epsilon = opts.epsilon;
  for (std::size_t i = 0; i < n; ++i) {
    gen.simulations += simulations[i];
    if (filled[i]) gen.particles.push_back(std::move(slots[i]));
  }
  gen.proposals = gen.simulations;
  for (auto& p : gen.particles) p.weight = 1.0 / static_cast<double>(gen.particles.size());
  gen.acceptance_rate = gen.simulations ? static_cast<double>(gen.particles.size()) / static_cast<double>(gen.simulations) : 0.0;
  return result;
}

// ---------------------------------------------------------------------------
// SMC

GaussianKernel fit_kernel(const Generation& previous, const UniformPrior& prior) {
  GaussianKernel kernel;
  const auto dim = prior.dimension();
  kernel.sigma.assign(dim, 0.0);
  for (std::size_t k = 0; k < dim; ++k) {
    double wsum = 0.0;
    double mean = 0.0;
    for (const auto& p : previous.particles) {
      wsum += p.weight;
      mean += p.weight * p.theta[k];
    }
    mean /= wsum;
    double var = 0.0;
    for (const auto& p : previous.particles) var += p.weight * (p.theta[k] - mean) * (p.theta[k] - mean);
    var /= wsum;
    const auto& iv = prior.intervals()[k];
    const double floor = 1e-12 * (iv.upper - iv.lower);
    double sigma2 = 2.0 * var;
    if (!(sigma2 > floor)) {
      sigma2 = floor;
      kernel.degenerate = true;
    }
    kernel.sigma[k] = std::sqrt(sigma2);
  }
  return kernel;
}

std::vector<double> perturb(const GaussianKernel& kernel, std::span<const double> center, RngStream& rng) {
  std::vector<double> theta(center.begin(), center.end());
  for (std::size_t k = 0; k < theta.size(); ++k) theta[k] += kernel.sigma[k] * rng.normal();
  return theta;
}

double kernel_density(const GaussianKernel& kernel, std::span<const double> theta, std::span<const double> center) {
  static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * M_PI);
  double d = 1.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double z = (theta[k] - center[k]) / kernel.sigma[k];
    d *= inv_sqrt_2pi / kernel.sigma[k] * std::exp(-0.5 * z * z);
  }
  return d;
}

double smc_weight(std::span<const double> theta, const Generation& previous, const GaussianKernel& kernel,
                  const UniformPrior& prior) {
  const double p = prior.density(theta);
  if (p == 0.0) return 0.0;
  double denom = 0.0;
  for (const auto& q : previous.particles) denom += q.weight * kernel_density(kernel, theta, q.theta);
  if (!(denom > 0.0)) throw SimulationError("SMC weight denominator underflowed to zero");
  return p / denom;
}

const char* to_string(SmcTermination t) noexcept {
  switch (t) {
    case SmcTermination::TargetReached: return "target_reached";
    case SmcTermination::Stagnated: return "stagnated";
    case SmcTermination::MaxGenerations: return "max_generations";
    case SmcTermination::NoFiniteDistances: return "no_finite_distances";
    case SmcTermination::BudgetExhausted: return "budget_exhausted";
  }
  return "unknown";
}

SmcResult abc_smc(const UniformPrior& prior, const DistanceFn& distance, const SmcOptions& opts) {
  if (opts.particles < 2) throw ConfigError("SMC ABC needs at least two particles");
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw ConfigError("SMC ABC needs 0 < alpha < 1");
  if (!(opts.epsilon_target >= 0.0)) throw ConfigError("SMC ABC needs epsilon_target >= 0");

  const std::size_t n = opts.particles;
  const unsigned workers = worker_count(opts.parallelism, n);
  SmcResult result;

  // Generation 0: one simulation per prior draw.
  {
    Generation gen0;
    gen0.index = 0;
    gen0.particles.resize(n);
    parallel_for(n, workers, [&](std::size_t i) {
      auto draw = RngStream::child(opts.master_seed, {0, i, 0, kDrawStream});
      auto theta = prior.sample(draw);
      const double d = distance(theta, RngStream::derive_seed(opts.master_seed, {0, i, 0, kSimStream}));
      gen0.particles[i] = Particle{std::move(theta), 1.0 / static_cast<double>(n), d};
    });
    gen0.simulations = n;
    gen0.proposals = n;
    std::size_t accepted = 0;
    for (const auto& p : gen0.particles) accepted += std::isfinite(p.distance) ? 1 : 0;
    gen0.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(n);
    result.generations.push_back(std::move(gen0));
  }

  auto next_epsilon = [&](const Generation& g) {
    std::vector<double> d;
    d.reserve(g.particles.size());
    for (const auto& p : g.particles) d.push_back(p.distance);
    return quantile(opts.alpha, d);
  };

  double epsilon = next_epsilon(result.generations.back());
  if (!std::isfinite(epsilon)) {
    result.termination = SmcTermination::NoFiniteDistances;
    return result;
  }
  result.termination = SmcTermination::MaxGenerations;

  for (std::size_t m = 1; m <= opts.max_generations; ++m) {
    epsilon = std::max(epsilon, opts.epsilon_target);
    const Generation& prev = result.generations.back();
    const GaussianKernel kernel = fit_kernel(prev, prior);
    if (kernel.degenerate) ++result.kernel_floor_warnings;

    Generation gen;
    gen.index = m;
    gen.epsilon = epsilon;
    std::vector<Particle> slots(n);
    std::vector<char> filled(n, 0);
    std::vector<std::uint64_t> sims(n, 0);
    std::vector<std::uint64_t> proposals(n, 0);
    SimulationBudget budget(opts.max_simulations_per_generation);

    parallel_for(n, workers, [&](std::size_t i) {
      for (std::uint64_t attempt = 0;; ++attempt) {
        auto rng = RngStream::child(opts.master_seed, {m, i, attempt, kDrawStream});
        const auto& parent = prev.particles[resample_index(prev.particles, rng.uniform())];
        auto theta = perturb(kernel, parent.theta, rng);
        ++proposals[i];
        if (prior.density(theta) == 0.0) continue;
        if (!budget.take()) return;
        const double d = distance(theta, RngStream::derive_seed(opts.master_seed, {m, i, attempt, kSimStream}));
        ++sims[i];
        if (d <= epsilon) {
          slots[i] = Particle{std::move(theta), 0.0, d};
          filled[i] = 1;
          return;
        }
      }
    });

    for (std::size_t i = 0; i < n; ++i) {
      gen.simulations += sims[i];
      gen.proposals += proposals[i];
    }
    if (budget.exhausted()) {
      for (std::size_t i = 0; i < n; ++i) {
        if (filled[i]) gen.particles.push_back(std::move(slots[i]));
      }
      for (auto& p : gen.particles) p.weight = smc_weight(p.theta, prev, kernel, prior);
      if (!gen.particles.empty()) normalise(gen.particles);
      gen.acceptance_rate = gen.simulations ? static_cast<double>(gen.particles.size()) / static_cast<double>(gen.simulations) : 0.0;
      result.generations.push_back(std::move(gen));
      result.aborted = true;
      result.termination = SmcTermination::BudgetExhausted;
      return result;
    }

    gen.particles = std::move(slots);
    std::vector<double> weights(n);
    parallel_for(n, workers, [&](std::size_t i) { weights[i] = smc_weight(gen.particles[i].theta, prev, kernel, prior); });
    for (std::size_t i = 0; i < n; ++i) gen.particles[i].weight = weights[i];
    normalise(gen.particles);
    gen.acceptance_rate = static_cast<double>(n) / static_cast<double>(gen.simulations);
    result.generations.push_back(std::move(gen));

    if (epsilon <= opts.epsilon_target) {
      result.termination = SmcTermination::TargetReached;
      return result;
    }
    const double proposed = next_epsilon(result.generations.back());
    if ((epsilon - proposed) / epsilon < opts.stagnation) {
      result.termination = SmcTermination::Stagnated;
      return result;
    }
    epsilon = proposed;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Summaries

std::optional<std::size_t> bin_of(double x, double lower, double upper, std::size_t bins) noexcept {
  if (!(x >= lower && x <= upper) || bins == 0) return std::nullopt;
  const auto b = static_cast<std::size_t>(std::floor((x - lower) / (upper - lower) * static_cast<double>(bins)));
  return std::min(b, bins - 1);
}

PosteriorSummary posterior_summary(const Generation& generation, const UniformPrior& prior, std::size_t bins) {
  PosteriorSummary summary;
  const auto dim = prior.dimension();
  const auto& ps = generation.particles;
  double wsum = 0.0;
  for (const auto& p : ps) wsum += p.weight;
  if (!(wsum > 0.0)) wsum = 1.0;

  std::vector<double> weights;
  for (const auto& p : ps) weights.push_back(p.weight / wsum);

  for (std::size_t k = 0; k < dim; ++k) {
    const auto& iv = prior.intervals()[k];
    Marginal m;
    m.name = iv.name;
    m.lower = iv.lower;
    m.upper = iv.upper;
    m.mass.assign(bins, 0.0);
    std::vector<double> values;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const double x = ps[i].theta[k];
      values.push_back(x);
      m.mean += weights[i] * x;
      if (const auto b = bin_of(x, iv.lower, iv.upper, bins)) m.mass[*b] += weights[i];
    }
    for (std::size_t i = 0; i < ps.size(); ++i) m.variance += weights[i] * (ps[i].theta[k] - m.mean) * (ps[i].theta[k] - m.mean);
    if (!ps.empty()) {
      m.q25 = weighted_quantile(values, weights, 0.25);
      m.q75 = weighted_quantile(values, weights, 0.75);
    }
    summary.marginals.push_back(std::move(m));
  }

  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = a + 1; b < dim; ++b) {
      const auto& ia = prior.intervals()[a];
      const auto& ib = prior.intervals()[b];
      JointHistogram joint{a, b, bins, std::vector<double>(bins * bins, 0.0)};
      double cov = 0.0;
      const double ma = summary.marginals[a].mean;
      const double mb = summary.marginals[b].mean;
      for (std::size_t i = 0; i < ps.size(); ++i) {
        const auto ba = bin_of(ps[i].theta[a], ia.lower, ia.upper, bins);
        const auto bb = bin_of(ps[i].theta[b], ib.lower, ib.upper, bins);
        if (ba && bb) joint.mass[*ba * bins + *bb] += weights[i];
        cov += weights[i] * (ps[i].theta[a] - ma) * (ps[i].theta[b] - mb);
      }
      summary.joints.push_back(std::move(joint));
      Correlation c{a, b, 0.0, false};
      const double va = summary.marginals[a].variance;
      const double vb = summary.marginals[b].variance;
      if (va > 0.0 && vb > 0.0) {
        c.value = std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
        c.defined = true;
      }
      summary.correlations.push_back(c);
    }
  }
  return summary;
}

}  // namespace osctune
