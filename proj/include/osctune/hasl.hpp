#pragma once

// HASL target expressions over accepted product runs:
//
//   Z ::= AVG(Y) | Z + Z | Z * Z | PDF(Y, step, start, stop)
//       | CDF(Y, step, start, stop) | PROB()
//   Y ::= c | Y + Y | Y * Y | Y / Y | last(y) | min(y) | max(y)
//   y ::= c | x | y + y | y * y | y / y
//
// Subtraction and unary minus are accepted wherever + is.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "osctune/expr.hpp"
#include "osctune/lha.hpp"

namespace osctune {

/// Path random variable Y.
class PathExpr {
 public:
  static PathExpr parse(std::string_view text, const BoundLha& lha);

  /// Registers the compound min()/max() arguments that need online tracking.
  void attach(Synchronizer& sync);

  /// Requires an accepted run. Throws EvalError on division by zero, on an
  /// unaccepted run, or when a compound aggregate was not tracked.
  double eval(const RunResult& run) const;

  const std::string& text() const noexcept { return text_; }

 private:
  struct Aggregate {
    enum class Kind { Last, Min, Max } kind;
    std::int64_t variable = -1;  // plain variable argument
    expr::Program program;       // compound argument
    std::size_t tracked = 0;     // index assigned by attach()
  };

  double eval_node(const expr::Node& node, const RunResult& run, std::size_t& next_aggregate) const;
  void collect(const expr::Node& node, const BoundLha& lha);

  std::string text_;
  expr::Node root_;
  std::vector<Aggregate> aggregates_;  // in pre-order of appearance
};

double eval_path_expr(const PathExpr& y, const RunResult& run);

struct HistogramBin {
  double low;
  double high;
  double value;
};

struct EstimateReport {
  std::string kind;  // AVG, PROB, PDF, CDF, SUM, PRODUCT
  bool defined = false;
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t paths = 0;
  std::size_t accepted = 0;
  std::vector<HistogramBin> bins;
  std::string note;
};

/// Target expression Z.
class TargetExpr {
 public:
  static TargetExpr parse(std::string_view text, const BoundLha& lha);

  void attach(Synchronizer& sync);
  EstimateReport evaluate(std::span<const RunResult> runs) const;

 private:
  enum class Kind { Avg, Prob, Pdf, Cdf, Sum, Product };
  Kind kind_ = Kind::Prob;
  std::vector<TargetExpr> children_;
  std::vector<PathExpr> y_;  // zero or one element
  double step_ = 0.0;
  double start_ = 0.0;
  double stop_ = 0.0;

  static TargetExpr from_node(const expr::Node& node, const BoundLha& lha);
};

/// Student-t 95% confidence half width for a sample of size n and standard
/// deviation sd. Infinite for n < 2.
double student_t_half_width(double sd, std::size_t n);

/// Wilson score 95% interval for k successes in n trials.
std::pair<double, double> wilson_interval(std::size_t k, std::size_t n);

EstimateReport estimate(TargetExpr z, const BoundLha& lha, const CrnModel& model, std::span<const double> theta,
                        std::size_t n_paths, std::uint64_t seed, const SafetyBounds& bounds = {});

}  // namespace osctune
