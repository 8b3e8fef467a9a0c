#include "osctune/hasl.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <tuple>

#include "osctune/error.hpp"

namespace osctune {

namespace {

using expr::Node;
using expr::NodeKind;

constexpr double kZ95 = 1.959963984540054;

[[noreturn]] void bad(const Node& node, const std::string& msg) {
  throw ModelError("HASL: " + msg + " (column " + std::to_string(node.column) + ")");
}

bool is_arith(NodeKind k) {
  return k == NodeKind::Add || k == NodeKind::Sub || k == NodeKind::Mul || k == NodeKind::Div || k == NodeKind::Neg;
}

double apply(NodeKind kind, double a, double b) {
  switch (kind) {
    case NodeKind::Add: return a + b;
    case NodeKind::Sub: return a - b;
    case NodeKind::Mul: return a * b;
    case NodeKind::Div:
      if (b == 0.0) throw EvalError("division by zero in path expression");
      return a / b;
    default: return 0.0;
  }
}

double number_arg(const Node& node, const std::string& what) {
  if (node.kind == NodeKind::Number) return node.number;
  if (node.kind == NodeKind::Neg && node.args[0].kind == NodeKind::Number) return -node.args[0].number;
  bad(node, what + " must be a numeric literal");
}

void check_state_expr(const Node& node, const BoundLha& lha) {
  switch (node.kind) {
    case NodeKind::Number: return;
    case NodeKind::Ident:
      if (!lha.variable_index(node.name)) bad(node, "'" + node.name + "' is not an automaton variable");
      return;
    default:
      if (!is_arith(node.kind)) bad(node, "only arithmetic over automaton variables is allowed inside last/min/max");
      for (const auto& a : node.args) check_state_expr(a, lha);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Y

void PathExpr::collect(const Node& node, const BoundLha& lha) {
  switch (node.kind) {
    case NodeKind::Number: return;
    case NodeKind::Call: {
      Aggregate agg;
      if (node.name == "last") agg.kind = Aggregate::Kind::Last;
      else if (node.name == "min") agg.kind = Aggregate::Kind::Min;
      else if (node.name == "max") agg.kind = Aggregate::Kind::Max;
      else bad(node, "unknown path operator '" + node.name + "'");
      if (node.args.size() != 1) bad(node, node.name + "() takes one argument");
      const Node& arg = node.args[0];
      check_state_expr(arg, lha);
      if (arg.kind == NodeKind::Ident) agg.variable = static_cast<std::int64_t>(*lha.variable_index(arg.name));
      else agg.program = expr::Program::compile(arg, lha.resolver());
      aggregates_.push_back(std::move(agg));
      return;
    }
    case NodeKind::Ident:
      bad(node, "variable '" + node.name + "' must be wrapped in last(), min() or max()");
    default:
      if (!is_arith(node.kind)) bad(node, "unsupported operator in path expression");
      for (const auto& a : node.args) collect(a, lha);
  }
}

PathExpr PathExpr::parse(std::string_view text, const BoundLha& lha) {
  PathExpr y;
  y.text_ = std::string(text);
  y.root_ = expr::parse(text);
  y.collect(y.root_, lha);
  return y;
}

void PathExpr::attach(Synchronizer& sync) {
  for (auto& agg : aggregates_) {
    if (agg.variable < 0 && agg.kind != Aggregate::Kind::Last) agg.tracked = sync.track(agg.program);
  }
}

double PathExpr::eval_node(const Node& node, const RunResult& run, std::size_t& next) const {
  switch (node.kind) {
    case NodeKind::Number: return node.number;
    case NodeKind::Neg: return -eval_node(node.args[0], run, next);
    case NodeKind::Call: {
      const auto& agg = aggregates_[next++];
      if (agg.variable >= 0) {
        const auto i = static_cast<std::size_t>(agg.variable);
        switch (agg.kind) {
          case Aggregate::Kind::Last: return run.last[i];
          case Aggregate::Kind::Min: return run.min[i];
          case Aggregate::Kind::Max: return run.max[i];
        }
      }
      if (agg.kind == Aggregate::Kind::Last) return agg.program.eval({run.last, {}, {}});
      if (agg.tracked >= run.tracked_min.size()) throw EvalError("path aggregate was not tracked during the run");
      return agg.kind == Aggregate::Kind::Min ? run.tracked_min[agg.tracked] : run.tracked_max[agg.tracked];
    }
    default: {
      const double a = eval_node(node.args[0], run, next);
      const double b = eval_node(node.args[1], run, next);
      return apply(node.kind, a, b);
    }
  }
}

double PathExpr::eval(const RunResult& run) const {
  if (!run.accepted) throw EvalError("path expression evaluated on a rejected run");
  std::size_t next = 0;
  return eval_node(root_, run, next);
}

double eval_path_expr(const PathExpr& y, const RunResult& run) { return y.eval(run); }

// ---------------------------------------------------------------------------
// Z

TargetExpr TargetExpr::from_node(const Node& node, const BoundLha& lha) {
  TargetExpr z;
  if (node.kind == NodeKind::Add || node.kind == NodeKind::Mul) {
    z.kind_ = node.kind == NodeKind::Add ? Kind::Sum : Kind::Product;
    z.children_.push_back(from_node(node.args[0], lha));
    z.children_.push_back(from_node(node.args[1], lha));
    for (const auto& c : z.children_) {
      if (c.kind_ == Kind::Pdf || c.kind_ == Kind::Cdf) bad(node, "PDF/CDF cannot be combined arithmetically");
    }
    return z;
  }
  if (node.kind != NodeKind::Call) bad(node, "expected AVG, PDF, CDF or PROB");
  auto y_from = [&](const Node& arg) {
    PathExpr y = PathExpr::parse(expr::to_string(arg), lha);
    z.y_.push_back(std::move(y));
  };
  if (node.name == "PROB") {
    if (!node.args.empty()) bad(node, "PROB() takes no arguments");
    z.kind_ = Kind::Prob;
  } else if (node.name == "AVG") {
    if (node.args.size() != 1) bad(node, "AVG takes one argument");
    z.kind_ = Kind::Avg;
    y_from(node.args[0]);
  } else if (node.name == "PDF" || node.name == "CDF") {
    if (node.args.size() != 4) bad(node, node.name + " takes (Y, step, start, stop)");
    z.kind_ = node.name == "PDF" ? Kind::Pdf : Kind::Cdf;
    y_from(node.args[0]);
    z.step_ = number_arg(node.args[1], "step");
    z.start_ = number_arg(node.args[2], "start");
    z.stop_ = number_arg(node.args[3], "stop");
    if (!(z.step_ > 0.0)) bad(node, "step must be positive");
    if (!(z.start_ < z.stop_)) bad(node, "start must be below stop");
  } else {
    bad(node, "unknown target operator '" + node.name + "'");
  }
  return z;
}

TargetExpr TargetExpr::parse(std::string_view text, const BoundLha& lha) { return from_node(expr::parse(text), lha); }

void TargetExpr::attach(Synchronizer& sync) {
  for (auto& y : y_) y.attach(sync);
  for (auto& c : children_) c.attach(sync);
}

double student_t_half_width(double sd, std::size_t n) {
  if (n < 2) return std::numeric_limits<double>::infinity();
  const boost::math::students_t dist(static_cast<double>(n - 1));
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  return t * sd / std::sqrt(static_cast<double>(n));
}

std::pair<double, double> wilson_interval(std::size_t k, std::size_t n) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

EstimateReport TargetExpr::evaluate(std::span<const RunResult> runs) const {
  EstimateReport report;
  report.paths = runs.size();
  for (const auto& r : runs) report.accepted += r.accepted ? 1 : 0;

  switch (kind_) {
    case Kind::Prob: {
      report.kind = "PROB";
      if (runs.empty()) {
        report.note = "no paths";
        return report;
      }
      report.defined = true;
      report.value = static_cast<double>(report.accepted) / static_cast<double>(report.paths);
      std::tie(report.ci_low, report.ci_high) = wilson_interval(report.accepted, report.paths);
      return report;
    }
    case Kind::Avg: {
      report.kind = "AVG";
      if (report.accepted == 0) {
        report.note = "no accepted paths";
        return report;
      }
      std::vector<double> ys;
      for (const auto& r : runs) {
        if (r.accepted) ys.push_back(y_[0].eval(r));
      }
      double mean = 0.0;
      for (const double v : ys) mean += v;
      mean /= static_cast<double>(ys.size());
      double ss = 0.0;
      for (const double v : ys) ss += (v - mean) * (v - mean);
      const double sd = ys.size() > 1 ? std::sqrt(ss / static_cast<double>(ys.size() - 1)) : 0.0;
      const double half = student_t_half_width(sd, ys.size());
      report.defined = true;
      report.value = mean;
      report.ci_low = mean - half;
      report.ci_high = mean + half;
      if (ys.size() < 2) report.note = "confidence interval needs at least two accepted paths";
      return report;
    }
    case Kind::Pdf:
    case Kind::Cdf: {
      report.kind = kind_ == Kind::Pdf ? "PDF" : "CDF";
      const auto nbins = static_cast<std::size_t>(std::ceil((stop_ - start_) / step_ - 1e-9));
      std::vector<double> counts(nbins, 0.0);
      double below = 0.0;
      for (const auto& r : runs) {
        if (!r.accepted) continue;
        const double v = y_[0].eval(r);
        if (v < start_) {
          below += 1.0;
          continue;
        }
        const auto bin = static_cast<std::size_t>(std::floor((v - start_) / step_));
        if (v < stop_ && bin < nbins) counts[bin] += 1.0;
      }
      if (report.accepted == 0) {
        report.note = "no accepted paths";
        return report;
      }
      const double n = static_cast<double>(report.accepted);
      double cumulative = below;
      for (std::size_t b = 0; b < nbins; ++b) {
        const double lo = start_ + static_cast<double>(b) * step_;
        const double hi = std::min(stop_, lo + step_);
        cumulative += counts[b];
        const double value = kind_ == Kind::Pdf ? counts[b] / (n * step_) : cumulative / n;
        report.bins.push_back({lo, hi, value});
      }
      report.defined = true;
      return report;
    }
    case Kind::Sum:
    case Kind::Product: {
      const auto a = children_[0].evaluate(runs);
      const auto b = children_[1].evaluate(runs);
      report.kind = kind_ == Kind::Sum ? "SUM" : "PRODUCT";
      report.defined = a.defined && b.defined;
      if (!report.defined) {
        report.note = "an operand is undefined";
        return report;
      }
      if (kind_ == Kind::Sum) {
        report.value = a.value + b.value;
        report.ci_low = a.ci_low + b.ci_low;
        report.ci_high = a.ci_high + b.ci_high;
      } else {
        report.value = a.value * b.value;
        const double c[] = {a.ci_low * b.ci_low, a.ci_low * b.ci_high, a.ci_high * b.ci_low, a.ci_high * b.ci_high};
        report.ci_low = *std::min_element(std::begin(c), std::end(c));
        report.ci_high = *std::max_element(std::begin(c), std::end(c));
      }
      return report;
    }
  }
  return report;
}

EstimateReport estimate(TargetExpr z, const BoundLha& lha, const CrnModel& model, std::span<const double> theta,
                        std::size_t n_paths, std::uint64_t seed, const SafetyBounds& bounds) {
  Synchronizer sync(lha);
  z.attach(sync);
  std::vector<RunResult> runs;
  runs.reserve(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    auto rng = RngStream::child(seed, {i});
    sample_path(model, theta, model.initial_state(), rng, sync, bounds);
    runs.push_back(sync.result());
  }
  return z.evaluate(runs);
}

}  // namespace osctune
