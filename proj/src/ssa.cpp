#include "osctune/ssa.hpp"

#include <ostream>

namespace osctune {

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::Stopped: return "stopped";
    case Termination::Deadlock: return "deadlock";
    case Termination::TimeBound: return "time_bound";
    case Termination::EventBound: return "event_bound";
  }
  return "unknown";
}

std::optional<NextEvent> select_event(std::span<const double> propensities, double u_time, double u_select) {
  double total = 0.0;
  for (const double a : propensities) total += a;
  if (!(total > 0.0)) return std::nullopt;
  const double target = u_select * total;
  double cumulative = 0.0;
  std::size_t chosen = propensities.size();
  std::size_t last_enabled = 0;
  for (std::size_t j = 0; j < propensities.size(); ++j) {
    if (propensities[j] <= 0.0) continue;
    last_enabled = j;
    cumulative += propensities[j];
    if (cumulative > target) {
      chosen = j;
      break;
    }
  }
  // Rounding can leave the scan one ulp short of the total.
  if (chosen == propensities.size()) chosen = last_enabled;
  return NextEvent{-std::log(u_time) / total, chosen};
}

double compute_propensities(const CrnModel& model, std::span<const double> theta, const State& x, std::vector<double>& out) {
  out.resize(model.reaction_count());
  double total = 0.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = model.propensity(j, x, theta);
    total += out[j];
  }
  return total;
}

std::optional<NextEvent> next_event(const CrnModel& model, std::span<const double> theta, const State& x, RngStream& rng) {
  std::vector<double> props;
  compute_propensities(model, theta, x, props);
  const double u_time = rng.uniform();
  const double u_select = rng.uniform();
  return select_event(props, u_time, u_select);
}

std::vector<double> TraceRecorder::times() const {
  std::vector<double> out;
  out.reserve(events_.size());
  double t = 0.0;
  for (const auto& e : events_) {
    t += e.sojourn;
    out.push_back(t);
  }
  return out;
}

void TraceRecorder::write_csv(std::ostream& out, const CrnModel& model) const {
  const auto old_precision = out.precision(17);
  out << "time,reaction";
  for (std::size_t i = 0; i < model.species_count(); ++i) out << ',' << model.species_name(i);
  out << '\n';
  auto row = [&](double t, const std::string& reaction, const State& s) {
    out << t << ',' << reaction;
    for (const auto v : s.populations) out << ',' << v;
    out << '\n';
  };
  row(0.0, "", initial_);
  double t = 0.0;
  for (const auto& e : events_) {
    t += e.sojourn;
    row(t, model.reaction(e.reaction).name, e.new_state);
  }
  out.precision(old_precision);
}

}  // namespace osctune
