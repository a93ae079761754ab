#include "permasim/social.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace permasim::social {

void validate(const ReputationParams& p, std::string_view prefix, std::vector<std::string>& errors) {
  auto err = [&](std::string_view key, std::string_view what) {
    std::ostringstream os;
    os << prefix << '.' << key << ": " << what;
    errors.push_back(os.str());
  };
  if (p.window < 1) err("window", "must be >= 1");
  if (!(p.w_short >= 0.0 && p.w_short <= 1.0)) err("w_short", "must lie in [0, 1]");
  if (!(p.w_long >= 0.0 && p.w_long <= 1.0)) err("w_long", "must lie in [0, 1]");
  if (std::fabs(p.w_short + p.w_long - 1.0) > 1e-9) err("w_long", "w_short + w_long must equal 1");
  if (!(p.theta >= 0.0 && p.theta <= 1.0)) err("theta", "must lie in [0, 1]");
  if (!(p.neutral >= 0.0 && p.neutral <= 1.0)) err("neutral", "must lie in [0, 1]");
}

ReputationTable::ReputationTable(ReputationParams params) : params_(params) {}

void ReputationTable::register_sensor(SensorId sensor) {
  if (index_.contains(sensor)) return;
  index_.emplace(sensor, entries_.size());
  entries_.emplace_back();
}

std::size_t ReputationTable::slot(SensorId sensor) const {
  auto it = index_.find(sensor);
  if (it == index_.end()) {
    throw UnknownSensor("reputation table: sensor " + std::to_string(sensor) + " not registered");
  }
  return it->second;
}

void ReputationTable::record_feedback(SensorId sensor, bool outcome, SimTime now) {
  Entry& e = entries_[slot(sensor)];
  e.history.push_back(outcome ? 1 : 0);
  e.positives += outcome ? 1 : 0;
  e.last_update = now;
}

double ReputationTable::short_term(SensorId sensor) const {
  const Entry& e = entry(sensor);
  if (e.history.empty()) return params_.neutral;
  const std::size_t w = std::min<std::size_t>(params_.window, e.history.size());
  std::size_t pos = 0;
  for (std::size_t i = e.history.size() - w; i < e.history.size(); ++i) pos += e.history[i];
  return static_cast<double>(pos) / static_cast<double>(w);
}

double ReputationTable::long_term(SensorId sensor) const {
  const Entry& e = entry(sensor);
  if (e.history.empty()) return params_.neutral;
  return static_cast<double>(e.positives) / static_cast<double>(e.history.size());
}

double ReputationTable::reputation(SensorId sensor) const {
  return params_.w_short * short_term(sensor) + params_.w_long * long_term(sensor);
}

std::size_t ReputationTable::history_length(SensorId sensor) const {
  return entry(sensor).history.size();
}

std::span<const std::uint8_t> ReputationTable::history(SensorId sensor) const {
  return entry(sensor).history;
}

std::vector<SensorId> ReputationTable::trusted_set(std::span<const SensorId> cluster,
                                                   double theta) const {
  if (cluster.empty()) throw std::invalid_argument("trusted_set: empty cluster");
  std::vector<SensorId> out;
  SensorId best = cluster.front();
  double best_rep = -1.0;
  for (SensorId s : cluster) {
    const double r = reputation(s);
    if (r >= theta) out.push_back(s);
    if (r > best_rep || (r == best_rep && s < best)) {
      best = s;
      best_rep = r;
    }
  }
  if (out.empty()) out.push_back(best);
  return out;
}

}  // namespace permasim::social
