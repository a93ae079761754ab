#pragma once

// Reputation-based social trustworthiness layer.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "permasim/engine.hpp"

namespace permasim::social {

using SensorId = std::uint32_t;

struct ReputationParams {
  std::uint32_t window = 10;
  double w_short = 0.5;
  double w_long = 0.5;
  double theta = 0.4;
  double neutral = 0.5;
};

void validate(const ReputationParams& params, std::string_view prefix,
              std::vector<std::string>& errors);

class UnknownSensor : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-sensor feedback history with a short-term (windowed) and a long-term
/// (lifetime) opinion. Every transaction carries equal weight.
class ReputationTable {
 public:
  explicit ReputationTable(ReputationParams params = {});

  void register_sensor(SensorId sensor);
  bool registered(SensorId sensor) const { return index_.contains(sensor); }

  /// Appends one outcome (true = positive feedback). Throws UnknownSensor.
  void record_feedback(SensorId sensor, bool outcome, SimTime now);

  /// w_short * S + w_long * L, with S the mean of the last `window` outcomes
  /// and L the lifetime mean; both default to the neutral prior when the
  /// history is empty. Throws UnknownSensor.
  double reputation(SensorId sensor) const;
  double short_term(SensorId sensor) const;
  double long_term(SensorId sensor) const;

  std::size_t history_length(SensorId sensor) const;
  std::span<const std::uint8_t> history(SensorId sensor) const;

  /// Sensors of `cluster` with reputation >= theta. When none qualifies, the
  /// single best sensor (lowest id on ties) is kept so the service never
  /// starves. Throws std::invalid_argument for an empty cluster.
  std::vector<SensorId> trusted_set(std::span<const SensorId> cluster, double theta) const;
  std::vector<SensorId> trusted_set(std::span<const SensorId> cluster) const {
    return trusted_set(cluster, params_.theta);
  }

  const ReputationParams& params() const { return params_; }

 private:
  struct Entry {
    std::vector<std::uint8_t> history;
    std::uint64_t positives = 0;
    SimTime last_update;
  };
  std::size_t slot(SensorId sensor) const;
  const Entry& entry(SensorId sensor) const { return entries_[slot(sensor)]; }

  ReputationParams params_;
  std::unordered_map<SensorId, std::size_t> index_;
  std::vector<Entry> entries_;
};

}  // namespace permasim::social
