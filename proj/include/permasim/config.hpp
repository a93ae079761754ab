#pragma once

// Full parameterization of one simulated run and its flat `key = value`
// text form.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "permasim/consensus.hpp"
#include "permasim/netmodel.hpp"
#include "permasim/quantum.hpp"
#include "permasim/social.hpp"
#include "permasim/telemetry.hpp"

namespace permasim {

struct MessageSizes {
  std::uint32_t data_report = 800;
  std::uint32_t feedback = 512;
  std::uint32_t ack = 256;
};

struct NvisParams {
  net::LinkParams link{4800.0, 50, 0.35, 800};
  double availability_min = 0.70;
  double availability_max = 1.00;
  double mean_down_s = 3600.0;
  double dtn_ttl_s = 86400.0;
};

struct SimConfig {
  double duration_days = 400.0;
  double measurement_period_s = 3600.0;
  double deadline_s = 86400.0;
  /// Spots sample at round start plus U[0, spot_jitter_s).
  double spot_jitter_s = 0.0;
  /// A sensor offers its DataReport U[0, uplink_jitter_s) after sampling.
  double uplink_jitter_s = 60.0;

  telemetry::Topology topology;
  telemetry::Mode mode;
  telemetry::FaultParams fault;
  /// Per-sensor Pb0 overrides, keyed by global sensor id.
  std::map<std::uint32_t, double> sensor_pb0;

  net::LinkParams lora{5000.0, 40, 0.01, 0};
  NvisParams nvis;
  MessageSizes sizes;
  quantum::QuantumParams quantum;
  social::ReputationParams social;
  consensus::ConsensusParams consensus;

  std::uint64_t base_seed = 1;
  std::uint32_t reps = 30;

  double pb0_of(std::uint32_t sensor) const {
    auto it = sensor_pb0.find(sensor);
    return it == sensor_pb0.end() ? fault.pb0 : it->second;
  }
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

namespace harness {

/// Every violated invariant, each naming its key. Empty when valid.
std::vector<std::string> validate(const SimConfig& config);
/// Throws ConfigError listing all problems.
void require_valid(const SimConfig& config);

/// Applies `key = value` lines (blank lines and `#` comments ignored) on top
/// of `base`. Unknown keys and malformed values are collected and reported
/// together as a ConfigError; the result is validated.
SimConfig parse_config(std::string_view text, SimConfig base = {});
SimConfig load_config(const std::string& path, SimConfig base = {});

/// Applies one assignment; throws std::invalid_argument on a bad key/value.
void set_key(SimConfig& config, std::string_view key, std::string_view value);

/// Every key with its current value, one `key = value` per line.
std::string dump_config(const SimConfig& config);

}  // namespace harness
}  // namespace permasim
