#pragma once

// One simulated run: topology, nine-mode dispatch and the event loop.

#include <cstdint>
#include <vector>

#include "permasim/config.hpp"
#include "permasim/netmodel.hpp"
#include "permasim/quantum.hpp"
#include "permasim/telemetry.hpp"

namespace permasim {

struct RunStats {
  /// One entry per (spot, round), in deadline order.
  std::vector<telemetry::TransactionResolution> resolutions;

  net::LinkCounters lora;
  net::LinkCounters nvis;
  quantum::QuantumCounters quantum;

  std::uint64_t consensus_instances = 0;
  std::uint64_t consensus_decided = 0;
  /// Protocol messages offered to the access media, retries included.
  std::uint64_t consensus_messages = 0;
  std::uint64_t feedback_delivered = 0;

  std::uint64_t events = 0;
  /// Digest of the processed (time, kind, payload) sequence.
  std::uint64_t trace_hash = 0;
  double availability = 1.0;
  /// Final reputation per sensor id; empty without a social layer.
  std::vector<double> reputation;

  std::uint64_t successes() const;
};

/// Runs `config` with the given master seed. Throws ConfigError for an
/// invalid config; SchedulingError signals an internal fault.
RunStats run(const SimConfig& config, std::uint64_t master_seed);
inline RunStats run(const SimConfig& config) { return run(config, config.base_seed); }

}  // namespace permasim
