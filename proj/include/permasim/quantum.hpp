#pragma once

// Abstract quantum-Internet link layer: entangled-pair generation and
// buffering, plus the two success-probability boosts (super-additivity across
// channel uses, superposition of trajectories across paths).

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "permasim/engine.hpp"
#include "permasim/netmodel.hpp"

namespace permasim::quantum {

struct QuantumParams {
  double p_channel = 0.8;
  double alpha = 1.2;  // super-additivity exponent, >= 1
  double beta = 0.5;   // trajectory-superposition gain, in [0, 1]
  std::uint32_t pairs_per_msg = 2;
  double gen_rate = 10.0;  // pairs per second
  std::uint64_t buffer_cap = 1000;
  /// Fraction of the classical message size still carried classically.
  double classical_overhead_rho = 0.25;
};

void validate(const QuantumParams& params, std::string_view prefix, std::vector<std::string>& errors);

/// 1 - prod(1 - p_i)^alpha, clamped to [0, 1]. Throws std::invalid_argument
/// for an empty list.
double superadditive_success(std::span<const double> ps, double alpha);

/// max + beta * min * (1 - max); symmetric in (p1, p2).
double superposed_success(double p1, double p2, double beta);

/// Per-message success of a quantum-assisted transmission:
/// superposed_success(q, q, beta) with q the boosted success of
/// `pairs_per_msg` channel uses.
double effective_success(const QuantumParams& params);

/// Classical residual of a quantum-assisted message (at least one bit).
std::uint32_t residual_bits(const QuantumParams& params, std::uint32_t size_bits);

struct QuantumCounters {
  std::uint64_t pairs_generated = 0;
  std::uint64_t pairs_consumed = 0;
  std::uint64_t quantum_sent = 0;
  std::uint64_t quantum_failed = 0;
  std::uint64_t classical_fallbacks = 0;

  QuantumCounters& operator+=(const QuantumCounters& o);
};

class QuantumLink {
 public:
  QuantumLink(QuantumParams params, RandomStream gen_stream, RandomStream channel_stream,
              std::uint64_t initial_pairs = 0);

  const QuantumParams& params() const { return params_; }
  std::uint64_t pair_buffer() const { return pair_buffer_; }
  double success_probability() const { return p_eff_; }
  const QuantumCounters& counters() const { return counters_; }
  QuantumCounters& counters() { return counters_; }

  /// Generate pairs for the interval since the last update. Poisson
  /// arrivals capped at buffer_cap; only increments happen between uses, so
  /// lazily capping the sum is exact.
  std::uint64_t advance_to(SimTime now);

  bool consume_pairs();
  bool channel_succeeds(std::uint64_t key);

 private:
  friend std::uint64_t entanglement_step(QuantumLink& link, double dt_s, RandomStream& stream);

  QuantumParams params_;
  RandomStream gen_stream_;
  RandomStream channel_stream_;
  double p_eff_;
  std::uint64_t pair_buffer_;
  SimTime last_update_;
  QuantumCounters counters_;
};

/// Adds Poisson(gen_rate * dt) pairs, truncated at buffer_cap. Returns the
/// number of pairs actually added. Throws std::invalid_argument if dt <= 0.
std::uint64_t entanglement_step(QuantumLink& link, double dt_s, RandomStream& stream);

/// Decision of the quantum layer for one message, before classical carriage.
struct QuantumDecision {
  bool used_quantum = false;  // false: classical fallback (pairs exhausted)
  bool success = false;       // quantum channel outcome; false on fallback
  net::Message classical;     // what must still cross the classical medium
};

/// Pairs available: consume them and draw success with effective_success.
/// On success only the rho residual crosses the classical medium. A failed
/// attempt is heralded, so the pairs are spent and the full message is sent
/// classically, as it is when pairs are exhausted.
QuantumDecision quantum_prepare(QuantumLink& link, const net::Message& msg, SimTime now);

/// Single-hop quantum_transmit: quantum_prepare followed by link_transmit of
/// the classical part on `medium`.
net::TransmitOutcome quantum_transmit(QuantumLink& link, const net::Message& msg,
                                      net::SharedMedium& medium, SimTime now);

}  // namespace permasim::quantum
