#pragma once

// Scenario actors: sensors with byzantine fault injection, measuring spots,
// concentrators, the control center and the transaction lifecycle.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "permasim/engine.hpp"

namespace permasim::telemetry {

enum class Layer : std::uint8_t { None, Classical, Quantum };

std::string_view to_string(Layer layer);
/// Accepts none/classical/quantum. Throws std::invalid_argument.
Layer parse_layer(std::string_view text);

struct Mode {
  Layer social = Layer::None;
  Layer consensus = Layer::None;
  friend bool operator==(const Mode&, const Mode&) = default;
};

/// The nine (social, consensus) pairs in table order: Standard, Social,
/// Consensus, Social + Consensus, Quantum Consensus, Social + Quantum
/// Consensus, Quantum Social, Quantum Social + Consensus, Quantum Social +
/// Quantum Consensus.
const std::array<Mode, 9>& all_modes();

/// Human-readable name, e.g. "Quantum Social + Consensus".
std::string label(Mode mode);
/// Stable CSV identifier, e.g. "quantum-social+consensus".
std::string slug(Mode mode);
/// Parses a slug or a label (case-insensitive). Throws std::invalid_argument.
Mode parse_mode(std::string_view text);

struct Topology {
  std::uint32_t concentrators = 5;
  std::uint32_t spots = 32;
  std::uint32_t redundancy = 1;

  std::uint32_t concentrator_of(std::uint32_t spot) const { return spot % concentrators; }
  std::uint32_t sensor_count() const { return spots * redundancy; }
  std::uint32_t sensor_id(std::uint32_t spot, std::uint32_t k) const { return spot * redundancy + k; }
};

struct FaultParams {
  double pb0 = 0.01;
  /// Readings within this distance of the truth are correct.
  double tolerance = 1.0;
  /// A faulty reading is offset by +-U[offset_min, offset_max] tolerance units.
  double offset_min = 5.0;
  double offset_max = 10.0;
};

struct SensorReading {
  std::uint32_t spot = 0;
  std::uint32_t sensor = 0;
  std::uint32_t round = 0;
  double value = 0.0;
  /// Simulation bookkeeping only; protocol code never reads it.
  bool faulty = false;
};

/// Ground truth of a spot at a round: a per-spot level plus a slow drift.
double ground_truth(const RandomStream& truth_stream, std::uint32_t spot, std::uint32_t round);

/// With probability pb0 a faulty reading, else the truth. Draws are keyed by
/// round on the sensor's own stream, so they do not depend on which other
/// sensors sense.
SensorReading sense(std::uint32_t spot, std::uint32_t sensor, std::uint32_t round, double truth,
                    double pb0, const FaultParams& fault, const RandomStream& sensor_stream);

bool within_tolerance(double value, double truth, double tolerance);

enum class Outcome : std::uint8_t { Success, FailWrongValue, FailDeadline, FailNoDelivery };
std::string_view to_string(Outcome outcome);

struct TransactionResolution {
  std::uint32_t spot = 0;
  std::uint32_t round = 0;
  Outcome outcome = Outcome::FailNoDelivery;
  SimTime decided_at;
};

/// Control-center view of one (spot, round) transaction: first arrival wins.
class Transaction {
 public:
  Transaction() = default;
  Transaction(std::uint32_t spot, std::uint32_t round, double truth, SimTime deadline)
      : spot_(spot), round_(round), truth_(truth), deadline_(deadline) {}

  /// Returns true if this delivery became the accepted value.
  bool accept(double value, SimTime at);
  void add_in_flight() { ++in_flight_; }
  void remove_in_flight() {
    if (in_flight_ > 0) --in_flight_;
  }
  std::uint32_t in_flight() const { return in_flight_; }

  /// Final verdict; later calls return the same resolution.
  TransactionResolution resolve_deadline(SimTime now, double tolerance);

  bool resolved() const { return resolution_.has_value(); }
  const std::optional<double>& accepted() const { return accepted_; }
  double truth() const { return truth_; }
  SimTime deadline() const { return deadline_; }
  std::uint32_t spot() const { return spot_; }
  std::uint32_t round() const { return round_; }

 private:
  std::uint32_t spot_ = 0;
  std::uint32_t round_ = 0;
  double truth_ = 0.0;
  SimTime deadline_;
  std::optional<double> accepted_;
  SimTime accepted_at_;
  std::uint32_t in_flight_ = 0;
  std::optional<TransactionResolution> resolution_;
};

}  // namespace permasim::telemetry
