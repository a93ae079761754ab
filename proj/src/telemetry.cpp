#include "permasim/telemetry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace permasim::telemetry {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(Layer layer) {
  switch (layer) {
    case Layer::None: return "none";
    case Layer::Classical: return "classical";
    case Layer::Quantum: return "quantum";
  }
  return "?";
}

Layer parse_layer(std::string_view text) {
  const std::string t = lower(text);
  if (t == "none") return Layer::None;
  if (t == "classical") return Layer::Classical;
  if (t == "quantum") return Layer::Quantum;
  throw std::invalid_argument("unknown layer '" + std::string(text) +
                              "' (expected none, classical or quantum)");
}

const std::array<Mode, 9>& all_modes() {
  using L = Layer;
  static const std::array<Mode, 9> modes{{
      {L::None, L::None},
      {L::Classical, L::None},
      {L::None, L::Classical},
      {L::Classical, L::Classical},
      {L::None, L::Quantum},
      {L::Classical, L::Quantum},
      {L::Quantum, L::None},
      {L::Quantum, L::Classical},
      {L::Quantum, L::Quantum},
  }};
  return modes;
}

std::string label(Mode mode) {
  std::string social;
  if (mode.social == Layer::Classical) social = "Social";
  if (mode.social == Layer::Quantum) social = "Quantum Social";
  std::string cons;
  if (mode.consensus == Layer::Classical) cons = "Consensus";
  if (mode.consensus == Layer::Quantum) cons = "Quantum Consensus";
  if (social.empty() && cons.empty()) return "Standard";
  if (social.empty()) return cons;
  if (cons.empty()) return social;
  return social + " + " + cons;
}

std::string slug(Mode mode) {
  std::string social;
  if (mode.social == Layer::Classical) social = "social";
  if (mode.social == Layer::Quantum) social = "quantum-social";
  std::string cons;
  if (mode.consensus == Layer::Classical) cons = "consensus";
  if (mode.consensus == Layer::Quantum) cons = "quantum-consensus";
  if (social.empty() && cons.empty()) return "standard";
  if (social.empty()) return cons;
  if (cons.empty()) return social;
  return social + "+" + cons;
}

Mode parse_mode(std::string_view text) {
  const std::string t = lower(text);
  for (const Mode& m : all_modes()) {
    if (t == slug(m) || t == lower(label(m))) return m;
  }
  throw std::invalid_argument("unknown mode '" + std::string(text) + "'");
}

double ground_truth(const RandomStream& truth_stream, std::uint32_t spot, std::uint32_t round) {
  const double level = -10.0 + 20.0 * truth_stream.uniform_at(hash_key(spot, 0u));
  const double rate = 0.002 * (truth_stream.uniform_at(hash_key(spot, 1u)) - 0.5);
  return level + rate * static_cast<double>(round);
}

SensorReading sense(std::uint32_t spot, std::uint32_t sensor, std::uint32_t round, double truth,
                    double pb0, const FaultParams& fault, const RandomStream& sensor_stream) {
  SensorReading r{spot, sensor, round, truth, false};
  const double u = sensor_stream.uniform_at(hash_key(round, 0u));
  if (u < pb0) {
    const double mag = fault.offset_min + (fault.offset_max - fault.offset_min) *
                                              sensor_stream.uniform_at(hash_key(round, 1u));
    const double sign = sensor_stream.uniform_at(hash_key(round, 2u)) < 0.5 ? -1.0 : 1.0;
    r.value = truth + sign * mag * fault.tolerance;
    r.faulty = true;
  }
  return r;
}

bool within_tolerance(double value, double truth, double tolerance) {
  return std::fabs(value - truth) <= tolerance;
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Success: return "Success";
    case Outcome::FailWrongValue: return "FailWrongValue";
    case Outcome::FailDeadline: return "FailDeadline";
    case Outcome::FailNoDelivery: return "FailNoDelivery";
  }
  return "?";
}

bool Transaction::accept(double value, SimTime at) {
  if (accepted_ || resolution_ || at > deadline_) return false;
  accepted_ = value;
  accepted_at_ = at;
  return true;
}

TransactionResolution Transaction::resolve_deadline(SimTime now, double tolerance) {
  if (resolution_) return *resolution_;
  TransactionResolution r{spot_, round_, Outcome::FailNoDelivery, now};
  if (accepted_) {
    r.outcome = within_tolerance(*accepted_, truth_, tolerance) ? Outcome::Success
                                                                : Outcome::FailWrongValue;
    r.decided_at = accepted_at_;
  } else if (in_flight_ > 0) {
    r.outcome = Outcome::FailDeadline;
  }
  resolution_ = r;
  return r;
}

}  // namespace permasim::telemetry
