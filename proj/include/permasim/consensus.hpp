#pragma once

// Cluster-level agreement: PBFT with quadratic message accounting and a Fast
// Quantum Consensus model with linear message accounting.
//
// Both protocols are written as message-driven state machines. A driver
// offers every message in the outbox to a medium and feeds deliveries and
// timeouts back; `pbft_instance` / `fqc_instance` below are self-contained
// drivers over a single shared medium.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "permasim/engine.hpp"
#include "permasim/netmodel.hpp"
#include "permasim/quantum.hpp"

namespace permasim::consensus {

/// floor((n - 1) / 3). Throws std::invalid_argument for n == 0.
std::uint32_t byzantine_tolerance(std::uint32_t n);

/// Pre-prepare, prepare and commit multicasts: (n-1) + (n-1)^2 + n(n-1).
std::uint64_t pbft_message_count(std::uint32_t n);

/// c * n.
std::uint64_t fqc_message_count(std::uint32_t n, std::uint32_t c = 4);

struct Proposal {
  std::uint32_t sensor = 0;
  double value = 0.0;
};

struct Majority {
  double value = 0.0;
  std::uint32_t support = 0;
};

/// Modal value with its support; ties go to the value proposed by the lowest
/// sensor id. Throws std::invalid_argument when empty.
Majority majority(std::span<const Proposal> proposals);
double majority_value(std::span<const Proposal> proposals);

struct ConsensusParams {
  double timeout_s = 600.0;
  std::uint32_t max_retries = 2;      // PBFT view changes
  std::uint32_t fqc_c = 4;            // FQC messages per participant
  std::uint32_t fqc_retries = 1;
  std::uint32_t message_bits = 512;
};

void validate(const ConsensusParams& params, std::string_view prefix,
              std::vector<std::string>& errors);

enum class FailureReason : std::uint8_t { Timeout, InsufficientQuorum };
std::string_view to_string(FailureReason reason);

struct Decided {
  double value = 0.0;
};
struct Failed {
  FailureReason reason = FailureReason::Timeout;
};

struct ConsensusOutcome {
  std::variant<Decided, Failed> result;
  std::uint64_t msg_count = 0;
  Duration latency{0};

  bool decided() const { return std::holds_alternative<Decided>(result); }
  double value() const { return std::get<Decided>(result).value; }
  FailureReason reason() const { return std::get<Failed>(result).reason; }
};

inline constexpr std::uint16_t kCoordinator = 0xffff;

struct ProtocolMessage {
  net::MessageKind kind = net::MessageKind::Prepare;
  std::uint16_t from = 0;
  std::uint16_t to = 0;
  std::uint8_t attempt = 0;
  std::uint8_t phase = 0;
  /// Value endorsed by the sender.
  double value = 0.0;
};

using Outbox = std::vector<ProtocolMessage>;

/// Loss-draw identity of a protocol message within one instance.
std::uint64_t message_key(std::uint64_t instance_key, const ProtocolMessage& m);

/// Progress shared by both protocols.
class InstanceBase {
 public:
  InstanceBase(std::vector<double> values, ConsensusParams params);
  virtual ~InstanceBase() = default;

  virtual void start(SimTime now, Outbox& out) = 0;
  virtual void on_message(const ProtocolMessage& m, SimTime now, Outbox& out) = 0;
  /// Timeout of `attempt`. Starts the next attempt (returns true) or records
  /// the final failure (returns false). Stale or post-decision timeouts are
  /// ignored and return false.
  bool on_timeout(std::uint8_t attempt, SimTime now, Outbox& out);

  bool finished() const { return outcome_.has_value(); }
  bool decided() const { return outcome_.has_value() && outcome_->decided(); }
  std::uint8_t attempt() const { return attempt_; }
  SimTime attempt_deadline() const { return attempt_start_ + seconds(params_.timeout_s); }
  /// Final outcome; msg_count keeps growing while late messages are emitted.
  ConsensusOutcome outcome() const;

  std::uint32_t n() const { return static_cast<std::uint32_t>(values_.size()); }
  std::uint32_t f() const { return f_; }
  std::uint32_t quorum() const { return 2 * f_ + 1; }

 protected:
  virtual std::uint32_t max_retries() const = 0;
  virtual void begin_attempt(SimTime now, Outbox& out) = 0;

  void emit(Outbox& out, const ProtocolMessage& m) {
    out.push_back(m);
    ++msg_count_;
  }
  void decide(double value, SimTime now);
  void start_attempt(std::uint8_t attempt, SimTime now, Outbox& out);

  std::vector<double> values_;
  ConsensusParams params_;
  std::uint32_t f_;
  std::uint8_t attempt_ = 0;
  SimTime first_start_;
  SimTime attempt_start_;
  std::uint64_t msg_count_ = 0;
  std::optional<ConsensusOutcome> outcome_;
};

/// Three-phase PBFT among the n members. The primary of attempt a is member
/// (primary_offset + a) mod n; retries stand in for view changes. Each
/// member endorses its own reading, so a member only prepares and commits a
/// proposal equal to its reading.
class PbftInstance final : public InstanceBase {
 public:
  PbftInstance(std::vector<double> values, ConsensusParams params, std::uint32_t primary_offset = 0);

  void start(SimTime now, Outbox& out) override;
  void on_message(const ProtocolMessage& m, SimTime now, Outbox& out) override;

  std::uint32_t primary() const { return (primary_offset_ + attempt_) % n(); }

 private:
  std::uint32_t max_retries() const override { return params_.max_retries; }
  void begin_attempt(SimTime now, Outbox& out) override;
  void progress(std::uint32_t j, SimTime now, Outbox& out);
  void multicast(std::uint32_t from, net::MessageKind kind, double value, Outbox& out);

  struct Replica {
    bool pre_prepared = false;
    bool prepare_sent = false;
    bool commit_sent = false;
    bool committed = false;
    std::uint32_t prepares_matching = 0;
    std::uint32_t prepares_total = 0;
    std::uint32_t commits_matching = 0;
  };

  std::uint32_t primary_offset_;
  double proposal_ = 0.0;
  std::vector<Replica> replicas_;
};

/// Fast Quantum Consensus at the message-count level: the coordinator polls
/// each member and they exchange `fqc_c` messages, alternating coordinator
/// -> member and member -> coordinator. The coordinator decides once 2f+1
/// members endorse the same value in the last member -> coordinator phase;
/// when c is odd a decision broadcast closes the round. One expected round,
/// retried `fqc_retries` times. A lone member decides without coordination.
class FqcInstance final : public InstanceBase {
 public:
  FqcInstance(std::vector<double> values, ConsensusParams params);

  void start(SimTime now, Outbox& out) override;
  void on_message(const ProtocolMessage& m, SimTime now, Outbox& out) override;

 private:
  std::uint32_t max_retries() const override { return params_.fqc_retries; }
  void begin_attempt(SimTime now, Outbox& out) override;
  std::uint8_t last_vote_phase() const;

  std::vector<Proposal> votes_;
};

/// Runs one PBFT instance to completion over `medium`, starting at `now`.
ConsensusOutcome pbft_instance(std::span<const double> values, const ConsensusParams& params,
                               net::SharedMedium& medium, SimTime now,
                               std::uint32_t primary_offset = 0, std::uint64_t instance_key = 1);

/// Runs one FQC instance; every coordination message goes through
/// quantum_transmit on `qplane` with its classical residual on `medium`.
ConsensusOutcome fqc_instance(std::span<const double> values, const ConsensusParams& params,
                              quantum::QuantumLink& qplane, net::SharedMedium& medium,
                              SimTime now, std::uint64_t instance_key = 1);

}  // namespace permasim::consensus
