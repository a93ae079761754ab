#pragma once

// Classical communication models: the shared LoRa access medium of a
// concentrator area, the NVIS backhaul on/off process, drop-tail congestion
// and delay-tolerant store-and-forward.

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "permasim/engine.hpp"

namespace permasim::net {

struct LinkParams {
  double capacity_bps = 5000.0;
  std::size_t buffer_slots = 50;
  /// Loss probability per transmission attempt.
  double base_loss = 0.01;
  /// 0: base_loss applies to every message regardless of size. Otherwise
  /// base_loss is the loss of a message of `reference_bits`, and a message of
  /// b bits is lost with probability 1 - (1 - base_loss)^(b / reference_bits).
  std::uint32_t reference_bits = 0;
};

/// Appends one message per violated invariant, prefixed with `prefix`.
void validate(const LinkParams& params, std::string_view prefix, std::vector<std::string>& errors);

/// Probability that a message of `size_bits` is lost on an admitted attempt.
double loss_probability(const LinkParams& params, std::uint32_t size_bits);

enum class MessageKind : std::uint8_t {
  DataReport,
  PrePrepare,
  Prepare,
  Commit,
  RepFeedback,
  FqcCoordination,
  Ack,
};

std::string_view to_string(MessageKind kind);

using NodeId = std::uint32_t;

struct TxId {
  std::uint32_t spot = 0;
  std::uint32_t round = 0;
  friend bool operator==(const TxId&, const TxId&) = default;
};

class Message {
 public:
  /// Throws std::invalid_argument for a zero-size message.
  Message(NodeId src, NodeId dst, MessageKind kind, std::uint32_t size_bits, TxId tx,
          std::uint64_t key = 0);

  NodeId src() const { return src_; }
  NodeId dst() const { return dst_; }
  MessageKind kind() const { return kind_; }
  std::uint32_t size_bits() const { return size_bits_; }
  TxId tx() const { return tx_; }
  /// Identity used for keyed loss draws; 0 means "draw sequentially".
  std::uint64_t key() const { return key_; }

  Message resized(std::uint32_t size_bits) const;

 private:
  NodeId src_;
  NodeId dst_;
  MessageKind kind_;
  std::uint32_t size_bits_;
  TxId tx_;
  std::uint64_t key_;
};

/// Serialization time in seconds. Throws std::invalid_argument when
/// capacity_bps <= 0.
double airtime(double size_bits, double capacity_bps);
Duration airtime_duration(std::uint32_t size_bits, double capacity_bps);

enum class TransmitStatus : std::uint8_t {
  Delivered,
  DroppedCongestion,
  DroppedLoss,
  BufferedDtn,
};

std::string_view to_string(TransmitStatus status);

struct TransmitOutcome {
  TransmitStatus status = TransmitStatus::DroppedLoss;
  /// Arrival time at the receiver; meaningful only when Delivered.
  SimTime at;
};

struct LinkCounters {
  std::uint64_t offered = 0;
  std::uint64_t bits_offered = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_congestion = 0;
  std::uint64_t dropped_loss = 0;
  std::uint64_t dtn_buffered = 0;
  std::uint64_t dtn_expired = 0;

  LinkCounters& operator+=(const LinkCounters& o);
};

/// One FIFO channel with a drop-tail buffer of `buffer_slots` messages
/// (including the one in service). Offers must arrive with non-decreasing
/// `now`, which the event loop guarantees.
class SharedMedium {
 public:
  SharedMedium(LinkParams params, RandomStream loss_stream);

  /// link_transmit on a medium that is up.
  TransmitOutcome transmit(const Message& msg, SimTime now);

  std::size_t occupancy(SimTime now);
  bool has_room(SimTime now) { return occupancy(now) < params_.buffer_slots; }
  /// Earliest time at which a slot frees, given the current backlog.
  SimTime next_slot_free(SimTime now) { return occupancy_below_at(params_.buffer_slots, now); }
  /// Earliest time at which fewer than `level` (>= 1) messages are queued.
  SimTime occupancy_below_at(std::size_t level, SimTime now);

  const LinkParams& params() const { return params_; }
  const LinkCounters& counters() const { return counters_; }
  LinkCounters& counters() { return counters_; }

 private:
  void purge(SimTime now);

  LinkParams params_;
  RandomStream loss_stream_;
  std::deque<SimTime> departures_;
  SimTime busy_until_;
  LinkCounters counters_;
};

// ---------------------------------------------------------------------------
// NVIS backhaul

enum class NvisPhase : std::uint8_t { Up, Down };

struct NvisState {
  /// Stationary fraction of time the link is up.
  double availability = 1.0;
  NvisPhase phase = NvisPhase::Up;
  SimTime next_transition = SimTime::max();
  double mean_down_s = 3600.0;

  /// Mean up duration that makes `availability` the stationary up fraction.
  double mean_up_s() const;
};

/// Duration of the phase the link is currently in. Down durations are
/// exponential with mean mean_down; up durations exponential with mean
/// mean_down * A / (1 - A). A = 1 keeps the link up forever.
Duration nvis_next_transition(const NvisState& state, RandomStream& stream);

/// Initial state drawn from the stationary distribution.
NvisState nvis_initial_state(double availability, double mean_down_s, RandomStream& stream);

struct Bundle {
  Message msg;
  SimTime enqueued;
};

class DtnBuffer {
 public:
  explicit DtnBuffer(Duration ttl) : ttl_(ttl) {}

  void push(const Message& msg, SimTime now) { bundles_.push_back(Bundle{msg, now}); }
  bool empty() const { return bundles_.empty(); }
  std::size_t size() const { return bundles_.size(); }
  Duration ttl() const { return ttl_; }
  const std::deque<Bundle>& bundles() const { return bundles_; }
  const Bundle& front() const { return bundles_.front(); }
  void pop_front() { bundles_.pop_front(); }

 private:
  Duration ttl_;
  std::deque<Bundle> bundles_;
};

struct FlushedBundle {
  Message msg;
  TransmitOutcome outcome;
};

struct FlushResult {
  std::vector<FlushedBundle> offered;
  std::vector<Message> expired;
  /// Set when bundles remain because the link queue is full; flushing
  /// resumes when a slot frees.
  std::optional<SimTime> resume_at;
};

/// Drains bundles FIFO through `medium`. Bundles older than the ttl are
/// discarded and reported as expired. Draining pauses while the medium's
/// buffer is full so that custody bundles are not lost to drop-tail.
FlushResult dtn_flush(DtnBuffer& buffer, SharedMedium& medium, SimTime now);

class NvisLink {
 public:
  NvisLink(LinkParams params, NvisState initial, Duration ttl, RandomStream loss_stream,
           RandomStream phase_stream);

  /// Up with no backlog: transmit through the medium. Otherwise (Down, a
  /// custody backlog, or a full queue) the message joins the DTN buffer
  /// behind earlier bundles and the caller must schedule a flush.
  TransmitOutcome transmit(const Message& msg, SimTime now);

  /// Flip the phase at its scheduled transition; returns the next
  /// transition time (SimTime::max() if none).
  SimTime transition(SimTime now);

  FlushResult flush(SimTime now);

  const NvisState& state() const { return state_; }
  bool up() const { return state_.phase == NvisPhase::Up; }
  const DtnBuffer& buffer() const { return buffer_; }
  SharedMedium& medium() { return medium_; }
  const LinkCounters& counters() const { return medium_.counters(); }

 private:
  SharedMedium medium_;
  NvisState state_;
  DtnBuffer buffer_;
  RandomStream phase_stream_;
};

}  // namespace permasim::net
