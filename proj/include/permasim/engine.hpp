#pragma once

// Deterministic discrete-event core: simulation clock, event queue, seeded
// random streams and per-run statistics.

#include <chrono>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace permasim {

using Duration = std::chrono::microseconds;

/// Convert seconds to the internal integer-microsecond resolution (rounded to
/// nearest).
Duration seconds(double s);
double to_seconds(Duration d);

/// Absolute simulation time, integer microseconds since run start.
class SimTime {
 public:
  constexpr SimTime() = default;
  static constexpr SimTime from_micros(std::int64_t us) { return SimTime{us}; }
  static SimTime from_seconds(double s);
  static constexpr SimTime max() { return SimTime{std::numeric_limits<std::int64_t>::max()}; }

  constexpr std::int64_t micros() const { return us_; }
  double seconds() const { return static_cast<double>(us_) * 1e-6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  friend SimTime operator+(SimTime t, Duration d);
  friend Duration operator-(SimTime a, SimTime b) { return Duration{a.us_ - b.us_}; }

 private:
  constexpr explicit SimTime(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

/// Saturating add so that "never" (SimTime::max) stays "never".
SimTime operator+(SimTime t, Duration d);

// ---------------------------------------------------------------------------
// Random streams

/// 64-bit mixing function (splitmix64 finalizer).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Order-sensitive combination of 64-bit words into one key.
constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
  return mix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

template <typename... Ts>
constexpr std::uint64_t hash_key(std::uint64_t first, Ts... rest) {
  std::uint64_t h = mix64(first + 0x632be59bd9b4e019ULL);
  ((h = hash_combine(h, static_cast<std::uint64_t>(rest))), ...);
  return h;
}

std::uint64_t hash_label(std::string_view label);

/// Counter-based random stream. The output at position i is a pure function
/// of (master_seed, stream_id, i), so each consumer owns an independent
/// sequence regardless of how draws from different consumers interleave.
/// Keyed draws (`uniform_at`) give common random numbers for events that are
/// identified by content rather than by draw order.
class RandomStream {
 public:
  RandomStream() = default;
  RandomStream(std::uint64_t master_seed, std::string_view stream_id);
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_id);

  /// Child stream for a sub-consumer (e.g. one sensor of a spot).
  RandomStream derive(std::uint64_t sub_id) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  bool bernoulli(double p);
  double exponential(double mean);
  std::uint64_t poisson(double mean);

  /// Keyed uniform in [0, 1); does not advance the stream.
  double uniform_at(std::uint64_t key) const;
  std::uint64_t u64_at(std::uint64_t key) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

double unit_from_bits(std::uint64_t bits);

// ---------------------------------------------------------------------------
// Events

enum class EventKind : std::uint8_t {
  MeasurementRound,
  LinkTransition,
  MessageDelivery,
  ConsensusTimeout,
  DtnFlush,
  EntanglementTick,
  TransactionDeadline,
};

std::string_view to_string(EventKind kind);

using EventId = std::uint64_t;

struct Event {
  SimTime at;
  EventId seq = 0;
  EventKind kind = EventKind::MeasurementRound;
  std::uint64_t payload = 0;
};

/// Thrown when an event is scheduled before the current clock. This is a
/// programming fault; the run must stop.
class SchedulingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Priority queue ordered by (at, seq); owns the simulation clock.
class Scheduler {
 public:
  EventId schedule(SimTime at, EventKind kind, std::uint64_t payload = 0);
  EventId schedule_in(Duration delay, EventKind kind, std::uint64_t payload = 0) {
    return schedule(now_ + delay, kind, payload);
  }
  /// Cancelled events are skipped by `next`. Cancelling an already fired or
  /// unknown id is a no-op.
  void cancel(EventId id);

  /// Pops the next live event with `at <= until` and advances the clock to it.
  std::optional<Event> next(SimTime until = SimTime::max());

  SimTime now() const { return now_; }
  std::size_t pending() const { return heap_.size() - cancelled_in_heap_; }
  std::uint64_t processed() const { return processed_; }
  bool empty() const { return pending() == 0; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::vector<bool> retired_;  // fired or cancelled, indexed by seq
  std::size_t cancelled_in_heap_ = 0;
  SimTime now_;
  EventId next_seq_ = 0;
  std::uint64_t processed_ = 0;
};

}  // namespace permasim
