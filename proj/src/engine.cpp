#include "permasim/engine.hpp"

#include <cmath>
#include <sstream>

namespace permasim {

Duration seconds(double s) {
  return Duration{static_cast<std::int64_t>(std::llround(s * 1e6))};
}

double to_seconds(Duration d) { return static_cast<double>(d.count()) * 1e-6; }

SimTime SimTime::from_seconds(double s) { return SimTime{permasim::seconds(s).count()}; }

SimTime operator+(SimTime t, Duration d) {
  constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
  if (t.us_ == kMax || d.count() == kMax) return SimTime::max();
  if (d.count() > 0 && t.us_ > kMax - d.count()) return SimTime::max();
  return SimTime{t.us_ + d.count()};
}

// ---------------------------------------------------------------------------

std::uint64_t hash_label(std::string_view label) {
  // FNV-1a, then mixed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

RandomStream::RandomStream(std::uint64_t master_seed, std::string_view stream_id)
    : RandomStream(master_seed, hash_label(stream_id)) {}

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : key_(hash_combine(mix64(master_seed ^ 0x5851f42d4c957f2dULL), stream_id)) {}

RandomStream RandomStream::derive(std::uint64_t sub_id) const {
  RandomStream child;
  child.key_ = hash_combine(key_, sub_id ^ 0xd1342543de82ef95ULL);
  return child;
}

std::uint64_t RandomStream::u64_at(std::uint64_t key) const {
  // Two rounds of mixing over (stream key, position) decorrelate adjacent
  // positions and adjacent streams.
  return mix64(mix64(key_ + key * 0x9e3779b97f4a7c15ULL) ^ key_);
}

double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::next_u64() { return u64_at(counter_++); }

double RandomStream::uniform() { return unit_from_bits(next_u64()); }

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RandomStream::uniform_at(std::uint64_t key) const { return unit_from_bits(u64_at(key)); }

bool RandomStream::bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform() < p;
}

double RandomStream::exponential(double mean) {
  // 1 - U lies in (0, 1], so the log is finite.
  return -mean * std::log(1.0 - uniform());
}

std::uint64_t RandomStream::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean < 30.0) {
    // Multiplication method.
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }
  // Transformed rejection with squeeze (Hormann's PTRS).
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

// ---------------------------------------------------------------------------

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::MeasurementRound: return "MeasurementRound";
    case EventKind::LinkTransition: return "LinkTransition";
    case EventKind::MessageDelivery: return "MessageDelivery";
    case EventKind::ConsensusTimeout: return "ConsensusTimeout";
    case EventKind::DtnFlush: return "DtnFlush";
    case EventKind::EntanglementTick: return "EntanglementTick";
    case EventKind::TransactionDeadline: return "TransactionDeadline";
  }
  return "?";
}

EventId Scheduler::schedule(SimTime at, EventKind kind, std::uint64_t payload) {
  if (at < now_) {
    std::ostringstream os;
    os << "event " << to_string(kind) << " scheduled at t=" << at.micros()
       << "us, before the clock (t=" << now_.micros() << "us)";
    throw SchedulingError(os.str());
  }
  const EventId id = next_seq_++;
  retired_.push_back(false);
  heap_.push(Event{at, id, kind, payload});
  return id;
}

void Scheduler::cancel(EventId id) {
  if (id >= next_seq_ || retired_[id]) return;
  retired_[id] = true;
  ++cancelled_in_heap_;
}

std::optional<Event> Scheduler::next(SimTime until) {
  while (!heap_.empty()) {
    const Event& top = heap_.top();
    if (retired_[top.seq]) {
      heap_.pop();
      --cancelled_in_heap_;
      continue;
    }
    if (top.at > until) return std::nullopt;
    Event ev = top;
    heap_.pop();
    retired_[ev.seq] = true;
    now_ = ev.at;
    ++processed_;
    return ev;
  }
  return std::nullopt;
}

}  // namespace permasim
