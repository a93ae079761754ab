#include "permasim/netmodel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace permasim::net {

void validate(const LinkParams& params, std::string_view prefix, std::vector<std::string>& errors) {
  auto err = [&](std::string_view key, std::string_view what) {
    std::ostringstream os;
    os << prefix << '.' << key << ": " << what;
    errors.push_back(os.str());
  };
  if (!(params.capacity_bps > 0.0)) err("capacity_bps", "must be > 0");
  if (params.buffer_slots < 1) err("buffer_slots", "must be >= 1");
  if (!(params.base_loss >= 0.0 && params.base_loss <= 1.0)) err("base_loss", "must lie in [0, 1]");
}

double loss_probability(const LinkParams& params, std::uint32_t size_bits) {
  if (params.reference_bits == 0 || params.base_loss <= 0.0 || params.base_loss >= 1.0) {
    return params.base_loss;
  }
  const double scale = static_cast<double>(size_bits) / params.reference_bits;
  return -std::expm1(scale * std::log1p(-params.base_loss));
}

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::DataReport: return "DataReport";
    case MessageKind::PrePrepare: return "PrePrepare";
    case MessageKind::Prepare: return "Prepare";
    case MessageKind::Commit: return "Commit";
    case MessageKind::RepFeedback: return "RepFeedback";
    case MessageKind::FqcCoordination: return "FqcCoordination";
    case MessageKind::Ack: return "Ack";
  }
  return "?";
}

std::string_view to_string(TransmitStatus status) {
  switch (status) {
    case TransmitStatus::Delivered: return "Delivered";
    case TransmitStatus::DroppedCongestion: return "Dropped(Congestion)";
    case TransmitStatus::DroppedLoss: return "Dropped(Loss)";
    case TransmitStatus::BufferedDtn: return "Buffered(DTN)";
  }
  return "?";
}

Message::Message(NodeId src, NodeId dst, MessageKind kind, std::uint32_t size_bits, TxId tx,
                 std::uint64_t key)
    : src_(src), dst_(dst), kind_(kind), size_bits_(size_bits), tx_(tx), key_(key) {
  if (size_bits == 0) throw std::invalid_argument("message size must be > 0 bits");
}

Message Message::resized(std::uint32_t size_bits) const {
  return Message(src_, dst_, kind_, size_bits, tx_, key_);
}

double airtime(double size_bits, double capacity_bps) {
  if (!(capacity_bps > 0.0)) throw std::invalid_argument("link capacity must be > 0");
  return size_bits / capacity_bps;
}

Duration airtime_duration(std::uint32_t size_bits, double capacity_bps) {
  return seconds(airtime(static_cast<double>(size_bits), capacity_bps));
}

LinkCounters& LinkCounters::operator+=(const LinkCounters& o) {
  offered += o.offered;
  bits_offered += o.bits_offered;
  delivered += o.delivered;
  dropped_congestion += o.dropped_congestion;
  dropped_loss += o.dropped_loss;
  dtn_buffered += o.dtn_buffered;
  dtn_expired += o.dtn_expired;
  return *this;
}

// ---------------------------------------------------------------------------

SharedMedium::SharedMedium(LinkParams params, RandomStream loss_stream)
    : params_(params), loss_stream_(loss_stream) {
  if (!(params_.capacity_bps > 0.0)) throw std::invalid_argument("link capacity must be > 0");
  if (params_.buffer_slots < 1) throw std::invalid_argument("buffer_slots must be >= 1");
}

void SharedMedium::purge(SimTime now) {
  while (!departures_.empty() && departures_.front() <= now) departures_.pop_front();
}

std::size_t SharedMedium::occupancy(SimTime now) {
  purge(now);
  return departures_.size();
}

SimTime SharedMedium::occupancy_below_at(std::size_t level, SimTime now) {
  if (level < 1) throw std::invalid_argument("occupancy level must be >= 1");
  purge(now);
  if (departures_.size() < level) return now;
  return departures_[departures_.size() - level];
}

TransmitOutcome SharedMedium::transmit(const Message& msg, SimTime now) {
  ++counters_.offered;
  counters_.bits_offered += msg.size_bits();
  purge(now);
  if (departures_.size() >= params_.buffer_slots) {
    ++counters_.dropped_congestion;
    return {TransmitStatus::DroppedCongestion, now};
  }
  const SimTime start = busy_until_ > now ? busy_until_ : now;
  const SimTime done = start + airtime_duration(msg.size_bits(), params_.capacity_bps);
  busy_until_ = done;
  departures_.push_back(done);

  const double p_loss = loss_probability(params_, msg.size_bits());
  const double u = msg.key() != 0 ? loss_stream_.uniform_at(msg.key()) : loss_stream_.uniform();
  if (u < p_loss) {
    ++counters_.dropped_loss;
    return {TransmitStatus::DroppedLoss, done};
  }
  ++counters_.delivered;
  return {TransmitStatus::Delivered, done};
}

// ---------------------------------------------------------------------------

double NvisState::mean_up_s() const {
  if (availability >= 1.0) return std::numeric_limits<double>::infinity();
  return mean_down_s * availability / (1.0 - availability);
}

Duration nvis_next_transition(const NvisState& state, RandomStream& stream) {
  const double mean = state.phase == NvisPhase::Up ? state.mean_up_s() : state.mean_down_s;
  if (std::isinf(mean)) return Duration::max();
  if (!(mean > 0.0)) return Duration{0};
  // At least one microsecond so that phases strictly alternate in time.
  const Duration d = seconds(stream.exponential(mean));
  return d.count() > 0 ? d : Duration{1};
}

NvisState nvis_initial_state(double availability, double mean_down_s, RandomStream& stream) {
  NvisState s;
  s.availability = availability;
  s.mean_down_s = mean_down_s;
  s.phase = stream.bernoulli(availability) ? NvisPhase::Up : NvisPhase::Down;
  // Exponential holding times are memoryless, so the residual of the
  // current phase has the same law as a fresh phase.
  s.next_transition = SimTime{} + nvis_next_transition(s, stream);
  return s;
}

FlushResult dtn_flush(DtnBuffer& buffer, SharedMedium& medium, SimTime now) {
  FlushResult result;
  while (!buffer.empty()) {
    const Bundle& b = buffer.front();
    if (now - b.enqueued > buffer.ttl()) {
      ++medium.counters().dtn_expired;
      result.expired.push_back(b.msg);
      buffer.pop_front();
      continue;
    }
    if (!medium.has_room(now)) {
      result.resume_at = medium.next_slot_free(now);
      break;
    }
    // The offer itself was counted when the bundle entered the buffer.
    --medium.counters().offered;
    medium.counters().bits_offered -= b.msg.size_bits();
    result.offered.push_back(FlushedBundle{b.msg, medium.transmit(b.msg, now)});
    buffer.pop_front();
  }
  return result;
}

NvisLink::NvisLink(LinkParams params, NvisState initial, Duration ttl, RandomStream loss_stream,
                   RandomStream phase_stream)
    : medium_(params, loss_stream), state_(initial), buffer_(ttl), phase_stream_(phase_stream) {}

TransmitOutcome NvisLink::transmit(const Message& msg, SimTime now) {
  if (state_.phase == NvisPhase::Down || !buffer_.empty() || !medium_.has_room(now)) {
    auto& c = medium_.counters();
    ++c.offered;
    c.bits_offered += msg.size_bits();
    ++c.dtn_buffered;
    buffer_.push(msg, now);
    return {TransmitStatus::BufferedDtn, now};
  }
  return medium_.transmit(msg, now);
}

SimTime NvisLink::transition(SimTime now) {
  state_.phase = state_.phase == NvisPhase::Up ? NvisPhase::Down : NvisPhase::Up;
  state_.next_transition = now + nvis_next_transition(state_, phase_stream_);
  return state_.next_transition;
}

FlushResult NvisLink::flush(SimTime now) {
  if (state_.phase == NvisPhase::Down) return {};
  return dtn_flush(buffer_, medium_, now);
}

}  // namespace permasim::net
