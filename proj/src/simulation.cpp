#include "permasim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <memory>

#include "permasim/consensus.hpp"
#include "permasim/engine.hpp"
#include "permasim/social.hpp"

namespace permasim {

std::uint64_t RunStats::successes() const {
  return static_cast<std::uint64_t>(
      std::count_if(resolutions.begin(), resolutions.end(), [](const auto& r) {
        return r.outcome == telemetry::Outcome::Success;
      }));
}

namespace {

using telemetry::Layer;
using net::MessageKind;
using net::TransmitStatus;

constexpr net::NodeId kControlCenter = 0xfffffffe;
constexpr std::uint32_t kNoInstance = 0xffffffff;

// Key tags keep loss draws of different message families apart.
enum : std::uint64_t { kTagLoraReport = 1, kTagCenterReport, kTagFeedback, kTagConsensus };

std::uint64_t pack(std::uint32_t hi, std::uint32_t lo) {
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

struct Reading {
  std::uint32_t sensor;
  double value;
};

/// Concentrator-side state of one (spot, round).
struct SpotRound {
  std::uint32_t round = 0xffffffff;
  telemetry::Transaction tx;
  std::vector<Reading> readings;  // participants' own readings
  std::vector<Reading> received;  // reports that reached the concentrator
  bool forwarded = false;
  double forwarded_value = 0.0;
  std::optional<double> decided;
};

enum class Hop : std::uint8_t { Uplink, LoraReport, CenterReport, CenterFeedback, Protocol };

struct Pending {
  Hop hop;
  std::uint32_t spot;
  std::uint32_t round;
  std::uint32_t sensor;
  double value;
  std::uint32_t instance;
  consensus::ProtocolMessage pm;
};

struct Instance {
  std::unique_ptr<consensus::InstanceBase> impl;
  std::uint32_t spot = 0;
  std::uint32_t round = 0;
  std::uint32_t conc = 0;
  std::uint64_t key = 0;
  std::uint32_t pending = 0;
  std::optional<EventId> timeout;
  bool reported = false;
};

struct CoordinatorMsg {
  std::uint32_t instance;
  consensus::ProtocolMessage pm;
};

// DtnFlush payload bit selecting the coordinator queue on the access medium.
constexpr std::uint64_t kCoordinatorQueue = 1ULL << 32;

struct FeedbackBatch {
  std::vector<std::pair<std::uint32_t, bool>> bits;
};

class Simulation {
 public:
  Simulation(const SimConfig& cfg, std::uint64_t seed);
  RunStats run();

 private:
  // Events
  void on_measurement(std::uint32_t spot, std::uint32_t round, SimTime now);
  void on_deadline(std::uint32_t spot, std::uint32_t round, SimTime now);
  void on_delivery(std::uint64_t idx, SimTime now);
  void on_transition(std::uint32_t conc, SimTime now);
  void on_flush(std::uint32_t conc, SimTime now);
  void on_timeout(std::uint32_t inst, std::uint8_t attempt, SimTime now);

  // Traffic
  void send_lora_report(std::uint32_t conc, const telemetry::SensorReading& r, SimTime now);
  void forward_to_center(std::uint32_t conc, SpotRound& sr, std::uint32_t spot, SimTime now);
  void send_feedback(std::uint32_t conc, std::uint32_t spot, std::uint32_t round,
                     FeedbackBatch batch, SimTime now);
  net::Message maybe_quantum(std::uint32_t conc, const net::Message& msg, bool quantum, SimTime now);
  void nvis_send(std::uint32_t conc, const net::Message& msg, SimTime now);
  void nvis_outcome(std::uint32_t conc, const net::Message& msg, net::TransmitOutcome o, SimTime now);
  void ensure_flush(std::uint32_t conc, SimTime now);
  void pump_coordinator(std::uint32_t conc, SimTime now);

  // Consensus
  void start_instance(std::uint32_t conc, std::uint32_t spot, std::uint32_t round,
                      const std::vector<Reading>& members, SimTime now);
  void dispatch(std::uint32_t idx, SimTime now);
  void settle(std::uint32_t idx, SimTime now);
  void arm_timeout(std::uint32_t idx);

  std::uint64_t schedule_pending(const Pending& p, SimTime at, EventKind kind);
  SpotRound* slot(std::uint32_t spot, std::uint32_t round);
  SpotRound& fresh_slot(std::uint32_t spot, std::uint32_t round);
  SimTime sample_time(std::uint32_t spot, std::uint32_t round) const;

  const SimConfig& cfg_;
  const telemetry::Topology topo_;
  const telemetry::Mode mode_;
  Scheduler sched_;
  RunStats stats_;

  std::uint32_t rounds_ = 0;
  SimTime horizon_;
  SimTime last_activity_;
  std::uint32_t ring_ = 1;

  RandomStream truth_stream_;
  RandomStream sensor_stream_;
  RandomStream jitter_stream_;
  RandomStream order_stream_;

  std::vector<net::SharedMedium> lora_;
  std::vector<net::NvisLink> nvis_;
  std::vector<bool> flush_scheduled_;
  std::vector<std::deque<CoordinatorMsg>> coord_queue_;
  std::vector<bool> coord_scheduled_;
  std::vector<quantum::QuantumLink> qlinks_;
  social::ReputationTable reputation_;

  std::vector<SpotRound> slots_;  // spot-major ring of `ring_` rounds
  std::vector<Pending> pending_;
  std::vector<std::uint32_t> free_pending_;
  std::vector<Instance> instances_;
  std::vector<std::uint32_t> free_instances_;
  std::map<std::uint64_t, FeedbackBatch> feedback_;
  consensus::Outbox outbox_;
};

Simulation::Simulation(const SimConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      topo_(cfg.topology),
      mode_(cfg.mode),
      truth_stream_(seed, "truth"),
      sensor_stream_(seed, "sensor"),
      jitter_stream_(seed, "jitter"),
      order_stream_(seed, "order"),
      reputation_(cfg.social) {
  const double h = cfg.duration_days * 86400.0;
  horizon_ = SimTime::from_seconds(h);
  rounds_ = static_cast<std::uint32_t>(std::ceil(h / cfg.measurement_period_s - 1e-9));
  while (rounds_ > 0 && SimTime::from_seconds((rounds_ - 1) * cfg.measurement_period_s) >= horizon_) {
    --rounds_;
  }
  last_activity_ = horizon_ + seconds(cfg.spot_jitter_s + cfg.deadline_s);
  ring_ = static_cast<std::uint32_t>(
              std::ceil((cfg.deadline_s + cfg.spot_jitter_s) / cfg.measurement_period_s)) + 2;
  slots_.resize(static_cast<std::size_t>(topo_.spots) * ring_);

  RandomStream avail(seed, "availability");
  stats_.availability = avail.uniform(cfg.nvis.availability_min, cfg.nvis.availability_max);
  if (cfg.nvis.availability_max <= cfg.nvis.availability_min) stats_.availability = cfg.nvis.availability_min;

  for (std::uint32_t c = 0; c < topo_.concentrators; ++c) {
    lora_.emplace_back(cfg.lora, RandomStream(seed, "lora-loss").derive(c));
    RandomStream phase = RandomStream(seed, "nvis-phase").derive(c);
    const net::NvisState init = net::nvis_initial_state(stats_.availability, cfg.nvis.mean_down_s, phase);
    nvis_.emplace_back(cfg.nvis.link, init, seconds(cfg.nvis.dtn_ttl_s),
                       RandomStream(seed, "nvis-loss").derive(c), phase);
    qlinks_.emplace_back(cfg.quantum, RandomStream(seed, "qgen").derive(c),
                         RandomStream(seed, "qchannel").derive(c));
    if (init.next_transition <= last_activity_) {
      sched_.schedule(init.next_transition, EventKind::LinkTransition, c);
    }
  }
  flush_scheduled_.assign(topo_.concentrators, false);
  coord_queue_.resize(topo_.concentrators);
  coord_scheduled_.assign(topo_.concentrators, false);

  if (mode_.social != Layer::None) {
    for (std::uint32_t s = 0; s < topo_.sensor_count(); ++s) reputation_.register_sensor(s);
  }
  if (rounds_ > 0) {
    for (std::uint32_t spot = 0; spot < topo_.spots; ++spot) {
      sched_.schedule(sample_time(spot, 0), EventKind::MeasurementRound, pack(0, spot));
    }
  }
}

SimTime Simulation::sample_time(std::uint32_t spot, std::uint32_t round) const {
  const double j = cfg_.spot_jitter_s * jitter_stream_.uniform_at(pack(round, spot));
  return SimTime::from_seconds(round * cfg_.measurement_period_s + j);
}

SpotRound* Simulation::slot(std::uint32_t spot, std::uint32_t round) {
  SpotRound& s = slots_[static_cast<std::size_t>(spot) * ring_ + round % ring_];
  return s.round == round ? &s : nullptr;
}

SpotRound& Simulation::fresh_slot(std::uint32_t spot, std::uint32_t round) {
  SpotRound& s = slots_[static_cast<std::size_t>(spot) * ring_ + round % ring_];
  s.round = round;
  s.readings.clear();
  s.received.clear();
  s.forwarded = false;
  s.forwarded_value = 0.0;
  s.decided.reset();
  return s;
}

std::uint64_t Simulation::schedule_pending(const Pending& p, SimTime at, EventKind kind) {
  std::uint32_t idx;
  if (!free_pending_.empty()) {
    idx = free_pending_.back();
    free_pending_.pop_back();
    pending_[idx] = p;
  } else {
    idx = static_cast<std::uint32_t>(pending_.size());
    pending_.push_back(p);
  }
  sched_.schedule(at, kind, idx);
  return idx;
}

RunStats Simulation::run() {
  std::uint64_t h = 0x7065726d6173696dULL;
  while (auto ev = sched_.next()) {
    h = hash_combine(h, static_cast<std::uint64_t>(ev->at.micros()));
    h = hash_combine(h, pack(static_cast<std::uint32_t>(ev->kind), 0) ^ ev->payload);
    switch (ev->kind) {
      case EventKind::MeasurementRound:
        on_measurement(static_cast<std::uint32_t>(ev->payload & 0xffffffff),
                       static_cast<std::uint32_t>(ev->payload >> 32), ev->at);
        break;
      case EventKind::TransactionDeadline:
        on_deadline(static_cast<std::uint32_t>(ev->payload & 0xffffffff),
                    static_cast<std::uint32_t>(ev->payload >> 32), ev->at);
        break;
      case EventKind::MessageDelivery: on_delivery(ev->payload, ev->at); break;
      case EventKind::LinkTransition: on_transition(static_cast<std::uint32_t>(ev->payload), ev->at); break;
      case EventKind::DtnFlush:
        if (ev->payload & kCoordinatorQueue) {
          coord_scheduled_[ev->payload & 0xffffffff] = false;
          pump_coordinator(static_cast<std::uint32_t>(ev->payload & 0xffffffff), ev->at);
        } else {
          on_flush(static_cast<std::uint32_t>(ev->payload), ev->at);
        }
        break;
      case EventKind::ConsensusTimeout:
        on_timeout(static_cast<std::uint32_t>(ev->payload >> 8),
                   static_cast<std::uint8_t>(ev->payload & 0xff), ev->at);
        break;
      case EventKind::EntanglementTick: break;  // generation is advanced lazily
    }
  }
  stats_.events = sched_.processed();
  stats_.trace_hash = h;
  for (std::uint32_t c = 0; c < topo_.concentrators; ++c) {
    stats_.lora += lora_[c].counters();
    stats_.nvis += nvis_[c].counters();
    stats_.quantum += qlinks_[c].counters();
  }
  if (mode_.social != Layer::None) {
    stats_.reputation.reserve(topo_.sensor_count());
    for (std::uint32_t s = 0; s < topo_.sensor_count(); ++s) {
      stats_.reputation.push_back(reputation_.reputation(s));
    }
  }
  return std::move(stats_);
}

// ---------------------------------------------------------------------------

void Simulation::on_measurement(std::uint32_t spot, std::uint32_t round, SimTime now) {
  if (round + 1 < rounds_) {
    sched_.schedule(sample_time(spot, round + 1), EventKind::MeasurementRound, pack(round + 1, spot));
  }
  const double truth = telemetry::ground_truth(truth_stream_, spot, round);
  SpotRound& sr = fresh_slot(spot, round);
  sr.tx = telemetry::Transaction(spot, round, truth, now + seconds(cfg_.deadline_s));
  sched_.schedule(sr.tx.deadline(), EventKind::TransactionDeadline, pack(round, spot));

  std::vector<std::uint32_t> cluster(topo_.redundancy);
  for (std::uint32_t k = 0; k < topo_.redundancy; ++k) cluster[k] = topo_.sensor_id(spot, k);
  std::vector<std::uint32_t> members =
      mode_.social != Layer::None ? reputation_.trusted_set(cluster) : cluster;
  // Arrival order within a spot is random but fixed per (spot, round, sensor).
  std::vector<std::pair<std::uint64_t, std::uint32_t>> order;
  order.reserve(members.size());
  for (std::uint32_t s : members) order.emplace_back(order_stream_.u64_at(pack(round, s)), s);
  std::sort(order.begin(), order.end());

  const std::uint32_t conc = topo_.concentrator_of(spot);
  std::vector<telemetry::SensorReading> readings;
  readings.reserve(order.size());
  for (const auto& [_, s] : order) {
    readings.push_back(telemetry::sense(spot, s, round, truth, cfg_.pb0_of(s), cfg_.fault,
                                        sensor_stream_.derive(s)));
    sr.readings.push_back({s, readings.back().value});
  }
  if (mode_.consensus == Layer::None) {
    for (const auto& r : readings) {
      const double delay = cfg_.uplink_jitter_s * jitter_stream_.uniform_at(hash_key(round, r.sensor, 1u));
      if (delay <= 0.0) {
        send_lora_report(conc, r, now);
      } else {
        schedule_pending(Pending{Hop::Uplink, spot, round, r.sensor, r.value, kNoInstance, {}},
                         now + seconds(delay), EventKind::MessageDelivery);
      }
    }
  } else {
    start_instance(conc, spot, round, sr.readings, now);
  }
}

void Simulation::on_deadline(std::uint32_t spot, std::uint32_t round, SimTime now) {
  SpotRound* sr = slot(spot, round);
  if (!sr) return;
  stats_.resolutions.push_back(sr->tx.resolve_deadline(now, cfg_.fault.tolerance));
  if (mode_.social == Layer::None) return;

  FeedbackBatch batch;
  if (mode_.consensus == Layer::None) {
    if (sr->received.empty()) return;
    std::vector<double> values;
    values.reserve(sr->received.size());
    for (const auto& r : sr->received) values.push_back(r.value);
    std::sort(values.begin(), values.end());
    const double reference = values[(values.size() - 1) / 2];
    for (const auto& r : sr->received) {
      batch.bits.emplace_back(r.sensor, telemetry::within_tolerance(r.value, reference, cfg_.fault.tolerance));
    }
  } else {
    if (!sr->decided) return;
    for (const auto& r : sr->readings) batch.bits.emplace_back(r.sensor, r.value == *sr->decided);
  }
  send_feedback(topo_.concentrator_of(spot), spot, round, std::move(batch), now);
}

void Simulation::on_delivery(std::uint64_t idx, SimTime now) {
  const Pending p = pending_[idx];
  free_pending_.push_back(static_cast<std::uint32_t>(idx));
  switch (p.hop) {
    case Hop::Uplink:
      send_lora_report(topo_.concentrator_of(p.spot),
                       telemetry::SensorReading{p.spot, p.sensor, p.round, p.value, false}, now);
      return;
    case Hop::LoraReport: {
      SpotRound* sr = slot(p.spot, p.round);
      if (!sr) return;
      sr->tx.remove_in_flight();
      sr->received.push_back({p.sensor, p.value});
      if (!sr->forwarded) {
        sr->forwarded = true;
        sr->forwarded_value = p.value;
        forward_to_center(topo_.concentrator_of(p.spot), *sr, p.spot, now);
      }
      return;
    }
    case Hop::CenterReport: {
      SpotRound* sr = slot(p.spot, p.round);
      if (!sr) return;
      sr->tx.remove_in_flight();
      sr->tx.accept(sr->forwarded_value, now);
      return;
    }
    case Hop::CenterFeedback: {
      auto it = feedback_.find(pack(p.round, p.spot));
      if (it == feedback_.end()) return;
      for (const auto& [sensor, bit] : it->second.bits) reputation_.record_feedback(sensor, bit, now);
      ++stats_.feedback_delivered;
      feedback_.erase(it);
      return;
    }
    case Hop::Protocol: {
      Instance& inst = instances_[p.instance];
      --inst.pending;
      inst.impl->on_message(p.pm, now, outbox_);
      dispatch(p.instance, now);
      settle(p.instance, now);
      return;
    }
  }
}

void Simulation::on_transition(std::uint32_t conc, SimTime now) {
  const SimTime next = nvis_[conc].transition(now);
  if (next <= last_activity_) sched_.schedule(next, EventKind::LinkTransition, conc);
  if (nvis_[conc].up()) on_flush(conc, now);
}

void Simulation::on_flush(std::uint32_t conc, SimTime now) {
  flush_scheduled_[conc] = false;
  net::FlushResult r = nvis_[conc].flush(now);
  for (const net::Message& m : r.expired) {
    if (m.kind() == MessageKind::RepFeedback) {
      feedback_.erase(pack(m.tx().round, m.tx().spot));
    } else if (SpotRound* sr = slot(m.tx().spot, m.tx().round)) {
      sr->tx.remove_in_flight();
    }
  }
  for (const net::FlushedBundle& b : r.offered) {
    if (b.msg.kind() == MessageKind::DataReport) {
      if (SpotRound* sr = slot(b.msg.tx().spot, b.msg.tx().round)) sr->tx.remove_in_flight();
    }
    nvis_outcome(conc, b.msg, b.outcome, now);
  }
  if (r.resume_at) {
    flush_scheduled_[conc] = true;
    sched_.schedule(*r.resume_at, EventKind::DtnFlush, conc);
  }
}

void Simulation::on_timeout(std::uint32_t idx, std::uint8_t attempt, SimTime now) {
  Instance& inst = instances_[idx];
  inst.timeout.reset();
  if (inst.impl->on_timeout(attempt, now, outbox_)) arm_timeout(idx);
  dispatch(idx, now);
  settle(idx, now);
}

// ---------------------------------------------------------------------------

net::Message Simulation::maybe_quantum(std::uint32_t conc, const net::Message& msg, bool use,
                                       SimTime now) {
  if (!use) return msg;
  return quantum::quantum_prepare(qlinks_[conc], msg, now).classical;
}

void Simulation::send_lora_report(std::uint32_t conc, const telemetry::SensorReading& r, SimTime now) {
  const net::Message msg(r.sensor, conc, MessageKind::DataReport, cfg_.sizes.data_report,
                         {r.spot, r.round}, hash_key(kTagLoraReport, r.spot, r.round, r.sensor));
  const net::Message carried = maybe_quantum(conc, msg, mode_.social == Layer::Quantum, now);
  const net::TransmitOutcome o = lora_[conc].transmit(carried, now);
  if (o.status != TransmitStatus::Delivered) return;
  if (SpotRound* sr = slot(r.spot, r.round)) sr->tx.add_in_flight();
  schedule_pending(Pending{Hop::LoraReport, r.spot, r.round, r.sensor, r.value, kNoInstance, {}}, o.at,
                   EventKind::MessageDelivery);
}

void Simulation::forward_to_center(std::uint32_t conc, SpotRound& sr, std::uint32_t spot, SimTime now) {
  const net::Message msg(conc, kControlCenter, MessageKind::DataReport, cfg_.sizes.data_report,
                         {spot, sr.round}, hash_key(kTagCenterReport, spot, sr.round));
  nvis_send(conc, maybe_quantum(conc, msg, mode_.social == Layer::Quantum, now), now);
}

void Simulation::send_feedback(std::uint32_t conc, std::uint32_t spot, std::uint32_t round,
                               FeedbackBatch batch, SimTime now) {
  if (batch.bits.empty()) return;
  feedback_[pack(round, spot)] = std::move(batch);
  const net::Message msg(conc, kControlCenter, MessageKind::RepFeedback, cfg_.sizes.feedback,
                         {spot, round}, hash_key(kTagFeedback, spot, round));
  nvis_send(conc, maybe_quantum(conc, msg, mode_.social == Layer::Quantum, now), now);
}

void Simulation::nvis_send(std::uint32_t conc, const net::Message& msg, SimTime now) {
  nvis_outcome(conc, msg, nvis_[conc].transmit(msg, now), now);
}

void Simulation::nvis_outcome(std::uint32_t conc, const net::Message& msg, net::TransmitOutcome o,
                              SimTime now) {
  const std::uint32_t spot = msg.tx().spot;
  const std::uint32_t round = msg.tx().round;
  const bool report = msg.kind() == MessageKind::DataReport;
  switch (o.status) {
    case TransmitStatus::Delivered:
      if (report) {
        if (SpotRound* sr = slot(spot, round)) sr->tx.add_in_flight();
      }
      schedule_pending(Pending{report ? Hop::CenterReport : Hop::CenterFeedback, spot, round, 0, 0.0,
                               kNoInstance, {}},
                       o.at, EventKind::MessageDelivery);
      return;
    case TransmitStatus::BufferedDtn:
      if (report) {
        if (SpotRound* sr = slot(spot, round)) sr->tx.add_in_flight();
      }
      ensure_flush(conc, now);
      return;
    case TransmitStatus::DroppedCongestion:
    case TransmitStatus::DroppedLoss:
      if (!report) feedback_.erase(pack(round, spot));
      return;
  }
}

void Simulation::ensure_flush(std::uint32_t conc, SimTime now) {
  if (flush_scheduled_[conc] || !nvis_[conc].up()) return;
  flush_scheduled_[conc] = true;
  sched_.schedule(nvis_[conc].medium().next_slot_free(now), EventKind::DtnFlush, conc);
}

// ---------------------------------------------------------------------------

void Simulation::start_instance(std::uint32_t conc, std::uint32_t spot, std::uint32_t round,
                                const std::vector<Reading>& members, SimTime now) {
  std::vector<double> values;
  values.reserve(members.size());
  for (const auto& m : members) values.push_back(m.value);

  std::uint32_t idx;
  if (!free_instances_.empty()) {
    idx = free_instances_.back();
    free_instances_.pop_back();
  } else {
    idx = static_cast<std::uint32_t>(instances_.size());
    instances_.emplace_back();
  }
  Instance& inst = instances_[idx];
  if (mode_.consensus == Layer::Classical) {
    inst.impl = std::make_unique<consensus::PbftInstance>(std::move(values), cfg_.consensus, round);
  } else {
    inst.impl = std::make_unique<consensus::FqcInstance>(std::move(values), cfg_.consensus);
  }
  inst.spot = spot;
  inst.round = round;
  inst.conc = conc;
  inst.key = hash_key(kTagConsensus, spot, round);
  inst.pending = 0;
  inst.timeout.reset();
  inst.reported = false;
  if (SpotRound* sr = slot(spot, round)) sr->tx.add_in_flight();

  inst.impl->start(now, outbox_);
  arm_timeout(idx);
  dispatch(idx, now);
  settle(idx, now);
}

void Simulation::arm_timeout(std::uint32_t idx) {
  Instance& inst = instances_[idx];
  if (inst.impl->finished()) return;
  inst.timeout = sched_.schedule(inst.impl->attempt_deadline(), EventKind::ConsensusTimeout,
                                 (static_cast<std::uint64_t>(idx) << 8) | inst.impl->attempt());
}

void Simulation::dispatch(std::uint32_t idx, SimTime now) {
  Instance& inst = instances_[idx];
  const bool quantum = mode_.consensus == Layer::Quantum;
  bool queued = false;
  for (const consensus::ProtocolMessage& m : outbox_) {
    if (m.from == consensus::kCoordinator) {
      // The concentrator paces its own transmissions instead of overflowing
      // its radio queue.
      ++inst.pending;
      coord_queue_[inst.conc].push_back({idx, m});
      queued = true;
      continue;
    }
    const net::Message msg(m.from, m.to, m.kind, cfg_.consensus.message_bits, {inst.spot, inst.round},
                           consensus::message_key(inst.key, m));
    const net::TransmitOutcome o = lora_[inst.conc].transmit(maybe_quantum(inst.conc, msg, quantum, now), now);
    if (o.status != TransmitStatus::Delivered) continue;
    ++inst.pending;
    schedule_pending(Pending{Hop::Protocol, inst.spot, inst.round, 0, 0.0, idx, m}, o.at,
                     EventKind::MessageDelivery);
  }
  outbox_.clear();
  if (queued) pump_coordinator(inst.conc, now);
}

void Simulation::pump_coordinator(std::uint32_t conc, SimTime now) {
  auto& queue = coord_queue_[conc];
  net::SharedMedium& medium = lora_[conc];
  const std::size_t limit = std::max<std::size_t>(1, cfg_.lora.buffer_slots / 2);
  while (!queue.empty()) {
    if (medium.occupancy(now) >= limit) {
      if (!coord_scheduled_[conc]) {
        coord_scheduled_[conc] = true;
        sched_.schedule(medium.occupancy_below_at(limit, now), EventKind::DtnFlush,
                        kCoordinatorQueue | conc);
      }
      return;
    }
    const CoordinatorMsg cm = queue.front();
    queue.pop_front();
    Instance& inst = instances_[cm.instance];
    const net::Message msg(cm.pm.from, cm.pm.to, cm.pm.kind, cfg_.consensus.message_bits,
                           {inst.spot, inst.round}, consensus::message_key(inst.key, cm.pm));
    const net::TransmitOutcome o =
        medium.transmit(maybe_quantum(conc, msg, mode_.consensus == Layer::Quantum, now), now);
    if (o.status == TransmitStatus::Delivered) {
      schedule_pending(Pending{Hop::Protocol, inst.spot, inst.round, 0, 0.0, cm.instance, cm.pm}, o.at,
                       EventKind::MessageDelivery);
    } else {
      --inst.pending;
      settle(cm.instance, now);
    }
  }
}

void Simulation::settle(std::uint32_t idx, SimTime now) {
  Instance& inst = instances_[idx];
  if (!inst.impl->finished()) return;
  if (!inst.reported) {
    inst.reported = true;
    ++stats_.consensus_instances;
    if (inst.timeout) {
      sched_.cancel(*inst.timeout);
      inst.timeout.reset();
    }
    SpotRound* sr = slot(inst.spot, inst.round);
    if (sr) sr->tx.remove_in_flight();
    if (inst.impl->decided()) {
      ++stats_.consensus_decided;
      if (sr) {
        const double v = inst.impl->outcome().value();
        sr->decided = v;
        sr->forwarded = true;
        sr->forwarded_value = v;
        forward_to_center(inst.conc, *sr, inst.spot, now);
      }
    }
  }
  if (inst.pending == 0) {
    stats_.consensus_messages += inst.impl->outcome().msg_count;
    inst.impl.reset();
    free_instances_.push_back(idx);
  }
}

}  // namespace

RunStats run(const SimConfig& config, std::uint64_t master_seed) {
  // An empty horizon is a legal run with no transactions; every other rule
  // of the config schema applies.
  SimConfig checked = config;
  if (checked.duration_days == 0.0) checked.duration_days = 1.0;
  harness::require_valid(checked);
  Simulation sim(config, master_seed);
  return sim.run();
}

}  // namespace permasim
