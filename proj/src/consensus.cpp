#include "permasim/consensus.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace permasim::consensus {

std::uint32_t byzantine_tolerance(std::uint32_t n) {
  if (n == 0) throw std::invalid_argument("byzantine_tolerance: group size must be >= 1");
  return (n - 1) / 3;
}

std::uint64_t pbft_message_count(std::uint32_t n) {
  if (n == 0) throw std::invalid_argument("pbft_message_count: group size must be >= 1");
  const std::uint64_t m = n - 1;
  return m + m * m + static_cast<std::uint64_t>(n) * m;
}

std::uint64_t fqc_message_count(std::uint32_t n, std::uint32_t c) {
  if (n == 0) throw std::invalid_argument("fqc_message_count: group size must be >= 1");
  return static_cast<std::uint64_t>(c) * n;
}

Majority majority(std::span<const Proposal> proposals) {
  if (proposals.empty()) throw std::invalid_argument("majority_value: no proposals");
  Majority best;
  std::uint32_t best_first_id = 0;
  bool have = false;
  for (const Proposal& p : proposals) {
    std::uint32_t support = 0;
    std::uint32_t first_id = p.sensor;
    for (const Proposal& q : proposals) {
      if (q.value == p.value) {
        ++support;
        first_id = std::min(first_id, q.sensor);
      }
    }
    if (!have || support > best.support || (support == best.support && first_id < best_first_id)) {
      best = {p.value, support};
      best_first_id = first_id;
      have = true;
    }
  }
  return best;
}

double majority_value(std::span<const Proposal> proposals) { return majority(proposals).value; }

void validate(const ConsensusParams& p, std::string_view prefix, std::vector<std::string>& errors) {
  auto err = [&](std::string_view key, std::string_view what) {
    std::ostringstream os;
    os << prefix << '.' << key << ": " << what;
    errors.push_back(os.str());
  };
  if (!(p.timeout_s > 0.0)) err("timeout_s", "must be > 0");
  if (p.max_retries > 250) err("max_retries", "must be <= 250");
  if (p.fqc_retries > 250) err("fqc_retries", "must be <= 250");
  if (p.fqc_c < 2) err("fqc_c", "must be >= 2");
  if (p.fqc_c > 250) err("fqc_c", "must be <= 250");
  if (p.message_bits < 1) err("message_bits", "must be >= 1");
}

std::string_view to_string(FailureReason reason) {
  switch (reason) {
    case FailureReason::Timeout: return "Timeout";
    case FailureReason::InsufficientQuorum: return "InsufficientQuorum";
  }
  return "?";
}

std::uint64_t message_key(std::uint64_t instance_key, const ProtocolMessage& m) {
  return hash_key(instance_key, static_cast<std::uint64_t>(m.kind), m.from, m.to, m.attempt,
                  m.phase);
}

// ---------------------------------------------------------------------------

InstanceBase::InstanceBase(std::vector<double> values, ConsensusParams params)
    : values_(std::move(values)), params_(params) {
  if (values_.empty()) throw std::invalid_argument("consensus instance: no members");
  if (values_.size() >= kCoordinator) throw std::invalid_argument("consensus instance: too many members");
  f_ = byzantine_tolerance(static_cast<std::uint32_t>(values_.size()));
}

void InstanceBase::start_attempt(std::uint8_t attempt, SimTime now, Outbox& out) {
  attempt_ = attempt;
  attempt_start_ = now;
  begin_attempt(now, out);
}

void InstanceBase::decide(double value, SimTime now) {
  if (outcome_) return;
  outcome_ = ConsensusOutcome{Decided{value}, msg_count_, now - first_start_};
}

bool InstanceBase::on_timeout(std::uint8_t attempt, SimTime now, Outbox& out) {
  if (finished() || attempt != attempt_) return false;
  if (attempt_ < max_retries()) {
    start_attempt(static_cast<std::uint8_t>(attempt_ + 1), now, out);
    return !finished();
  }
  std::vector<Proposal> props;
  props.reserve(values_.size());
  for (std::uint32_t i = 0; i < values_.size(); ++i) props.push_back({i, values_[i]});
  const FailureReason reason = majority(props).support < quorum()
                                   ? FailureReason::InsufficientQuorum
                                   : FailureReason::Timeout;
  outcome_ = ConsensusOutcome{Failed{reason}, msg_count_, now - first_start_};
  return false;
}

ConsensusOutcome InstanceBase::outcome() const {
  if (!outcome_) throw std::logic_error("consensus instance has not finished");
  ConsensusOutcome o = *outcome_;
  o.msg_count = msg_count_;
  return o;
}

// ---------------------------------------------------------------------------

PbftInstance::PbftInstance(std::vector<double> values, ConsensusParams params,
                           std::uint32_t primary_offset)
    : InstanceBase(std::move(values), params), primary_offset_(primary_offset) {}

void PbftInstance::start(SimTime now, Outbox& out) {
  first_start_ = now;
  start_attempt(0, now, out);
}

void PbftInstance::multicast(std::uint32_t from, net::MessageKind kind, double value, Outbox& out) {
  for (std::uint32_t to = 0; to < n(); ++to) {
    if (to == from) continue;
    emit(out, ProtocolMessage{kind, static_cast<std::uint16_t>(from), static_cast<std::uint16_t>(to),
                              attempt_, 0, value});
  }
}

void PbftInstance::begin_attempt(SimTime now, Outbox& out) {
  replicas_.assign(n(), Replica{});
  const std::uint32_t p = primary();
  proposal_ = values_[p];
  replicas_[p].pre_prepared = true;
  multicast(p, net::MessageKind::PrePrepare, proposal_, out);
  progress(p, now, out);
}

void PbftInstance::progress(std::uint32_t j, SimTime now, Outbox& out) {
  Replica& r = replicas_[j];
  const bool agrees = values_[j] == proposal_;
  if (!r.commit_sent && r.pre_prepared) {
    if (agrees && r.prepares_matching >= 2 * f_) {
      r.commit_sent = true;
      multicast(j, net::MessageKind::Commit, proposal_, out);
      ++r.commits_matching;
    } else if (!agrees && r.prepares_total >= 2 * f_) {
      r.commit_sent = true;
      multicast(j, net::MessageKind::Commit, values_[j], out);
    }
  }
  if (agrees && r.commit_sent && !r.committed && r.commits_matching >= quorum()) {
    r.committed = true;
    decide(proposal_, now);
  }
}

void PbftInstance::on_message(const ProtocolMessage& m, SimTime now, Outbox& out) {
  if (m.attempt != attempt_ || m.to >= n()) return;
  const std::uint32_t j = m.to;
  Replica& r = replicas_[j];
  switch (m.kind) {
    case net::MessageKind::PrePrepare:
      if (r.pre_prepared) return;
      r.pre_prepared = true;
      if (!r.prepare_sent) {
        r.prepare_sent = true;
        multicast(j, net::MessageKind::Prepare, values_[j], out);
        ++r.prepares_total;
        if (values_[j] == proposal_) ++r.prepares_matching;
      }
      break;
    case net::MessageKind::Prepare:
      ++r.prepares_total;
      if (m.value == proposal_) ++r.prepares_matching;
      break;
    case net::MessageKind::Commit:
      if (m.value == proposal_) ++r.commits_matching;
      break;
    default:
      return;
  }
  progress(j, now, out);
}

// ---------------------------------------------------------------------------

FqcInstance::FqcInstance(std::vector<double> values, ConsensusParams params)
    : InstanceBase(std::move(values), params) {
  if (params_.fqc_c < 2) throw std::invalid_argument("fqc: at least two phases required");
}

std::uint8_t FqcInstance::last_vote_phase() const {
  const std::uint32_t c = params_.fqc_c;
  return static_cast<std::uint8_t>(c % 2 == 0 ? c - 1 : c - 2);
}

void FqcInstance::start(SimTime now, Outbox& out) {
  first_start_ = now;
  if (n() == 1) {
    attempt_start_ = now;
    decide(values_[0], now);
    return;
  }
  start_attempt(0, now, out);
}

void FqcInstance::begin_attempt(SimTime, Outbox& out) {
  votes_.clear();
  for (std::uint32_t i = 0; i < n(); ++i) {
    emit(out, ProtocolMessage{net::MessageKind::FqcCoordination, kCoordinator,
                              static_cast<std::uint16_t>(i), attempt_, 0, 0.0});
  }
}

void FqcInstance::on_message(const ProtocolMessage& m, SimTime now, Outbox& out) {
  if (m.attempt != attempt_ || finished()) return;
  const std::uint8_t last = last_vote_phase();
  if (m.to != kCoordinator) {
    // Member: answer every coordinator phase with its own value.
    if (m.to < n() && m.phase < last) {
      emit(out, ProtocolMessage{net::MessageKind::FqcCoordination, m.to, kCoordinator, attempt_,
                                static_cast<std::uint8_t>(m.phase + 1), values_[m.to]});
    }
    return;
  }
  if (m.phase < last) {
    emit(out, ProtocolMessage{net::MessageKind::FqcCoordination, kCoordinator, m.from, attempt_,
                              static_cast<std::uint8_t>(m.phase + 1), 0.0});
    return;
  }
  votes_.push_back(Proposal{m.from, m.value});
  const auto support = static_cast<std::uint32_t>(std::count_if(
      votes_.begin(), votes_.end(), [&](const Proposal& p) { return p.value == m.value; }));
  if (support < quorum()) return;
  decide(m.value, now);
  if (params_.fqc_c % 2 == 1) {
    for (std::uint32_t i = 0; i < n(); ++i) {
      emit(out, ProtocolMessage{net::MessageKind::FqcCoordination, kCoordinator,
                                static_cast<std::uint16_t>(i), attempt_,
                                static_cast<std::uint8_t>(params_.fqc_c - 1), m.value});
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

/// Offers one protocol message; returns its arrival time if delivered.
using Carrier = std::function<std::optional<SimTime>(const ProtocolMessage&, SimTime)>;

ConsensusOutcome drive(InstanceBase& inst, SimTime now, const Carrier& carry) {
  Scheduler sched;
  std::vector<ProtocolMessage> inflight;
  Outbox out;
  std::optional<EventId> timeout;

  auto offer_all = [&](SimTime t) {
    for (const ProtocolMessage& m : out) {
      if (auto at = carry(m, t)) {
        sched.schedule(*at, EventKind::MessageDelivery, inflight.size());
        inflight.push_back(m);
      }
    }
    out.clear();
  };
  auto arm_timeout = [&] {
    if (inst.finished()) return;
    timeout = sched.schedule(inst.attempt_deadline(), EventKind::ConsensusTimeout, inst.attempt());
  };

  // Align the private clock with the caller's.
  sched.schedule(now, EventKind::MeasurementRound);
  sched.next();
  inst.start(now, out);
  arm_timeout();
  offer_all(now);

  while (auto ev = sched.next()) {
    if (ev->kind == EventKind::MessageDelivery) {
      inst.on_message(inflight[ev->payload], ev->at, out);
    } else if (ev->kind == EventKind::ConsensusTimeout) {
      if (inst.on_timeout(static_cast<std::uint8_t>(ev->payload), ev->at, out)) arm_timeout();
    }
    if (inst.decided() && timeout) {
      sched.cancel(*timeout);
      timeout.reset();
    }
    offer_all(ev->at);
  }
  return inst.outcome();
}

}  // namespace

ConsensusOutcome pbft_instance(std::span<const double> values, const ConsensusParams& params,
                               net::SharedMedium& medium, SimTime now,
                               std::uint32_t primary_offset, std::uint64_t instance_key) {
  PbftInstance inst(std::vector<double>(values.begin(), values.end()), params, primary_offset);
  return drive(inst, now, [&](const ProtocolMessage& m, SimTime t) -> std::optional<SimTime> {
    const net::Message msg(m.from, m.to, m.kind, params.message_bits, {}, message_key(instance_key, m));
    const auto o = medium.transmit(msg, t);
    if (o.status == net::TransmitStatus::Delivered) return o.at;
    return std::nullopt;
  });
}

ConsensusOutcome fqc_instance(std::span<const double> values, const ConsensusParams& params,
                              quantum::QuantumLink& qplane, net::SharedMedium& medium, SimTime now,
                              std::uint64_t instance_key) {
  FqcInstance inst(std::vector<double>(values.begin(), values.end()), params);
  return drive(inst, now, [&](const ProtocolMessage& m, SimTime t) -> std::optional<SimTime> {
    const net::Message msg(m.from, m.to, m.kind, params.message_bits, {}, message_key(instance_key, m));
    const auto o = quantum::quantum_transmit(qplane, msg, medium, t);
    if (o.status == net::TransmitStatus::Delivered) return o.at;
    return std::nullopt;
  });
}

}  // namespace permasim::consensus
