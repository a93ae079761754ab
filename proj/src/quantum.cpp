#include "permasim/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace permasim::quantum {

void validate(const QuantumParams& p, std::string_view prefix, std::vector<std::string>& errors) {
  auto err = [&](std::string_view key, std::string_view what) {
    std::ostringstream os;
    os << prefix << '.' << key << ": " << what;
    errors.push_back(os.str());
  };
  if (!(p.p_channel >= 0.0 && p.p_channel <= 1.0)) err("p_channel", "must lie in [0, 1]");
  if (!(p.alpha >= 1.0)) err("alpha", "must be >= 1");
  if (!(p.beta >= 0.0 && p.beta <= 1.0)) err("beta", "must lie in [0, 1]");
  if (p.pairs_per_msg < 1) err("pairs_per_msg", "must be >= 1");
  if (!(p.gen_rate >= 0.0)) err("gen_rate", "must be >= 0");
  if (!(p.classical_overhead_rho > 0.0 && p.classical_overhead_rho <= 1.0)) {
    err("rho", "must lie in (0, 1]");
  }
}

double superadditive_success(std::span<const double> ps, double alpha) {
  if (ps.empty()) throw std::invalid_argument("superadditive_success: empty probability list");
  double log_fail = 0.0;
  for (double p : ps) {
    if (p >= 1.0) return 1.0;
    log_fail += std::log1p(-std::max(0.0, p));
  }
  return std::clamp(-std::expm1(alpha * log_fail), 0.0, 1.0);
}

double superposed_success(double p1, double p2, double beta) {
  const double hi = std::max(p1, p2);
  const double lo = std::min(p1, p2);
  return std::clamp(hi + beta * lo * (1.0 - hi), 0.0, 1.0);
}

double effective_success(const QuantumParams& params) {
  const std::vector<double> uses(params.pairs_per_msg, params.p_channel);
  const double q = superadditive_success(uses, params.alpha);
  return superposed_success(q, q, params.beta);
}

std::uint32_t residual_bits(const QuantumParams& params, std::uint32_t size_bits) {
  const double r = std::ceil(static_cast<double>(size_bits) * params.classical_overhead_rho);
  return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(r));
}

QuantumCounters& QuantumCounters::operator+=(const QuantumCounters& o) {
  pairs_generated += o.pairs_generated;
  pairs_consumed += o.pairs_consumed;
  quantum_sent += o.quantum_sent;
  quantum_failed += o.quantum_failed;
  classical_fallbacks += o.classical_fallbacks;
  return *this;
}

QuantumLink::QuantumLink(QuantumParams params, RandomStream gen_stream,
                         RandomStream channel_stream, std::uint64_t initial_pairs)
    : params_(params),
      gen_stream_(gen_stream),
      channel_stream_(channel_stream),
      p_eff_(effective_success(params)),
      pair_buffer_(std::min(initial_pairs, params.buffer_cap)) {}

std::uint64_t entanglement_step(QuantumLink& link, double dt_s, RandomStream& stream) {
  if (!(dt_s > 0.0)) throw std::invalid_argument("entanglement_step: dt must be > 0");
  const std::uint64_t drawn = stream.poisson(link.params_.gen_rate * dt_s);
  const std::uint64_t room = link.params_.buffer_cap - link.pair_buffer_;
  const std::uint64_t added = std::min(drawn, room);
  link.pair_buffer_ += added;
  link.counters_.pairs_generated += added;
  return added;
}

std::uint64_t QuantumLink::advance_to(SimTime now) {
  if (now <= last_update_) return 0;
  const double dt = to_seconds(now - last_update_);
  last_update_ = now;
  if (pair_buffer_ >= params_.buffer_cap || params_.gen_rate <= 0.0) return 0;
  return entanglement_step(*this, dt, gen_stream_);
}

bool QuantumLink::consume_pairs() {
  if (pair_buffer_ < params_.pairs_per_msg) return false;
  pair_buffer_ -= params_.pairs_per_msg;
  counters_.pairs_consumed += params_.pairs_per_msg;
  return true;
}

bool QuantumLink::channel_succeeds(std::uint64_t key) {
  const double p = p_eff_;
  const double u = key != 0 ? channel_stream_.uniform_at(key) : channel_stream_.uniform();
  return u < p;
}

QuantumDecision quantum_prepare(QuantumLink& link, const net::Message& msg, SimTime now) {
  link.advance_to(now);
  if (!link.consume_pairs()) {
    ++link.counters().classical_fallbacks;
    return QuantumDecision{false, false, msg};
  }
  ++link.counters().quantum_sent;
  if (!link.channel_succeeds(msg.key())) {
    ++link.counters().quantum_failed;
    return QuantumDecision{true, false, msg};
  }
  return QuantumDecision{true, true, msg.resized(residual_bits(link.params(), msg.size_bits()))};
}

net::TransmitOutcome quantum_transmit(QuantumLink& link, const net::Message& msg,
                                      net::SharedMedium& medium, SimTime now) {
  return medium.transmit(quantum_prepare(link, msg, now).classical, now);
}

}  // namespace permasim::quantum
