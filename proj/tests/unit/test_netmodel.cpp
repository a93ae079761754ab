#include <doctest.h>

#include <cmath>

#include "permasim/netmodel.hpp"

using namespace permasim;
using namespace permasim::net;

namespace {

Message msg(std::uint32_t bits, std::uint64_t key = 0) {
  return Message(1, 2, MessageKind::DataReport, bits, TxId{0, 0}, key);
}

LinkParams ideal(std::size_t slots = 50) { return LinkParams{4800.0, slots, 0.0, 0}; }

}  // namespace

TEST_CASE("airtime") {
  CHECK(airtime(4800, 4800) == doctest::Approx(1.0));
  CHECK(airtime(800, 4800) == doctest::Approx(0.1667).epsilon(1e-3));
  CHECK_THROWS_AS(airtime(800, 0.0), std::invalid_argument);
  CHECK(airtime_duration(800, 4800).count() == 166'667);
}

TEST_CASE("zero-size messages are rejected") {
  CHECK_THROWS_AS(msg(0), std::invalid_argument);
  CHECK_THROWS_AS(msg(800).resized(0), std::invalid_argument);
}

TEST_CASE("link validation names the key") {
  std::vector<std::string> errors;
  validate(LinkParams{0.0, 0, 1.5, 0}, "lora", errors);
  REQUIRE(errors.size() == 3);
  for (const auto& e : errors) CHECK(e.rfind("lora.", 0) == 0);
}

TEST_CASE("size-scaled loss probability") {
  const LinkParams flat{5000, 40, 0.01, 0};
  CHECK(loss_probability(flat, 1) == doctest::Approx(0.01));
  CHECK(loss_probability(flat, 100000) == doctest::Approx(0.01));
  const LinkParams scaled{4800, 50, 0.35, 800};
  CHECK(loss_probability(scaled, 800) == doctest::Approx(0.35));
  CHECK(loss_probability(scaled, 200) == doctest::Approx(1 - std::pow(0.65, 0.25)));
  CHECK(loss_probability(scaled, 1600) == doctest::Approx(1 - 0.65 * 0.65));
  for (std::uint32_t b = 1; b < 5000; b += 37) {
    CHECK(loss_probability(scaled, b) <= loss_probability(scaled, b + 37));
  }
}

TEST_CASE("ideal empty medium delivers at now + airtime") {
  SharedMedium m(ideal(), RandomStream(1, "m"));
  const SimTime now = SimTime::from_seconds(12.0);
  const auto out = m.transmit(msg(4800), now);
  CHECK(out.status == TransmitStatus::Delivered);
  CHECK(out.at == now + seconds(1.0));
  // second message queues behind the first
  const auto out2 = m.transmit(msg(2400), now);
  CHECK(out2.at == now + seconds(1.5));
}

TEST_CASE("full drop-tail buffer drops on congestion") {
  SharedMedium m(ideal(1), RandomStream(1, "m"));
  const SimTime now;
  CHECK(m.transmit(msg(800), now).status == TransmitStatus::Delivered);
  CHECK(m.transmit(msg(800), now).status == TransmitStatus::DroppedCongestion);
  CHECK(m.next_slot_free(now) == now + airtime_duration(800, 4800));
  CHECK(m.transmit(msg(800), m.next_slot_free(now)).status == TransmitStatus::Delivered);
  const auto& c = m.counters();
  CHECK(c.offered == 3);
  CHECK(c.delivered == 2);
  CHECK(c.dropped_congestion == 1);
}

TEST_CASE("offered = delivered + dropped on a lossy, congested medium") {
  SharedMedium m(LinkParams{5000, 10, 0.2, 0}, RandomStream(9, "m"));
  RandomStream arrivals(9, "arrivals");
  SimTime t;
  for (int i = 0; i < 5000; ++i) {
    t = t + seconds(arrivals.exponential(0.1));
    m.transmit(msg(512), t);
  }
  const auto& c = m.counters();
  CHECK(c.offered == 5000);
  CHECK(c.offered == c.delivered + c.dropped_congestion + c.dropped_loss);
  CHECK(c.dropped_congestion > 0);
  // loss applies to admitted messages only
  const double admitted = static_cast<double>(c.offered - c.dropped_congestion);
  CHECK(static_cast<double>(c.dropped_loss) / admitted == doctest::Approx(0.2).epsilon(0.1));
}

TEST_CASE("congestion drops grow with offered load") {
  auto drops = [](double rate) {
    SharedMedium m(LinkParams{5000, 20, 0.0, 0}, RandomStream(5, "m"));
    RandomStream arrivals(5, "arr");
    SimTime t;
    for (int i = 0; i < 4000; ++i) {
      t = t + seconds(arrivals.exponential(1.0 / rate));
      m.transmit(msg(500), t);
    }
    return m.counters().dropped_congestion;
  };
  std::uint64_t prev = 0;
  for (double rate : {5.0, 9.0, 12.0, 20.0, 40.0}) {
    const auto d = drops(rate);
    CHECK(d >= prev);
    prev = d;
  }
  CHECK(prev > 0);
}

TEST_CASE("keyed loss draws depend on the message identity only") {
  SharedMedium a(LinkParams{5000, 50, 0.5, 0}, RandomStream(2, "m"));
  SharedMedium b(LinkParams{5000, 50, 0.5, 0}, RandomStream(2, "m"));
  b.transmit(msg(100), SimTime{});  // consumes a sequential draw
  for (std::uint64_t k = 1; k <= 200; ++k) {
    const SimTime t = SimTime::from_seconds(static_cast<double>(k));
    CHECK(a.transmit(msg(100, k), t).status == b.transmit(msg(100, k), t).status);
  }
}

TEST_CASE("NVIS on/off process") {
  NvisState s;
  s.availability = 0.7;
  s.mean_down_s = 3600;
  CHECK(s.mean_up_s() == doctest::Approx(8400.0));

  SUBCASE("A = 1 never goes down") {
    RandomStream r(1, "nvis");
    const NvisState st = nvis_initial_state(1.0, 3600, r);
    CHECK(st.phase == NvisPhase::Up);
    CHECK(st.next_transition == SimTime::max());
  }

  SUBCASE("phase durations have the stationary means") {
    RandomStream r(2, "nvis");
    NvisState st = s;
    double up = 0, down = 0;
    for (int i = 0; i < 20000; ++i) {
      st.phase = NvisPhase::Up;
      up += to_seconds(nvis_next_transition(st, r));
      st.phase = NvisPhase::Down;
      down += to_seconds(nvis_next_transition(st, r));
    }
    CHECK(up / 20000 == doctest::Approx(8400.0).epsilon(0.03));
    CHECK(down / 20000 == doctest::Approx(3600.0).epsilon(0.03));
  }
}

TEST_CASE("NVIS Monte Carlo up fraction at A = 0.85") {
  // 10^6 alternating phases of the two-state process
  RandomStream r(11, "nvis-mc");
  NvisState st = nvis_initial_state(0.85, 3600, r);
  double up = 0, total = 0;
  for (int i = 0; i < 1'000'000; ++i) {
    const double d = to_seconds(nvis_next_transition(st, r));
    if (st.phase == NvisPhase::Up) up += d;
    total += d;
    st.phase = st.phase == NvisPhase::Up ? NvisPhase::Down : NvisPhase::Up;
  }
  CHECK(std::abs(up / total - 0.85) < 0.01);
}

TEST_CASE("DTN flush") {
  SharedMedium m(ideal(), RandomStream(1, "m"));
  DtnBuffer buf(seconds(86400));

  SUBCASE("empty buffer") {
    const auto r = dtn_flush(buf, m, SimTime{});
    CHECK(r.offered.empty());
    CHECK(r.expired.empty());
    CHECK(!r.resume_at);
  }
  SUBCASE("expired bundle is discarded and counted") {
    buf.push(msg(800, 1), SimTime{});
    buf.push(msg(800, 2), SimTime::from_seconds(50000));
    const auto r = dtn_flush(buf, m, SimTime::from_seconds(86401));
    REQUIRE(r.expired.size() == 1);
    CHECK(r.expired[0].key() == 1);
    CHECK(r.offered.size() == 1);
    CHECK(m.counters().dtn_expired == 1);
  }
  SUBCASE("FIFO order") {
    for (std::uint64_t k = 1; k <= 3; ++k) buf.push(msg(800, k), SimTime{});
    const auto r = dtn_flush(buf, m, SimTime::from_seconds(10));
    REQUIRE(r.offered.size() == 3);
    for (std::uint64_t k = 0; k < 3; ++k) {
      CHECK(r.offered[k].msg.key() == k + 1);
      CHECK(r.offered[k].outcome.status == TransmitStatus::Delivered);
    }
    CHECK(r.offered[0].outcome.at < r.offered[1].outcome.at);
    CHECK(buf.empty());
  }
  SUBCASE("pauses on a full queue instead of dropping") {
    SharedMedium small(ideal(2), RandomStream(1, "m"));
    for (std::uint64_t k = 1; k <= 5; ++k) buf.push(msg(800, k), SimTime{});
    auto r = dtn_flush(buf, small, SimTime{});
    CHECK(r.offered.size() == 2);
    REQUIRE(r.resume_at);
    CHECK(buf.size() == 3);
    r = dtn_flush(buf, small, *r.resume_at);
    CHECK(r.offered.size() == 1);
    CHECK(small.counters().dropped_congestion == 0);
  }
}

TEST_CASE("NVIS link buffers while down and releases on the next up phase") {
  NvisState st;
  st.availability = 0.5;
  st.phase = NvisPhase::Down;
  NvisLink link(ideal(), st, seconds(86400), RandomStream(1, "l"), RandomStream(1, "p"));
  const SimTime t0 = SimTime::from_seconds(100);
  CHECK(link.transmit(msg(800, 1), t0).status == TransmitStatus::BufferedDtn);
  CHECK(link.flush(t0).offered.empty());
  const SimTime up_at = SimTime::from_seconds(5000);
  link.transition(up_at);
  REQUIRE(link.up());
  // a new message queues behind the custody backlog
  CHECK(link.transmit(msg(800, 2), up_at).status == TransmitStatus::BufferedDtn);
  const auto r = link.flush(up_at);
  REQUIRE(r.offered.size() == 2);
  CHECK(r.offered[0].msg.key() == 1);
  CHECK(r.offered[0].outcome.status == TransmitStatus::Delivered);
  CHECK(r.offered[0].outcome.at == up_at + airtime_duration(800, 4800));
  CHECK(link.counters().offered == 2);
  CHECK(link.counters().dtn_buffered == 2);
  CHECK(link.counters().delivered == 2);
  CHECK(link.transmit(msg(800, 3), up_at).status == TransmitStatus::Delivered);
}
