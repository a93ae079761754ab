#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "permasim/consensus.hpp"

using namespace permasim;
using namespace permasim::consensus;

namespace {

net::SharedMedium ideal_medium() {
  return net::SharedMedium(net::LinkParams{5000, 100000, 0.0, 0}, RandomStream(1, "medium"));
}

quantum::QuantumLink ideal_plane(std::uint64_t pairs = 100000) {
  quantum::QuantumParams p;
  p.p_channel = 1.0;
  p.buffer_cap = 100000;
  return quantum::QuantumLink(p, RandomStream(1, "gen"), RandomStream(1, "chan"), pairs);
}

// (n-1) pre-prepares, (n-1)^2 prepares, n(n-1) commits
std::uint64_t pbft_oracle(std::uint64_t n) {
  std::uint64_t pre = 0, prep = 0, commit = 0;
  for (std::uint64_t i = 1; i < n; ++i) ++pre;
  for (std::uint64_t b = 1; b < n; ++b) {
    for (std::uint64_t to = 0; to < n; ++to) prep += to != b;
  }
  for (std::uint64_t a = 0; a < n; ++a) {
    for (std::uint64_t to = 0; to < n; ++to) commit += to != a;
  }
  return pre + prep + commit;
}

}  // namespace

TEST_CASE("byzantine tolerance") {
  CHECK(byzantine_tolerance(1) == 0);
  CHECK(byzantine_tolerance(4) == 1);
  CHECK(byzantine_tolerance(5) == 1);
  CHECK(byzantine_tolerance(7) == 2);
  CHECK(byzantine_tolerance(10) == 3);
  CHECK_THROWS_AS(byzantine_tolerance(0), std::invalid_argument);
}

TEST_CASE("closed-form message counts") {
  CHECK(pbft_message_count(1) == 0);
  CHECK(pbft_message_count(4) == 24);
  CHECK(pbft_message_count(10) == 180);
  for (std::uint32_t n = 1; n <= 40; ++n) CHECK(pbft_message_count(n) == pbft_oracle(n));
  CHECK(fqc_message_count(5, 4) == 20);
  CHECK(fqc_message_count(1, 4) == 4);
  CHECK(fqc_message_count(10) == 40);
  CHECK(fqc_message_count(10) < pbft_message_count(10));
}

TEST_CASE("quadratic against linear growth") {
  double prev_gap = 10.0;
  for (std::uint32_t n : {10u, 100u, 1000u, 10000u}) {
    const double ratio = static_cast<double>(pbft_message_count(n)) / (double(n) * n);
    CHECK(std::abs(ratio - 2.0) < prev_gap);
    prev_gap = std::abs(ratio - 2.0);
    CHECK(fqc_message_count(n, 7) == 7ull * n);
  }
  CHECK(prev_gap < 1e-3);
}

TEST_CASE("majority vote") {
  const std::vector<Proposal> strict{{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 2.0}, {4, 2.0}};
  CHECK(majority_value(strict) == 1.0);
  CHECK(majority(strict).support == 3);
  const std::vector<Proposal> same{{0, 4.0}, {1, 4.0}};
  CHECK(majority_value(same) == 4.0);
  const std::vector<Proposal> tie{{1, 7.0}, {2, 9.0}, {3, 9.0}, {4, 7.0}};
  CHECK(majority_value(tie) == 7.0);
  CHECK_THROWS_AS(majority_value(std::vector<Proposal>{}), std::invalid_argument);
}

TEST_CASE("consensus parameter validation") {
  std::vector<std::string> errors;
  ConsensusParams p;
  p.timeout_s = 0;
  p.fqc_c = 1;
  validate(p, "consensus", errors);
  CHECK(errors.size() == 2);
}

TEST_CASE("PBFT on an ideal medium") {
  auto medium = ideal_medium();

  SUBCASE("n = 4, all honest") {
    const std::vector<double> v(4, 3.5);
    const auto o = pbft_instance(v, {}, medium, SimTime{});
    REQUIRE(o.decided());
    CHECK(o.value() == 3.5);
    CHECK(o.msg_count == 24);
    CHECK(medium.counters().offered == 24);
    CHECK(o.latency.count() > 0);
  }
  SUBCASE("n = 5 with one byzantine member") {
    const std::vector<double> v{3.5, 3.5, -40.0, 3.5, 3.5};
    for (std::uint32_t primary = 0; primary < 5; ++primary) {
      const auto o = pbft_instance(v, {}, medium, SimTime::from_seconds(1000.0 * primary), primary);
      REQUIRE(o.decided());
      CHECK(o.value() == 3.5);
    }
  }
  SUBCASE("n = 4 with two byzantine members fails for lack of quorum") {
    const std::vector<double> v{3.5, 20.0, 3.5, -11.0};
    const auto o = pbft_instance(v, {}, medium, SimTime{});
    REQUIRE(!o.decided());
    CHECK(o.reason() == FailureReason::InsufficientQuorum);
  }
  SUBCASE("n = 1 decides alone") {
    const std::vector<double> v{2.0};
    const auto o = pbft_instance(v, {}, medium, SimTime{});
    REQUIRE(o.decided());
    CHECK(o.value() == 2.0);
    CHECK(o.msg_count == 0);
  }
}

TEST_CASE("PBFT times out when the medium drops everything") {
  net::SharedMedium dead(net::LinkParams{5000, 1000, 1.0, 0}, RandomStream(1, "dead"));
  ConsensusParams p;
  p.max_retries = 2;
  const std::vector<double> v(4, 1.0);
  const auto o = pbft_instance(v, p, dead, SimTime{});
  REQUIRE(!o.decided());
  CHECK(o.reason() == FailureReason::Timeout);
  CHECK(o.msg_count == 3 * 3);  // three primaries each multicast a pre-prepare
  CHECK(o.latency == seconds(3 * p.timeout_s));
}

TEST_CASE("FQC on ideal planes") {
  auto medium = ideal_medium();

  SUBCASE("n = 10 with three byzantine members") {
    auto plane = ideal_plane();
    std::vector<double> v(10, 1.25);
    v[2] = 30.0;
    v[5] = -8.0;
    v[9] = 30.0;
    const auto o = fqc_instance(v, {}, plane, medium, SimTime{});
    REQUIRE(o.decided());
    CHECK(o.value() == 1.25);
  }
  SUBCASE("n = 5: linear count and lower latency than PBFT") {
    auto plane = ideal_plane();
    const std::vector<double> v(5, 1.0);
    const auto fqc = fqc_instance(v, {}, plane, medium, SimTime{});
    REQUIRE(fqc.decided());
    CHECK(fqc.msg_count == 20);
    auto medium2 = ideal_medium();
    const auto pbft = pbft_instance(v, {}, medium2, SimTime{});
    REQUIRE(pbft.decided());
    CHECK(fqc.latency < pbft.latency);
  }
  SUBCASE("starved plane still carries c*n messages classically") {
    quantum::QuantumParams p;
    p.gen_rate = 0;
    quantum::QuantumLink plane(p, RandomStream(1, "g"), RandomStream(1, "c"), 0);
    const std::vector<double> v(5, 1.0);
    const auto o = fqc_instance(v, {}, plane, medium, SimTime{});
    REQUIRE(o.decided());
    CHECK(o.msg_count == 20);
    CHECK(plane.counters().classical_fallbacks == 20);
    CHECK(medium.counters().bits_offered == 20ull * ConsensusParams{}.message_bits);
  }
  SUBCASE("quantum carriage shrinks the classical load") {
    auto plane = ideal_plane();
    const std::vector<double> v(5, 1.0);
    fqc_instance(v, {}, plane, medium, SimTime{});
    CHECK(medium.counters().bits_offered == 20ull * 128);
  }
  SUBCASE("odd c adds a decision broadcast") {
    auto plane = ideal_plane();
    ConsensusParams p;
    p.fqc_c = 5;
    const std::vector<double> v(6, 1.0);
    const auto o = fqc_instance(v, p, plane, medium, SimTime{});
    REQUIRE(o.decided());
    CHECK(o.msg_count == 30);
  }
  SUBCASE("n = 1 decides locally") {
    auto plane = ideal_plane();
    const std::vector<double> v{9.0};
    const auto o = fqc_instance(v, {}, plane, medium, SimTime{});
    REQUIRE(o.decided());
    CHECK(o.value() == 9.0);
  }
}

TEST_CASE("randomized safety with at most f byzantine members") {
  RandomStream r(2024, "safety");
  int decided = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::uint32_t>(1 + r.next_u64() % 10);
    const std::uint32_t f = byzantine_tolerance(n);
    const auto b = static_cast<std::uint32_t>(r.next_u64() % (f + 1));
    const double honest = std::round(r.uniform(-20, 20) * 100) / 100;
    std::vector<double> v(n, honest);
    const bool collude = r.bernoulli(0.5);
    const double wrong = honest + r.uniform(5, 10);
    for (std::uint32_t k = 0; k < b; ++k) {
      v[(k * 7 + trial) % n] = collude ? wrong : honest - r.uniform(5, 10);
    }
    auto medium = ideal_medium();
    auto plane = ideal_plane();
    const auto pb = pbft_instance(v, {}, medium, SimTime{}, trial % n, trial + 1);
    const auto fq = fqc_instance(v, {}, plane, medium, SimTime::from_seconds(5000), trial + 1);
    for (const auto& o : {pb, fq}) {
      if (o.decided()) {
        ++decided;
        CHECK(o.value() == honest);
      }
    }
  }
  CHECK(decided == 600);
}
