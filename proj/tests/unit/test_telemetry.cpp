#include <doctest.h>

#include <set>

#include "permasim/telemetry.hpp"

using namespace permasim;
using namespace permasim::telemetry;

TEST_CASE("nine distinct modes with round-tripping names") {
  const auto& modes = all_modes();
  std::set<std::string> labels, slugs;
  for (const Mode& m : modes) {
    labels.insert(label(m));
    slugs.insert(slug(m));
    CHECK(parse_mode(slug(m)) == m);
    CHECK(parse_mode(label(m)) == m);
  }
  CHECK(labels.size() == 9);
  CHECK(slugs.size() == 9);
  CHECK(label(modes[0]) == "Standard");
  CHECK(label(modes[6]) == "Quantum Social");
  CHECK(label(modes[8]) == "Quantum Social + Quantum Consensus");
  CHECK(parse_mode("QUANTUM SOCIAL") == modes[6]);
  CHECK_THROWS_AS(parse_mode("telepathy"), std::invalid_argument);
  CHECK_THROWS_AS(parse_layer("maybe"), std::invalid_argument);
}

TEST_CASE("topology assigns spots round robin") {
  Topology t{5, 32, 3};
  CHECK(t.sensor_count() == 96);
  CHECK(t.concentrator_of(0) == 0);
  CHECK(t.concentrator_of(7) == 2);
  CHECK(t.sensor_id(7, 2) == 23);
}

TEST_CASE("sensing with byzantine faults") {
  const FaultParams fault;
  const RandomStream stream(1, "sensor");

  SUBCASE("pb0 = 0 reads the truth") {
    for (std::uint32_t r = 0; r < 1000; ++r) {
      const auto s = sense(0, 0, r, -1.5, 0.0, fault, stream);
      REQUIRE(!s.faulty);
      REQUIRE(s.value == -1.5);
    }
  }
  SUBCASE("pb0 = 1 is always faulty and outside the tolerance") {
    for (std::uint32_t r = 0; r < 1000; ++r) {
      const auto s = sense(0, 0, r, -1.5, 1.0, fault, stream);
      REQUIRE(s.faulty);
      REQUIRE(!within_tolerance(s.value, -1.5, fault.tolerance));
      const double off = std::abs(s.value + 1.5);
      REQUIRE(off >= fault.offset_min * fault.tolerance);
      REQUIRE(off <= fault.offset_max * fault.tolerance);
    }
  }
  SUBCASE("pb0 = 0.1 Monte Carlo") {
    int faulty = 0;
    for (std::uint32_t r = 0; r < 100'000; ++r) faulty += sense(3, 4, r, 0.0, 0.1, fault, stream).faulty;
    CHECK(std::abs(faulty / 1e5 - 0.1) < 0.01);
  }
  SUBCASE("draws are keyed by round") {
    const auto a = sense(0, 0, 17, 2.0, 0.5, fault, stream);
    const auto b = sense(0, 0, 17, 2.0, 0.5, fault, stream);
    CHECK(a.value == b.value);
  }
}

TEST_CASE("ground truth is reproducible and varies by spot") {
  const RandomStream t(1, "truth");
  CHECK(ground_truth(t, 3, 10) == ground_truth(t, 3, 10));
  CHECK(ground_truth(t, 3, 10) != ground_truth(t, 4, 10));
}

TEST_CASE("transaction lifecycle") {
  const SimTime deadline = SimTime::from_seconds(86400);

  SUBCASE("correct value before the deadline") {
    Transaction tx(0, 0, 1.0, deadline);
    CHECK(tx.accept(1.2, SimTime::from_seconds(7200)));
    CHECK(tx.resolve_deadline(deadline, 1.0).outcome == Outcome::Success);
  }
  SUBCASE("DTN-delayed delivery still counts") {
    Transaction tx(0, 0, 1.0, deadline);
    CHECK(tx.accept(1.0, SimTime::from_seconds(20 * 3600)));
    CHECK(tx.resolve_deadline(deadline, 1.0).outcome == Outcome::Success);
  }
  SUBCASE("first arrival wins even if wrong") {
    Transaction tx(0, 0, 1.0, deadline);
    CHECK(tx.accept(9.0, SimTime::from_seconds(10)));
    CHECK(!tx.accept(1.0, SimTime::from_seconds(11)));
    CHECK(tx.resolve_deadline(deadline, 1.0).outcome == Outcome::FailWrongValue);
  }
  SUBCASE("late deliveries are ignored") {
    Transaction tx(0, 0, 1.0, deadline);
    CHECK(!tx.accept(1.0, deadline + seconds(1.0)));
    CHECK(tx.resolve_deadline(deadline, 1.0).outcome == Outcome::FailNoDelivery);
  }
  SUBCASE("nothing arrived but something is in flight") {
    Transaction tx(0, 0, 1.0, deadline);
    tx.add_in_flight();
    CHECK(tx.resolve_deadline(deadline, 1.0).outcome == Outcome::FailDeadline);
  }
  SUBCASE("resolution is final") {
    Transaction tx(2, 5, 1.0, deadline);
    const auto r1 = tx.resolve_deadline(deadline, 1.0);
    tx.accept(1.0, SimTime::from_seconds(5));
    const auto r2 = tx.resolve_deadline(deadline, 1.0);
    CHECK(r1.outcome == r2.outcome);
    CHECK(r2.spot == 2);
    CHECK(r2.round == 5);
  }
}
