#include <doctest.h>

#include <limits>

#include "permasim/engine.hpp"
#include "permasim/numfmt.hpp"

using namespace permasim;

TEST_CASE("shortest round-trip formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.001) == "0.001");
  RandomStream r(1, "fmt");
  for (int i = 0; i < 1000; ++i) {
    const double x = r.uniform();
    CHECK(parse_double(format_double(x)) == x);
  }
}

TEST_CASE("strict parsing") {
  CHECK(parse_double(" 2.5 ") == 2.5);
  CHECK(parse_u64("42") == 42);
  CHECK_THROWS_AS(parse_double("2.5x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_u64("-1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_u64("1.5"), std::invalid_argument);
  CHECK(trim("  a b \t") == "a b");
}
