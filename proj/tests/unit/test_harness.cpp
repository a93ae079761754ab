#include <doctest.h>

#include <sstream>

#include "permasim/config.hpp"
#include "permasim/harness.hpp"

using namespace permasim;
using namespace permasim::harness;

namespace {

bool mentions(const std::vector<std::string>& errors, std::string_view key) {
  for (const auto& e : errors) {
    if (e.find(key) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("validation names the offending key") {
  try {
    parse_config("fault.pb0 = 1.5\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    REQUIRE(e.errors().size() == 1);
    CHECK(mentions(e.errors(), "fault.pb0"));
  }
}

TEST_CASE("validation reports every problem") {
  SimConfig c;
  c.fault.pb0 = -1;
  c.topology.redundancy = 0;
  c.lora.capacity_bps = 0;
  c.quantum.alpha = 0.5;
  const auto errors = validate(c);
  CHECK(errors.size() == 4);
  CHECK(mentions(errors, "fault.pb0"));
  CHECK(mentions(errors, "topology.redundancy"));
  CHECK(mentions(errors, "lora.capacity_bps"));
  CHECK(mentions(errors, "quantum.alpha"));
}

TEST_CASE("parse errors are collected") {
  try {
    parse_config("nope = 1\nfault.pb0 = abc\njust text\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.errors().size() == 3);
  }
}

TEST_CASE("empty file yields the documented defaults") {
  const SimConfig c = parse_config("");
  CHECK(dump_config(c) == dump_config(SimConfig{}));
  CHECK(c.duration_days == 400.0);
  CHECK(c.topology.concentrators == 5);
  CHECK(c.fault.pb0 == 0.01);
}

TEST_CASE("classical modes ignore omitted quantum keys") {
  const SimConfig c = parse_config("mode.social = classical\nmode.consensus = classical\n");
  CHECK(c.mode.social == telemetry::Layer::Classical);
  CHECK(validate(c).empty());
}

TEST_CASE("dump and parse round trip") {
  SimConfig c;
  c.fault.pb0 = 0.0123456789;
  c.mode = {telemetry::Layer::Quantum, telemetry::Layer::Classical};
  c.nvis.link.base_loss = 1.0 / 3.0;
  c.sensor_pb0[5] = 0.9;
  const std::string text = "# comment line\n\n" + dump_config(c);
  const SimConfig back = parse_config(text);
  CHECK(dump_config(back) == dump_config(c));
  CHECK(back.nvis.link.base_loss == c.nvis.link.base_loss);
  CHECK(back.pb0_of(5) == 0.9);
  CHECK(back.pb0_of(4) == c.fault.pb0);
}

TEST_CASE("per-sensor overrides must name an existing sensor") {
  CHECK_THROWS_AS(parse_config("topology.spots = 2\nfault.sensor_pb0.2 = 0.5\n"), ConfigError);
  CHECK_NOTHROW(parse_config("topology.spots = 2\nfault.sensor_pb0.1 = 0.5\n"));
}

TEST_CASE("profiles and grid names") {
  CHECK(profile("desk").duration_days == 40.0);
  CHECK(profile("desk").reps == 10);
  CHECK(profile("paper").duration_days == 400.0);
  CHECK(profile("paper").reps == 30);
  CHECK_THROWS_AS(profile("huge"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid_kind("square"), std::invalid_argument);
  CHECK(parse_modes("all").size() == 9);
  CHECK(parse_modes("standard,Quantum Social,standard").size() == 2);
  CHECK_THROWS_AS(parse_modes(","), std::invalid_argument);
}

TEST_CASE("grid cardinality and ordering") {
  const auto all = parse_modes("all");
  const auto usecase = grid(GridKind::UseCase, all, 30);
  CHECK(usecase.size() == 270);
  std::size_t runs = 0;
  for (const auto& c : usecase) runs += c.reps;
  CHECK(runs == 8100);

  const auto one = parse_modes("consensus");
  CHECK(grid(GridKind::Extended, one, 10).size() == 42);

  const auto spec = grid_spec(GridKind::UseCase, one, 1);
  REQUIRE(spec.points.size() == 10);
  CHECK(spec.points[4].spots == 32);
  CHECK(spec.points[4].redundancy == 5);
  CHECK(spec.points[5].spots == 64);
  CHECK(spec.points[5].redundancy == 1);
  const auto ext = grid_spec(GridKind::Extended, one, 1);
  CHECK(ext.points.front().redundancy == 4);
  CHECK(ext.points.back().redundancy == 10);
}

TEST_CASE("sweep") {
  SimConfig base;
  base.duration_days = 1;
  base.topology.spots = 4;

  SUBCASE("one config, two reps") {
    base.reps = 2;
    const std::vector<SimConfig> configs{base};
    const auto r = sweep(configs, 1);
    CHECK(r.raw.size() == 2);
    CHECK(r.mesh.size() == 1);
    CHECK(r.raw[0].seed == base.base_seed);
    CHECK(r.raw[1].seed == base.base_seed + 1);
  }
  SUBCASE("output does not depend on the number of jobs") {
    const auto modes = parse_modes("standard,consensus,quantum-social");
    const auto configs = grid(GridKind::UseCase, modes, 2, base);
    const auto a = sweep(configs, 1);
    const auto b = sweep(configs, 4);
    std::ostringstream ra, rb, ma, mb;
    metrics::write_raw(ra, a.raw);
    metrics::write_raw(rb, b.raw);
    metrics::write_mesh(ma, a.mesh);
    metrics::write_mesh(mb, b.mesh);
    CHECK(ra.str() == rb.str());
    CHECK(ma.str() == mb.str());
  }
  SUBCASE("invalid configs abort before running") {
    base.fault.pb0 = 3;
    const std::vector<SimConfig> configs{base};
    CHECK_THROWS_AS(sweep(configs, 2), ConfigError);
  }
}

TEST_CASE("sweep errors carry the failing run") {
  const SweepError e(3, 1, 42, "boom");
  CHECK(e.config_index() == 3);
  CHECK(e.seed() == 42);
  CHECK(std::string(e.what()).find("seed 42") != std::string::npos);
}
