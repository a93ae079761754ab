#pragma once

// Grid construction and sweep execution with run-level parallelism.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "permasim/config.hpp"
#include "permasim/metrics.hpp"

namespace permasim::harness {

enum class GridKind : std::uint8_t { UseCase, Extended };
/// "usecase" or "extended". Throws std::invalid_argument.
GridKind parse_grid_kind(std::string_view text);

struct Profile {
  double duration_days = 40.0;
  std::uint32_t reps = 10;
};
/// "desk" (40 days, 10 reps) or "paper" (400 days, 30 reps).
Profile profile(std::string_view name);

/// "all" or a comma-separated list of slugs/labels.
std::vector<telemetry::Mode> parse_modes(std::string_view text);

/// Pb0 values (0.1, 0.01, 0.001) and the Y axis: 32xN then 64xN with N in
/// 1..5 (use case) or 4..10 (extended).
metrics::GridSpec grid_spec(GridKind kind, std::span<const telemetry::Mode> modes, std::uint32_t reps);

/// One config per (mode, pb0, point), mode-major, derived from `base`.
std::vector<SimConfig> grid(const metrics::GridSpec& spec, const SimConfig& base);
std::vector<SimConfig> grid(GridKind kind, std::span<const telemetry::Mode> modes, std::uint32_t reps,
                            const SimConfig& base = {});

/// A run inside a sweep failed.
class SweepError : public std::runtime_error {
 public:
  SweepError(std::size_t config_index, std::uint32_t rep, std::uint64_t seed, const std::string& what);
  std::size_t config_index() const { return config_index_; }
  std::uint32_t rep() const { return rep_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t config_index_;
  std::uint32_t rep_;
  std::uint64_t seed_;
};

struct SweepResult {
  std::vector<metrics::RawRow> raw;      // config order, then rep
  std::vector<metrics::StrReport> mesh;  // config order
};

/// Runs every (config, rep) with seed base_seed + rep on up to `jobs`
/// threads. The result does not depend on `jobs`.
SweepResult sweep(std::span<const SimConfig> configs, unsigned jobs);

}  // namespace permasim::harness
