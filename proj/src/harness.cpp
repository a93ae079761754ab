#include "permasim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "permasim/simulation.hpp"

namespace permasim::harness {

GridKind parse_grid_kind(std::string_view text) {
  if (text == "usecase") return GridKind::UseCase;
  if (text == "extended") return GridKind::Extended;
  throw std::invalid_argument("unknown grid '" + std::string(text) + "' (expected usecase or extended)");
}

Profile profile(std::string_view name) {
  if (name == "desk") return {40.0, 10};
  if (name == "paper") return {400.0, 30};
  throw std::invalid_argument("unknown profile '" + std::string(name) + "' (expected desk or paper)");
}

std::vector<telemetry::Mode> parse_modes(std::string_view text) {
  if (text == "all") return {telemetry::all_modes().begin(), telemetry::all_modes().end()};
  std::vector<telemetry::Mode> modes;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;
    const telemetry::Mode m = telemetry::parse_mode(item);
    if (std::find(modes.begin(), modes.end(), m) == modes.end()) modes.push_back(m);
  }
  if (modes.empty()) throw std::invalid_argument("empty mode list");
  return modes;
}

metrics::GridSpec grid_spec(GridKind kind, std::span<const telemetry::Mode> modes, std::uint32_t reps) {
  metrics::GridSpec spec;
  spec.pb0_values = {0.1, 0.01, 0.001};
  const std::uint32_t lo = kind == GridKind::UseCase ? 1 : 4;
  const std::uint32_t hi = kind == GridKind::UseCase ? 5 : 10;
  for (std::uint32_t spots : {32u, 64u}) {
    for (std::uint32_t n = lo; n <= hi; ++n) spec.points.push_back({spots, n});
  }
  spec.modes.assign(modes.begin(), modes.end());
  spec.reps = reps;
  return spec;
}

std::vector<SimConfig> grid(const metrics::GridSpec& spec, const SimConfig& base) {
  std::vector<SimConfig> configs;
  configs.reserve(spec.modes.size() * spec.pb0_values.size() * spec.points.size());
  for (const auto& mode : spec.modes) {
    for (double pb0 : spec.pb0_values) {
      for (const auto& p : spec.points) {
        SimConfig c = base;
        c.mode = mode;
        c.fault.pb0 = pb0;
        c.topology.spots = p.spots;
        c.topology.redundancy = p.redundancy;
        c.reps = spec.reps;
        configs.push_back(std::move(c));
      }
    }
  }
  return configs;
}

std::vector<SimConfig> grid(GridKind kind, std::span<const telemetry::Mode> modes, std::uint32_t reps,
                            const SimConfig& base) {
  return grid(grid_spec(kind, modes, reps), base);
}

SweepError::SweepError(std::size_t config_index, std::uint32_t rep, std::uint64_t seed,
                       const std::string& what)
    : std::runtime_error("run failed (config #" + std::to_string(config_index) + ", rep " +
                         std::to_string(rep) + ", seed " + std::to_string(seed) + "): " + what),
      config_index_(config_index),
      rep_(rep),
      seed_(seed) {}

SweepResult sweep(std::span<const SimConfig> configs, unsigned jobs) {
  struct Task {
    std::size_t config;
    std::uint32_t rep;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    require_valid(configs[i]);
    for (std::uint32_t r = 0; r < configs[i].reps; ++r) tasks.push_back({i, r});
  }

  std::vector<double> strs(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex err_mu;
  std::optional<std::size_t> failed;  // lowest failing task index
  std::string failure;

  auto worker = [&] {
    while (!abort.load(std::memory_order_relaxed)) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const SimConfig& c = configs[tasks[t].config];
      try {
        const RunStats stats = run(c, c.base_seed + tasks[t].rep);
        strs[t] = metrics::str(stats.resolutions);
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mu);
        if (!failed || t < *failed) {
          failed = t;
          failure = e.what();
        }
        abort = true;
      }
    }
  };

  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  if (failed) {
    const Task& t = tasks[*failed];
    throw SweepError(t.config, t.rep, configs[t.config].base_seed + t.rep, failure);
  }

  SweepResult result;
  result.raw.reserve(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const SimConfig& c = configs[tasks[t].config];
    result.raw.push_back(metrics::RawRow{c.mode, c.fault.pb0, c.topology.spots, c.topology.redundancy,
                                         tasks[t].rep, c.base_seed + tasks[t].rep, strs[t]});
  }
  result.mesh = metrics::aggregate(result.raw);
  return result;
}

}  // namespace permasim::harness
