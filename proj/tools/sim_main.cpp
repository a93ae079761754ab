// sim: command-line front end.
//
//   sim run    --config <file> [--seed S]
//   sim sweep  --grid usecase|extended --modes all|<list> --reps K
//              --profile desk|paper --out-raw raw.csv --out-mesh mesh.csv [--jobs J]
//   sim report --mesh mesh.csv --table

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <optional>
#include <thread>

#include "permasim/config.hpp"
#include "permasim/harness.hpp"
#include "permasim/metrics.hpp"
#include "permasim/numfmt.hpp"
#include "permasim/simulation.hpp"

namespace {

using namespace permasim;

void print_counters(std::ostream& os, std::string_view name, const net::LinkCounters& c) {
  os << name << ": offered=" << c.offered << " delivered=" << c.delivered
     << " dropped_congestion=" << c.dropped_congestion << " dropped_loss=" << c.dropped_loss
     << " dtn_buffered=" << c.dtn_buffered << " dtn_expired=" << c.dtn_expired << '\n';
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, bool dump) {
  SimConfig cfg = config_path.empty() ? SimConfig{} : harness::load_config(config_path);
  if (dump) std::cout << harness::dump_config(cfg);
  const std::uint64_t s = seed.value_or(cfg.base_seed);
  const RunStats stats = run(cfg, s);

  std::cout << "mode: " << telemetry::label(cfg.mode) << " (" << telemetry::slug(cfg.mode) << ")\n"
            << "seed: " << s << '\n'
            << "topology: " << cfg.topology.spots << " spots x " << cfg.topology.redundancy
            << " sensors, " << cfg.topology.concentrators << " concentrators\n"
            << "nvis availability: " << format_double(stats.availability) << '\n'
            << "transactions: " << stats.resolutions.size() << '\n';
  std::uint64_t by_outcome[4] = {};
  for (const auto& r : stats.resolutions) ++by_outcome[static_cast<int>(r.outcome)];
  for (int i = 0; i < 4; ++i) {
    std::cout << "  " << telemetry::to_string(static_cast<telemetry::Outcome>(i)) << ": "
              << by_outcome[i] << '\n';
  }
  print_counters(std::cout, "lora", stats.lora);
  print_counters(std::cout, "nvis", stats.nvis);
  std::cout << "quantum: sent=" << stats.quantum.quantum_sent << " failed=" << stats.quantum.quantum_failed
            << " fallbacks=" << stats.quantum.classical_fallbacks << '\n'
            << "consensus: instances=" << stats.consensus_instances
            << " decided=" << stats.consensus_decided << " messages=" << stats.consensus_messages << '\n'
            << "events: " << stats.events << '\n';
  std::cout << "str: " << format_double(metrics::str(stats.resolutions)) << '\n';
  return 0;
}

struct SweepArgs {
  std::string grid = "usecase";
  std::string modes = "all";
  std::optional<std::uint32_t> reps;
  std::string profile = "desk";
  std::string out_raw;
  std::string out_mesh;
  unsigned jobs = 0;
  std::string config;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int cmd_sweep(const SweepArgs& a) {
  SimConfig base = a.config.empty() ? SimConfig{} : harness::load_config(a.config);
  const harness::Profile prof = harness::profile(a.profile);
  base.duration_days = prof.duration_days;
  if (a.seed) base.base_seed = *a.seed;
  const std::uint32_t reps = a.reps.value_or(prof.reps);
  if (reps < 1) throw std::invalid_argument("--reps must be >= 1");

  const auto modes = harness::parse_modes(a.modes);
  const auto spec = harness::grid_spec(harness::parse_grid_kind(a.grid), modes, reps);
  const auto configs = harness::grid(spec, base);
  const unsigned jobs = a.jobs > 0 ? a.jobs : std::max(1u, std::thread::hardware_concurrency());

  const auto t0 = std::chrono::steady_clock::now();
  const auto result = harness::sweep(configs, jobs);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  metrics::export_raw(result.raw, a.out_raw);
  metrics::export_mesh(result.mesh, spec, a.out_mesh);
  if (!a.quiet) {
    std::cerr << configs.size() << " configs x " << reps << " reps = " << result.raw.size()
              << " runs in " << secs << " s (" << jobs << " jobs)\n";
    std::cout << metrics::format_table(metrics::summarize(result.mesh));
  }
  return 0;
}

int cmd_report(const std::string& mesh_path) {
  const auto reports = metrics::load_mesh(mesh_path);
  std::cout << metrics::format_table(metrics::summarize(reports));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Permafrost telemetry network simulator"};
  app.require_subcommand(1);

  std::string run_config;
  std::optional<std::uint64_t> run_seed;
  bool run_dump = false;
  auto* run = app.add_subcommand("run", "Run one simulation and print its STR");
  run->add_option("--config", run_config, "Config file (key = value lines)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", run_seed, "Master seed (default: sim.base_seed)");
  run->add_flag("--dump-config", run_dump, "Print the effective configuration first");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid and write raw and mesh CSVs");
  sweep->add_option("--grid", sa.grid, "usecase or extended")->check(CLI::IsMember({"usecase", "extended"}));
  sweep->add_option("--modes", sa.modes, "all or a comma-separated list of modes");
  sweep->add_option("--reps", sa.reps, "Repetitions per grid point (default: from profile)");
  sweep->add_option("--profile", sa.profile, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  sweep->add_option("--out-raw", sa.out_raw, "Raw CSV output")->required();
  sweep->add_option("--out-mesh", sa.out_mesh, "Mesh CSV output")->required();
  sweep->add_option("--jobs", sa.jobs, "Worker threads (default: hardware concurrency)");
  sweep->add_option("--config", sa.config, "Base config file")->check(CLI::ExistingFile);
  sweep->add_option("--seed", sa.seed, "Base seed");
  sweep->add_flag("--quiet", sa.quiet, "Do not print the summary table");

  std::string mesh_path;
  bool table = false;
  auto* report = app.add_subcommand("report", "Summarize a mesh CSV");
  report->add_option("--mesh", mesh_path, "Mesh CSV")->required()->check(CLI::ExistingFile);
  report->add_flag("--table", table, "Print the per-mode max/average table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) return cmd_run(run_config, run_seed, run_dump);
    if (*sweep) return cmd_sweep(sa);
    if (*report) return cmd_report(mesh_path);
  } catch (const ConfigError& e) {
    std::cerr << "sim: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "sim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
