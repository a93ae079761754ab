// Python bindings: configuration, single runs, sweeps and the closed-form
// helpers.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <thread>

#include "permasim/config.hpp"
#include "permasim/consensus.hpp"
#include "permasim/harness.hpp"
#include "permasim/metrics.hpp"
#include "permasim/quantum.hpp"
#include "permasim/simulation.hpp"

namespace py = pybind11;
using namespace permasim;

namespace {

SimConfig to_config(const py::object& obj) {
  if (obj.is_none()) return SimConfig{};
  if (py::isinstance<py::str>(obj)) return harness::parse_config(obj.cast<std::string>());
  std::string text;
  for (auto [k, v] : obj.cast<py::dict>()) {
    std::string value = py::isinstance<py::bool_>(v) ? std::string(v.cast<bool>() ? "1" : "0")
                                                     : py::str(v).cast<std::string>();
    text += py::str(k).cast<std::string>() + " = " + value + "\n";
  }
  return harness::parse_config(text);
}

py::dict counters(const net::LinkCounters& c) {
  py::dict d;
  d["offered"] = c.offered;
  d["bits_offered"] = c.bits_offered;
  d["delivered"] = c.delivered;
  d["dropped_congestion"] = c.dropped_congestion;
  d["dropped_loss"] = c.dropped_loss;
  d["dtn_buffered"] = c.dtn_buffered;
  d["dtn_expired"] = c.dtn_expired;
  return d;
}

py::dict stats_dict(const RunStats& s) {
  py::dict d;
  d["transactions"] = s.resolutions.size();
  d["str"] = s.resolutions.empty() ? py::object(py::none()) : py::cast(metrics::str(s.resolutions));
  py::dict outcomes;
  for (int i = 0; i < 4; ++i) outcomes[py::str(telemetry::to_string(static_cast<telemetry::Outcome>(i)))] = 0;
  for (const auto& r : s.resolutions) {
    auto key = py::str(telemetry::to_string(r.outcome));
    outcomes[key] = outcomes[key].cast<std::uint64_t>() + 1;
  }
  d["outcomes"] = outcomes;
  d["lora"] = counters(s.lora);
  d["nvis"] = counters(s.nvis);
  py::dict q;
  q["pairs_generated"] = s.quantum.pairs_generated;
  q["pairs_consumed"] = s.quantum.pairs_consumed;
  q["quantum_sent"] = s.quantum.quantum_sent;
  q["quantum_failed"] = s.quantum.quantum_failed;
  q["classical_fallbacks"] = s.quantum.classical_fallbacks;
  d["quantum"] = q;
  d["consensus_instances"] = s.consensus_instances;
  d["consensus_decided"] = s.consensus_decided;
  d["consensus_messages"] = s.consensus_messages;
  d["feedback_delivered"] = s.feedback_delivered;
  d["events"] = s.events;
  d["trace_hash"] = s.trace_hash;
  d["availability"] = s.availability;
  d["reputation"] = s.reputation;
  return d;
}

py::list mesh_rows(const std::vector<metrics::StrReport>& mesh) {
  py::list out;
  for (const auto& r : mesh) {
    py::dict d;
    d["mode"] = telemetry::slug(r.mode);
    d["pb0"] = r.pb0;
    d["spots"] = r.spots;
    d["redundancy"] = r.redundancy;
    d["n_reps"] = r.n_reps;
    d["str_mean"] = r.str_mean;
    d["str_ci99_half"] = r.ci99_half_width;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_permasim, m) {
  m.doc() = "Permafrost telemetry network simulator";

  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    }
  });

  m.def("default_config", [] { return harness::dump_config(SimConfig{}); },
        "Every config key with its default, as `key = value` lines.");
  m.def("normalize_config", [](const py::object& cfg) { return harness::dump_config(to_config(cfg)); },
        py::arg("config"), "Validate a config (text or dict) and return the full effective config.");

  m.def(
      "run",
      [](const py::object& cfg, std::optional<std::uint64_t> seed) {
        const SimConfig c = to_config(cfg);
        RunStats s;
        {
          py::gil_scoped_release release;
          s = run(c, seed.value_or(c.base_seed));
        }
        return stats_dict(s);
      },
      py::arg("config") = py::none(), py::arg("seed") = py::none(),
      "Run one simulation. `config` is None, config text, or a dict of keys.");

  m.def(
      "sweep",
      [](const std::string& grid, const std::string& modes, std::optional<std::uint32_t> reps,
         const std::string& profile, unsigned jobs, const py::object& cfg, std::optional<std::uint64_t> seed,
         std::optional<std::string> out_raw, std::optional<std::string> out_mesh) {
        SimConfig base = to_config(cfg);
        const harness::Profile prof = harness::profile(profile);
        base.duration_days = prof.duration_days;
        if (seed) base.base_seed = *seed;
        const auto spec = harness::grid_spec(harness::parse_grid_kind(grid), harness::parse_modes(modes),
                                             reps.value_or(prof.reps));
        const auto configs = harness::grid(spec, base);
        if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
        harness::SweepResult result;
        {
          py::gil_scoped_release release;
          result = harness::sweep(configs, jobs);
          if (out_raw) metrics::export_raw(result.raw, *out_raw);
          if (out_mesh) metrics::export_mesh(result.mesh, spec, *out_mesh);
        }
        py::list raw;
        for (const auto& r : result.raw) {
          raw.append(py::make_tuple(telemetry::slug(r.mode), r.pb0, r.spots, r.redundancy, r.rep, r.seed, r.str));
        }
        py::dict out;
        out["raw"] = raw;
        out["mesh"] = mesh_rows(result.mesh);
        return out;
      },
      py::arg("grid") = "usecase", py::arg("modes") = "all", py::arg("reps") = py::none(),
      py::arg("profile") = "desk", py::arg("jobs") = 1, py::arg("config") = py::none(),
      py::arg("seed") = py::none(), py::arg("out_raw") = py::none(), py::arg("out_mesh") = py::none(),
      "Run a parameter grid. Returns {'raw': [...], 'mesh': [...]}, optionally writing both CSVs.");

  m.def("load_mesh", [](const std::string& path) { return mesh_rows(metrics::load_mesh(path)); },
        py::arg("path"));
  m.def(
      "summarize",
      [](const std::string& path) {
        py::list out;
        for (const auto& r : metrics::summarize(metrics::load_mesh(path))) {
          out.append(py::make_tuple(telemetry::label(r.mode), r.max, r.mean));
        }
        return out;
      },
      py::arg("mesh_path"), "Per-mode (label, max, mean) of a mesh CSV, in table order.");

  m.def("modes", [] {
    py::list out;
    for (const auto& mode : telemetry::all_modes()) out.append(py::make_tuple(telemetry::label(mode), telemetry::slug(mode)));
    return out;
  });

  m.def("mean_ci99", [](const std::vector<double>& xs) {
    const auto ci = metrics::mean_ci99(xs);
    return py::make_tuple(ci.mean, ci.half_width);
  });
  m.def("t_quantile", &metrics::t_quantile, py::arg("p"), py::arg("dof"));

  m.def("byzantine_tolerance", &consensus::byzantine_tolerance, py::arg("n"));
  m.def("pbft_message_count", &consensus::pbft_message_count, py::arg("n"));
  m.def("fqc_message_count", &consensus::fqc_message_count, py::arg("n"), py::arg("c") = 4);

  m.def("superadditive_success",
        [](const std::vector<double>& ps, double alpha) { return quantum::superadditive_success(ps, alpha); },
        py::arg("ps"), py::arg("alpha"));
  m.def("superposed_success", &quantum::superposed_success, py::arg("p1"), py::arg("p2"), py::arg("beta"));
}
