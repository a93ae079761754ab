#include "permasim/config.hpp"

#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "permasim/numfmt.hpp"

namespace permasim {

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out = "invalid configuration:";
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

struct Key {
  std::string_view name;
  std::function<std::string(const SimConfig&)> get;
  std::function<void(SimConfig&, std::string_view)> set;
};

template <typename T>
T parse_uint(std::string_view v) {
  const std::uint64_t x = parse_u64(v);
  if (x > std::numeric_limits<T>::max()) throw std::invalid_argument("value out of range: " + std::string(v));
  return static_cast<T>(x);
}

#define PERMASIM_DOUBLE(name, field)                                          \
  Key {                                                                       \
    name, [](const SimConfig& c) { return format_double(c.field); },         \
        [](SimConfig& c, std::string_view v) { c.field = parse_double(v); } \
  }
#define PERMASIM_UINT(name, field)                                                          \
  Key {                                                                                     \
    name, [](const SimConfig& c) { return std::to_string(c.field); },                     \
        [](SimConfig& c, std::string_view v) { c.field = parse_uint<decltype(c.field)>(v); } \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      PERMASIM_DOUBLE("sim.duration_days", duration_days),
      PERMASIM_DOUBLE("sim.measurement_period_s", measurement_period_s),
      PERMASIM_DOUBLE("sim.deadline_s", deadline_s),
      PERMASIM_DOUBLE("sim.spot_jitter_s", spot_jitter_s),
      PERMASIM_DOUBLE("sim.uplink_jitter_s", uplink_jitter_s),
      PERMASIM_UINT("sim.base_seed", base_seed),
      PERMASIM_UINT("sim.reps", reps),
      PERMASIM_UINT("topology.concentrators", topology.concentrators),
      PERMASIM_UINT("topology.spots", topology.spots),
      PERMASIM_UINT("topology.redundancy", topology.redundancy),
      Key{"mode.social",
          [](const SimConfig& c) { return std::string(telemetry::to_string(c.mode.social)); },
          [](SimConfig& c, std::string_view v) { c.mode.social = telemetry::parse_layer(trim(v)); }},
      Key{"mode.consensus",
          [](const SimConfig& c) { return std::string(telemetry::to_string(c.mode.consensus)); },
          [](SimConfig& c, std::string_view v) { c.mode.consensus = telemetry::parse_layer(trim(v)); }},
      PERMASIM_DOUBLE("fault.pb0", fault.pb0),
      PERMASIM_DOUBLE("fault.tolerance", fault.tolerance),
      PERMASIM_DOUBLE("fault.offset_min", fault.offset_min),
      PERMASIM_DOUBLE("fault.offset_max", fault.offset_max),
      PERMASIM_DOUBLE("lora.capacity_bps", lora.capacity_bps),
      PERMASIM_UINT("lora.buffer_slots", lora.buffer_slots),
      PERMASIM_DOUBLE("lora.base_loss", lora.base_loss),
      PERMASIM_UINT("lora.reference_bits", lora.reference_bits),
      PERMASIM_DOUBLE("nvis.capacity_bps", nvis.link.capacity_bps),
      PERMASIM_UINT("nvis.buffer_slots", nvis.link.buffer_slots),
      PERMASIM_DOUBLE("nvis.base_loss", nvis.link.base_loss),
      PERMASIM_UINT("nvis.reference_bits", nvis.link.reference_bits),
      PERMASIM_DOUBLE("nvis.availability_min", nvis.availability_min),
      PERMASIM_DOUBLE("nvis.availability_max", nvis.availability_max),
      PERMASIM_DOUBLE("nvis.mean_down_s", nvis.mean_down_s),
      PERMASIM_DOUBLE("nvis.dtn_ttl_s", nvis.dtn_ttl_s),
      PERMASIM_UINT("message.data_report_bits", sizes.data_report),
      PERMASIM_UINT("message.feedback_bits", sizes.feedback),
      PERMASIM_UINT("message.ack_bits", sizes.ack),
      PERMASIM_DOUBLE("quantum.p_channel", quantum.p_channel),
      PERMASIM_DOUBLE("quantum.alpha", quantum.alpha),
      PERMASIM_DOUBLE("quantum.beta", quantum.beta),
      PERMASIM_UINT("quantum.pairs_per_msg", quantum.pairs_per_msg),
      PERMASIM_DOUBLE("quantum.gen_rate", quantum.gen_rate),
      PERMASIM_UINT("quantum.buffer_cap", quantum.buffer_cap),
      PERMASIM_DOUBLE("quantum.rho", quantum.classical_overhead_rho),
      PERMASIM_UINT("social.window", social.window),
      PERMASIM_DOUBLE("social.w_short", social.w_short),
      PERMASIM_DOUBLE("social.w_long", social.w_long),
      PERMASIM_DOUBLE("social.theta", social.theta),
      PERMASIM_DOUBLE("social.neutral", social.neutral),
      PERMASIM_DOUBLE("consensus.timeout_s", consensus.timeout_s),
      PERMASIM_UINT("consensus.max_retries", consensus.max_retries),
      PERMASIM_UINT("consensus.fqc_c", consensus.fqc_c),
      PERMASIM_UINT("consensus.fqc_retries", consensus.fqc_retries),
      PERMASIM_UINT("consensus.message_bits", consensus.message_bits),
  };
  return table;
}

#undef PERMASIM_DOUBLE
#undef PERMASIM_UINT

constexpr std::string_view kSensorPb0 = "fault.sensor_pb0.";

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

namespace harness {

std::vector<std::string> validate(const SimConfig& c) {
  std::vector<std::string> errors;
  auto err = [&](std::string_view key, std::string_view what) {
    errors.push_back(std::string(key) + ": " + std::string(what));
  };
  if (!(c.duration_days > 0.0)) err("sim.duration_days", "must be > 0");
  if (!(c.measurement_period_s > 0.0)) err("sim.measurement_period_s", "must be > 0");
  if (!(c.deadline_s > 0.0)) err("sim.deadline_s", "must be > 0");
  if (!(c.spot_jitter_s >= 0.0)) err("sim.spot_jitter_s", "must be >= 0");
  if (!(c.uplink_jitter_s >= 0.0)) err("sim.uplink_jitter_s", "must be >= 0");
  if (c.uplink_jitter_s >= c.deadline_s) err("sim.uplink_jitter_s", "must be below sim.deadline_s");
  if (c.spot_jitter_s >= c.measurement_period_s) {
    err("sim.spot_jitter_s", "must be below sim.measurement_period_s");
  }
  if (c.topology.concentrators < 1) err("topology.concentrators", "must be >= 1");
  if (c.topology.spots < 1) err("topology.spots", "must be >= 1");
  if (c.topology.redundancy < 1) err("topology.redundancy", "must be >= 1");
  if (c.topology.redundancy >= consensus::kCoordinator) err("topology.redundancy", "too large");
  if (!(c.fault.pb0 >= 0.0 && c.fault.pb0 <= 1.0)) err("fault.pb0", "must lie in [0, 1]");
  if (!(c.fault.tolerance > 0.0)) err("fault.tolerance", "must be > 0");
  if (!(c.fault.offset_min > 1.0)) err("fault.offset_min", "must exceed 1 tolerance unit");
  if (!(c.fault.offset_max >= c.fault.offset_min)) err("fault.offset_max", "must be >= fault.offset_min");
  for (const auto& [sensor, pb0] : c.sensor_pb0) {
    const std::string key = std::string(kSensorPb0) + std::to_string(sensor);
    if (!(pb0 >= 0.0 && pb0 <= 1.0)) err(key, "must lie in [0, 1]");
    if (sensor >= c.topology.sensor_count()) err(key, "no such sensor in the topology");
  }
  net::validate(c.lora, "lora", errors);
  net::validate(c.nvis.link, "nvis", errors);
  const auto& nv = c.nvis;
  if (!(nv.availability_min >= 0.0 && nv.availability_min <= 1.0)) {
    err("nvis.availability_min", "must lie in [0, 1]");
  }
  if (!(nv.availability_max >= nv.availability_min && nv.availability_max <= 1.0)) {
    err("nvis.availability_max", "must lie in [nvis.availability_min, 1]");
  }
  if (!(nv.mean_down_s > 0.0)) err("nvis.mean_down_s", "must be > 0");
  if (!(nv.dtn_ttl_s > 0.0)) err("nvis.dtn_ttl_s", "must be > 0");
  if (c.sizes.data_report < 1) err("message.data_report_bits", "must be >= 1");
  if (c.sizes.feedback < 1) err("message.feedback_bits", "must be >= 1");
  if (c.sizes.ack < 1) err("message.ack_bits", "must be >= 1");
  quantum::validate(c.quantum, "quantum", errors);
  social::validate(c.social, "social", errors);
  consensus::validate(c.consensus, "consensus", errors);
  if (c.reps < 1) err("sim.reps", "must be >= 1");
  return errors;
}

void require_valid(const SimConfig& config) {
  auto errors = validate(config);
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

void set_key(SimConfig& config, std::string_view key, std::string_view value) {
  if (key.starts_with(kSensorPb0)) {
    const auto id = parse_uint<std::uint32_t>(key.substr(kSensorPb0.size()));
    config.sensor_pb0[id] = parse_double(value);
    return;
  }
  for (const Key& k : keys()) {
    if (k.name == key) {
      k.set(config, value);
      return;
    }
  }
  throw std::invalid_argument("unknown key");
}

SimConfig parse_config(std::string_view text, SimConfig base) {
  std::vector<std::string> errors;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    try {
      set_key(base, key, value);
    } catch (const std::invalid_argument& e) {
      errors.push_back(std::string(key) + ": " + e.what() + " (line " + std::to_string(line_no) + ")");
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  require_valid(base);
  return base;
}

SimConfig load_config(const std::string& path, SimConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string dump_config(const SimConfig& config) {
  std::string out;
  for (const Key& k : keys()) {
    out += k.name;
    out += " = ";
    out += k.get(config);
    out += '\n';
  }
  for (const auto& [sensor, pb0] : config.sensor_pb0) {
    out += std::string(kSensorPb0) + std::to_string(sensor) + " = " + format_double(pb0) + '\n';
  }
  return out;
}

}  // namespace harness
}  // namespace permasim
