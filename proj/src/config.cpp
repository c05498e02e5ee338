#include "dcc/config.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <functional>
#include <sstream>

namespace dcc {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double to_double(std::string_view key, std::string_view s) {
  double v = 0.0;
  const std::string t = trim(s);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size() || t.empty())
    throw ConfigError(std::string(key), "expected a number, got '" + t + "'");
  return v;
}

std::int64_t to_int(std::string_view key, std::string_view s) {
  std::int64_t v = 0;
  const std::string t = trim(s);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size() || t.empty())
    throw ConfigError(std::string(key), "expected an integer, got '" + t + "'");
  return v;
}

bool to_bool(std::string_view key, std::string_view s) {
  const std::string t = trim(s);
  if (t == "on" || t == "true" || t == "1" || t == "yes") return true;
  if (t == "off" || t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(std::string(key), "expected on/off, got '" + t + "'");
}

std::string fmt_bool(bool b) { return b ? "on" : "off"; }

std::vector<double> to_list(std::string_view key, std::string_view s) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss{std::string(s)};
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError(std::string(key), "expected a comma-separated list");
  return out;
}

template <typename Seq>
std::string fmt_list(const Seq& values) {
  std::string out;
  for (auto v : values) {
    if (!out.empty()) out += ',';
    out += fmt(static_cast<double>(v));
  }
  return out;
}

std::string fmt_seconds(Duration d) { return fmt(to_seconds(d)); }
Duration seconds_of(std::string_view key, std::string_view s) {
  return from_seconds(to_double(key, s));
}
std::string fmt_ms(Duration d) { return fmt(static_cast<double>(d.count()) / 1000.0); }
Duration ms_of(std::string_view key, std::string_view s) {
  return Duration{static_cast<std::int64_t>(std::llround(to_double(key, s) * 1000.0))};
}
std::string fmt_us(Duration d) { return std::to_string(d.count()); }
Duration us_of(std::string_view key, std::string_view s) { return Duration{to_int(key, s)}; }

int int_of(std::string_view key, std::string_view s) {
  const std::int64_t v = to_int(key, s);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(std::string(key), "out of range");
  return static_cast<int>(v);
}

std::uint32_t bytes_of(std::string_view key, std::string_view s) {
  const std::int64_t v = to_int(key, s);
  if (v <= 0 || v > 65535) throw ConfigError(std::string(key), "must be in [1, 65535]");
  return static_cast<std::uint32_t>(v);
}

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

#define DCC_DOUBLE(KEY, MEMBER)                                               \
  Field {                                                                     \
    KEY, [](const RunConfig& c) { return fmt(c.MEMBER); },                    \
        [](RunConfig& c, std::string_view v) { c.MEMBER = to_double(KEY, v); } \
  }
#define DCC_INT(KEY, MEMBER)                                                \
  Field {                                                                   \
    KEY, [](const RunConfig& c) { return std::to_string(c.MEMBER); },       \
        [](RunConfig& c, std::string_view v) { c.MEMBER = int_of(KEY, v); } \
  }
#define DCC_BOOL(KEY, MEMBER)                                                \
  Field {                                                                    \
    KEY, [](const RunConfig& c) { return fmt_bool(c.MEMBER); },              \
        [](RunConfig& c, std::string_view v) { c.MEMBER = to_bool(KEY, v); } \
  }
#define DCC_TIME(KEY, MEMBER, FMT, PARSE)                                   \
  Field {                                                                   \
    KEY, [](const RunConfig& c) { return FMT(c.MEMBER); },                  \
        [](RunConfig& c, std::string_view v) { c.MEMBER = PARSE(KEY, v); } \
  }
#define DCC_BYTES(KEY, MEMBER)                                                \
  Field {                                                                     \
    KEY, [](const RunConfig& c) { return std::to_string(c.MEMBER); },         \
        [](RunConfig& c, std::string_view v) { c.MEMBER = bytes_of(KEY, v); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"scenario.kind", [](const RunConfig& c) { return std::string(to_string(c.scenario.kind)); },
            [](RunConfig& c, std::string_view v) { c.scenario.kind = parse_scenario(trim(v)); }},
      DCC_DOUBLE("scenario.density", scenario.density),
      DCC_INT("scenario.lanes", scenario.lanes),
      DCC_DOUBLE("scenario.loop_length", scenario.loop_length_m),
      DCC_DOUBLE("scenario.curve_radius", scenario.curve_radius_m),
      DCC_DOUBLE("scenario.max_speed", scenario.max_speed),
      DCC_DOUBLE("scenario.lane_width", scenario.lane_width),
      DCC_DOUBLE("scenario.vehicle_length", scenario.vehicle_length),
      DCC_DOUBLE("scenario.speed_factor_mean", scenario.speed_factor_mean),
      DCC_DOUBLE("scenario.speed_factor_sd", scenario.speed_factor_sd),
      DCC_DOUBLE("scenario.speed_factor_min", scenario.speed_factor_min),
      DCC_DOUBLE("scenario.accel_noise", scenario.accel_noise),
      DCC_INT("scenario.tl_vehicles", scenario.tl_vehicles),
      DCC_INT("scenario.tl_lanes", scenario.tl_lanes),
      DCC_DOUBLE("scenario.tl_curve_radius", scenario.tl_curve_radius_m),
      DCC_DOUBLE("scenario.tl_queue_gap", scenario.tl_queue_gap_m),
      DCC_INT("scenario.large_count", scenario.large_count),
      DCC_INT("scenario.large_lanes", scenario.large_lanes),
      DCC_INT("scenario.small_count", scenario.small_count),
      DCC_INT("scenario.small_lanes", scenario.small_lanes),
      DCC_DOUBLE("scenario.large_pace", scenario.large_pace),
      DCC_DOUBLE("scenario.small_pace", scenario.small_pace),
      DCC_DOUBLE("scenario.small_spacing", scenario.small_spacing_m),
      DCC_DOUBLE("scenario.ramp_length", scenario.ramp_length_m),
      DCC_DOUBLE("scenario.turn_radius", scenario.turn_radius_m),
      DCC_TIME("scenario.preroll_s", scenario.preroll, fmt_seconds, seconds_of),
      DCC_DOUBLE("mobility.idm.max_accel", scenario.idm.max_accel),
      DCC_DOUBLE("mobility.idm.comfort_decel", scenario.idm.comfort_decel),
      DCC_DOUBLE("mobility.idm.min_gap", scenario.idm.min_gap),
      DCC_DOUBLE("mobility.idm.headway", scenario.idm.headway),
      DCC_DOUBLE("mobility.idm.max_decel", scenario.idm.max_decel),
      Field{"controller.preset", [](const RunConfig& c) { return c.controller.preset; },
            [](RunConfig& c, std::string_view v) { c.controller = make_preset(trim(v)); }},
      DCC_DOUBLE("controller.alpha", controller.params.alpha),
      DCC_DOUBLE("controller.beta", controller.params.beta),
      DCC_DOUBLE("controller.cbr_target", controller.params.cbr_target),
      DCC_DOUBLE("controller.delta_max", controller.params.delta_max),
      DCC_DOUBLE("controller.delta_min", controller.params.delta_min),
      DCC_DOUBLE("controller.g_plus_max", controller.params.g_plus_max),
      DCC_DOUBLE("controller.g_minus_max", controller.params.g_minus_max),
      Field{"controller.x_bound",
            [](const RunConfig& c) {
              return c.controller.params.x_bound ? fmt(*c.controller.params.x_bound) : std::string("none");
            },
            [](RunConfig& c, std::string_view v) {
              if (trim(v) == "none") {
                c.controller.params.x_bound.reset();
              } else {
                c.controller.params.x_bound = to_double("controller.x_bound", v);
              }
            }},
      DCC_DOUBLE("controller.alpha_high", controller.params.alpha_high),
      DCC_DOUBLE("controller.th", controller.params.th),
      DCC_TIME("controller.t_cbr_ms", controller.params.t_cbr, fmt_ms, ms_of),
      DCC_DOUBLE("controller.delta_initial", controller.params.delta_initial),
      Field{"controller.reactive.lower_bounds",
            [](const RunConfig& c) { return fmt_list(c.controller.reactive.lower_bounds); },
            [](RunConfig& c, std::string_view v) {
              c.controller.reactive.lower_bounds = to_list("controller.reactive.lower_bounds", v);
            }},
      Field{"controller.reactive.rates",
            [](const RunConfig& c) { return fmt_list(c.controller.reactive.rates); },
            [](RunConfig& c, std::string_view v) {
              c.controller.reactive.rates = to_list("controller.reactive.rates", v);
            }},
      DCC_DOUBLE("radio.data_rate", radio.data_rate_bps),
      DCC_TIME("radio.phy_overhead_us", radio.phy_overhead, fmt_us, us_of),
      DCC_DOUBLE("radio.sense_range", radio.sense_range_m),
      DCC_DOUBLE("radio.rx_range", radio.rx_range_m),
      DCC_TIME("radio.slot_us", radio.slot, fmt_us, us_of),
      DCC_TIME("radio.sifs_us", radio.sifs, fmt_us, us_of),
      Field{"radio.aifsn", [](const RunConfig& c) { return fmt_list(c.radio.aifsn); },
            [](RunConfig& c, std::string_view v) {
              const auto l = to_list("radio.aifsn", v);
              if (l.size() != 4) throw ConfigError("radio.aifsn", "expected 4 values (VO,VI,BE,BK)");
              for (std::size_t i = 0; i < 4; ++i) c.radio.aifsn[i] = static_cast<int>(l[i]);
            }},
      Field{"radio.cw_min", [](const RunConfig& c) { return fmt_list(c.radio.cw_min); },
            [](RunConfig& c, std::string_view v) {
              const auto l = to_list("radio.cw_min", v);
              if (l.size() != 4) throw ConfigError("radio.cw_min", "expected 4 values (VO,VI,BE,BK)");
              for (std::size_t i = 0; i < 4; ++i) c.radio.cw_min[i] = static_cast<int>(l[i]);
            }},
      Field{"radio.model",
            [](const RunConfig& c) {
              return std::string(c.radio.model == ReceptionModel::Binary ? "binary" : "logistic");
            },
            [](RunConfig& c, std::string_view v) {
              const std::string t = trim(v);
              if (t == "binary") {
                c.radio.model = ReceptionModel::Binary;
              } else if (t == "logistic") {
                c.radio.model = ReceptionModel::Probabilistic;
              } else {
                throw ConfigError("radio.model", "expected binary or logistic");
              }
            }},
      DCC_DOUBLE("radio.rolloff", radio.rolloff_m),
      DCC_BOOL("traffic.cam", traffic.cam),
      DCC_BYTES("traffic.cam_bytes", traffic.cam_params.size_bytes),
      DCC_BOOL("traffic.background", traffic.background.enabled),
      DCC_BYTES("traffic.background_bytes", traffic.background.size_bytes),
      Field{"traffic.queue_capacity",
            [](const RunConfig& c) { return std::to_string(c.traffic.queue_capacity); },
            [](RunConfig& c, std::string_view v) {
              const auto n = to_int("traffic.queue_capacity", v);
              if (n < 1) throw ConfigError("traffic.queue_capacity", "must be >= 1");
              c.traffic.queue_capacity = static_cast<std::size_t>(n);
            }},
      DCC_DOUBLE("cam.position_threshold", traffic.cam_params.position_threshold_m),
      DCC_DOUBLE("cam.speed_threshold", traffic.cam_params.speed_threshold),
      DCC_DOUBLE("cam.heading_threshold", traffic.cam_params.heading_threshold_deg),
      DCC_TIME("cam.min_interval_ms", traffic.cam_params.min_interval, fmt_ms, ms_of),
      DCC_TIME("cam.max_interval_ms", traffic.cam_params.max_interval, fmt_ms, ms_of),
      DCC_TIME("cam.check_period_ms", traffic.cam_params.check_period, fmt_ms, ms_of),
      Field{"metrics.roi", [](const RunConfig& c) { return std::string(to_string(c.metrics.roi)); },
            [](RunConfig& c, std::string_view v) { c.metrics.roi = parse_roi(trim(v)); }},
      DCC_INT("metrics.sample_size", metrics.sample_size),
      DCC_DOUBLE("metrics.bin_width", metrics.bin_width_m),
      DCC_BOOL("output.cbr_windows", output.cbr_windows),
      DCC_BOOL("output.trace", output.trace),
      DCC_TIME("run.duration_s", duration, fmt_seconds, seconds_of),
      DCC_TIME("run.warmup_s", warmup, fmt_seconds, seconds_of),
      DCC_TIME("run.mobility_tick_ms", mobility_tick, fmt_ms, ms_of),
      Field{"run.seed", [](const RunConfig& c) { return std::to_string(c.seed); },
            [](RunConfig& c, std::string_view v) {
              const auto n = to_int("run.seed", v);
              if (n < 0) throw ConfigError("run.seed", "must be >= 0");
              c.seed = static_cast<std::uint64_t>(n);
            }},
      Field{"run.output_dir", [](const RunConfig& c) { return c.output_dir; },
            [](RunConfig& c, std::string_view v) { c.output_dir = trim(v); }},
      Field{"run.parallel",
            [](const RunConfig& c) { return fmt_bool(c.policy == kernels::Policy::Parallel); },
            [](RunConfig& c, std::string_view v) {
              c.policy = to_bool("run.parallel", v) ? kernels::Policy::Parallel : kernels::Policy::Serial;
            }},
  };
  return table;
}

#undef DCC_DOUBLE
#undef DCC_INT
#undef DCC_BOOL
#undef DCC_TIME
#undef DCC_BYTES

const Field* find_field(std::string_view key) {
  for (const Field& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

}  // namespace

void RunConfig::validate() const {
  scenario.validate();
  controller.params.validate();
  if (controller.algorithm == Algorithm::Reactive) controller.reactive.validate();
  if (controller.algorithm == Algorithm::LimericBounded && !controller.params.x_bound)
    throw ConfigError("controller.x_bound", "required by the bounded LIMERIC controller");
  radio.validate();
  traffic.cam_params.validate();
  if (traffic.background.size_bytes == 0)
    throw ConfigError("traffic.background_bytes", "must be positive");
  if (traffic.queue_capacity < 1) throw ConfigError("traffic.queue_capacity", "must be >= 1");
  if (!(metrics.bin_width_m > 0)) throw ConfigError("metrics.bin_width", "must be positive");
  if (duration <= Duration::zero()) throw ConfigError("run.duration_s", "must be positive");
  if (warmup < Duration::zero()) throw ConfigError("run.warmup_s", "must be >= 0");
  if (duration < warmup) throw ConfigError("run.duration_s", "shorter than run.warmup_s");
  if (mobility_tick <= Duration::zero()) throw ConfigError("run.mobility_tick_ms", "must be positive");
  if (controller.params.t_cbr.count() % 1000 != 0)
    throw ConfigError("controller.t_cbr_ms", "must be a whole number of milliseconds");
  if (traffic.cam_params.check_period.count() % 1000 != 0)
    throw ConfigError("cam.check_period_ms", "must be a whole number of milliseconds");
  if (output_dir.empty()) throw ConfigError("run.output_dir", "must not be empty");
}

RunConfig default_config(ScenarioKind kind) {
  RunConfig c;
  c.scenario.kind = kind;
  switch (kind) {
    case ScenarioKind::Oval:
      c.scenario.preroll = Duration::zero();
      c.duration = std::chrono::seconds(180);
      c.warmup = std::chrono::seconds(60);
      c.metrics.roi = Roi::Straight;
      break;
    case ScenarioKind::TrafficLight:
      c.scenario.preroll = std::chrono::seconds(20);
      c.duration = std::chrono::seconds(80);
      c.warmup = c.scenario.preroll;
      break;
    case ScenarioKind::Junction:
      c.scenario.preroll = std::chrono::seconds(60);
      c.duration = std::chrono::seconds(150);
      c.warmup = c.scenario.preroll;
      c.traffic.background.enabled = true;
      break;
  }
  return c;
}

std::vector<std::pair<std::string, std::string>> serialize(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Field& f : fields()) out.emplace_back(f.key, f.get(config));
  return out;
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : serialize(config)) out += k + " = " + v + "\n";
  return out;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  const Field* f = find_field(trim(key));
  if (f == nullptr) throw ConfigError(std::string(key), "unknown configuration key");
  f->set(config, value);
}

std::pair<std::string, std::string> split_setting(std::string_view kv) {
  const auto eq = kv.find('=');
  if (eq == std::string_view::npos) throw ConfigError(std::string(kv), "expected key=value");
  std::string key = trim(kv.substr(0, eq));
  if (key.empty()) throw ConfigError(std::string(kv), "empty key");
  return {key, trim(kv.substr(eq + 1))};
}

RunConfig parse_config(std::string_view text,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    if (line.find('=') == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no), "expected key = value");
    entries.push_back(split_setting(line));
  }
  entries.insert(entries.end(), overrides.begin(), overrides.end());
  for (const auto& [k, v] : entries) {
    if (find_field(k) == nullptr) throw ConfigError(k, "unknown configuration key");
  }

  // The last occurrence of the two structural keys wins, as for every key.
  auto last_of = [&](std::string_view key) -> const std::string* {
    const std::string* found = nullptr;
    for (const auto& [k, v] : entries)
      if (k == key) found = &v;
    return found;
  };
  const auto* kind = last_of("scenario.kind");
  RunConfig config = default_config(kind ? parse_scenario(trim(*kind)) : ScenarioKind::Oval);
  if (const auto* preset = last_of("controller.preset")) config.controller = make_preset(trim(*preset));
  for (const auto& [k, v] : entries) {
    if (k == "scenario.kind" || k == "controller.preset") continue;
    apply_setting(config, k, v);
  }
  return config;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const Field& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

}  // namespace dcc
