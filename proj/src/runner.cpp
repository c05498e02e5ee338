#include "dcc/runner.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace dcc {

namespace {

constexpr int kCsvPrecision = 10;

std::ostringstream csv_stream() {
  std::ostringstream os;
  os << std::setprecision(kCsvPrecision);
  return os;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << bytes;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void prepare_dir(const std::filesystem::path& dir, bool overwrite) {
  namespace fs = std::filesystem;
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw ConfigError("run.output_dir", "'" + dir.string() + "' is not a directory");
    if (!fs::is_empty(dir) && !overwrite) {
      throw ConfigError("run.output_dir", "'" + dir.string() + "' already has outputs (use --overwrite)");
    }
  }
  fs::create_directories(dir);
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(md[i]);
  return os.str();
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

RunSummary summarize(const Simulation& sim) {
  const MetricsStore& m = sim.metrics();
  const RunConfig& cfg = sim.config();
  const double lo = to_seconds(cfg.warmup - sim.origin());
  const double hi = to_seconds(cfg.duration - sim.origin());
  const int all = static_cast<int>(m.groups().size()) - 1;

  RunSummary s;
  double cbr = 0.0, delta = 0.0;
  std::size_t n_cbr = 0, n_delta = 0;
  for (const SeriesRow& r : m.series_rows()) {
    if (r.group != all || r.t_s < lo || r.t_s > hi) continue;
    if (r.quantity == Quantity::Cbr) {
      cbr += r.value;
      ++n_cbr;
    } else if (r.quantity == Quantity::Delta) {
      delta += r.value;
      ++n_delta;
    }
  }
  if (n_cbr > 0) s.cbr_mean = cbr / static_cast<double>(n_cbr);
  if (n_delta > 0) s.delta_mean = delta / static_cast<double>(n_delta);
  s.cam_interval_s = mean_cam_interval(m);
  for (const DelayStat& d : e2e_delay(m)) {
    if (d.profile == DataProfile::DP2) s.dp2_delay_mean_s = d.mean_s;
  }
  std::uint64_t pot = 0, del = 0;
  for (const TxLogEntry& t : m.tx_log()) {
    if (t.profile != DataProfile::DP2) continue;
    for (std::uint32_t i = t.rx_begin; i < t.rx_end; ++i) {
      ++pot;
      if (m.rx_log()[i].delivered) ++del;
    }
  }
  if (pot > 0) s.dp2_pdr = static_cast<double>(del) / static_cast<double>(pot);
  for (const FrameCounters& c : m.all_counters()) {
    s.generated += c.generated;
    s.dropped += c.dropped;
  }
  return s;
}

std::map<std::string, std::string> write_outputs(const Simulation& sim,
                                                 const std::filesystem::path& dir, bool overwrite) {
  prepare_dir(dir, overwrite);
  const RunConfig& cfg = sim.config();
  const MetricsStore& m = sim.metrics();
  std::vector<std::pair<std::string, std::string>> files;

  {
    auto os = csv_stream();
    write_pdr_csv(os, pdr_by_distance(m, cfg.metrics.bin_width_m, DataProfile::DP2, cfg.policy));
    files.emplace_back("pdr.csv", os.str());
  }
  {
    auto os = csv_stream();
    write_ipg_csv(os, ipg_p95(m, cfg.metrics.bin_width_m));
    files.emplace_back("ipg.csv", os.str());
  }
  {
    auto os = csv_stream();
    write_delay_csv(os, e2e_delay(m));
    files.emplace_back("delay.csv", os.str());
  }
  {
    auto os = csv_stream();
    write_series_csv(os, m);
    files.emplace_back("series.csv", os.str());
  }
  if (cfg.output.cbr_windows) {
    auto os = csv_stream();
    os << "vehicle,window_start,cbr\n";
    for (const CbrWindowRow& r : sim.cbr_windows())
      os << r.vehicle << ',' << to_seconds(r.window_start) << ',' << r.cbr << '\n';
    files.emplace_back("cbr_windows.csv", os.str());
  }
  if (cfg.output.trace) {
    auto os = csv_stream();
    os << "vehicle,t,x,y,speed,heading\n";
    for (const TraceRow& r : sim.trace())
      os << r.vehicle << ',' << to_seconds(r.t) << ',' << r.x << ',' << r.y << ',' << r.speed << ','
         << r.heading << '\n';
    files.emplace_back("trace.csv", os.str());
  }

  std::map<std::string, std::string> sums;
  for (const auto& [name, bytes] : files) {
    write_file(dir / name, bytes);
    sums[name] = sha256_hex(bytes);
  }

  nlohmann::ordered_json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kToolVersion;
  manifest["seed"] = cfg.seed;
  manifest["origin_s"] = to_seconds(sim.origin());
  nlohmann::ordered_json conf = nlohmann::ordered_json::object();
  for (const auto& [k, v] : serialize(cfg)) conf[k] = v;
  manifest["config"] = std::move(conf);
  nlohmann::ordered_json checks = nlohmann::ordered_json::object();
  for (const auto& [name, sum] : sums) checks[name] = sum;
  manifest["checksums"] = std::move(checks);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return sums;
}

RunResult run(const RunConfig& config, bool overwrite) {
  config.validate();
  const std::filesystem::path dir = config.output_dir;
  // Refuse a collision before spending time on the simulation.
  if (std::filesystem::exists(dir) && std::filesystem::is_directory(dir) &&
      !std::filesystem::is_empty(dir) && !overwrite) {
    prepare_dir(dir, false);
  }
  Simulation sim(config);
  sim.run();
  RunResult r;
  r.dir = dir;
  r.checksums = write_outputs(sim, dir, overwrite);
  r.summary = summarize(sim);
  return r;
}

SweepDimension parse_sweep_dimension(std::string_view name) {
  if (name == "controller") return SweepDimension::Controller;
  if (name == "density") return SweepDimension::Density;
  if (name == "seed") return SweepDimension::Seed;
  throw ConfigError("sweep.dimension", "unknown '" + std::string(name) + "' (valid: controller, density, seed)");
}

std::string_view to_string(SweepDimension d) {
  switch (d) {
    case SweepDimension::Controller: return "controller";
    case SweepDimension::Density: return "density";
    case SweepDimension::Seed: return "seed";
  }
  return "?";
}

std::vector<RunResult> sweep(const RunConfig& base, SweepDimension dimension,
                             const std::vector<std::string>& values, bool overwrite) {
  if (values.empty()) throw ConfigError("sweep.values", "no values given");
  const std::string key = dimension == SweepDimension::Controller ? "controller.preset"
                          : dimension == SweepDimension::Density  ? "scenario.density"
                                                                  : "run.seed";
  const std::filesystem::path root = base.output_dir;
  std::vector<RunConfig> configs;
  for (const std::string& v : values) {
    RunConfig c = base;
    if (dimension == SweepDimension::Controller) {
      // A new preset replaces the controller block only.
      c.controller = make_preset(v);
    } else {
      apply_setting(c, key, v);
    }
    c.output_dir = (root / (std::string(to_string(dimension)) + "-" + v)).string();
    c.validate();
    configs.push_back(std::move(c));
  }
  std::filesystem::create_directories(root);
  if (std::filesystem::exists(root / "sweep.csv") && !overwrite) {
    throw ConfigError("run.output_dir", "'" + root.string() + "' already has a sweep (use --overwrite)");
  }

  std::vector<RunResult> results(configs.size());
  std::vector<std::string> errors(configs.size());
  const auto n = static_cast<std::int64_t>(configs.size());
#ifdef DCC_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      results[u] = run(configs[u], overwrite);
    } catch (const ConfigError& e) {
      errors[u] = std::string("config:") + e.what();
    } catch (const std::exception& e) {
      errors[u] = e.what();
    }
  }
  for (const std::string& e : errors) {
    if (e.rfind("config:", 0) == 0) throw ConfigError("", e.substr(7));
    if (!e.empty()) throw Error(e);
  }

  auto os = csv_stream();
  write_sweep_csv(os, dimension, values, results);
  write_file(root / "sweep.csv", os.str());
  return results;
}

void write_sweep_csv(std::ostream& os, SweepDimension dimension,
                     const std::vector<std::string>& values, const std::vector<RunResult>& results) {
  os << to_string(dimension)
     << ",cbr_mean,delta_mean,cam_interval_s,dp2_delay_mean_s,dp2_pdr,generated,dropped\n";
  for (std::size_t i = 0; i < values.size() && i < results.size(); ++i) {
    const RunSummary& s = results[i].summary;
    os << values[i] << ',' << s.cbr_mean << ',' << s.delta_mean << ',' << s.cam_interval_s << ','
       << s.dp2_delay_mean_s << ',' << s.dp2_pdr << ',' << s.generated << ',' << s.dropped << '\n';
  }
}

void write_ideal_loop_csv(std::ostream& os, const IdealLoopTrace& trace) {
  os << "step,delta,cbr\n";
  for (std::size_t i = 0; i < trace.delta.size(); ++i)
    os << i + 1 << ',' << trace.delta[i] << ',' << trace.cbr[i] << '\n';
}

RunConfig load_config_file(const std::filesystem::path& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
  const std::string text = read_file(path);
  if (path.extension() != ".json") return parse_config(text, overrides);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("", path.string() + ": " + e.what());
  }
  if (!j.contains("config") || !j["config"].is_object()) {
    throw ConfigError("", path.string() + ": manifest has no 'config' object");
  }
  std::string lines;
  for (const auto& [k, v] : j["config"].items()) {
    if (!v.is_string()) throw ConfigError(k, "expected a string value in the manifest");
    lines += k + " = " + v.get<std::string>() + "\n";
  }
  return parse_config(lines, overrides);
}

}  // namespace dcc
