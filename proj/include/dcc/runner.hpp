#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dcc/config.hpp"
#include "dcc/controllers.hpp"
#include "dcc/simulation.hpp"

namespace dcc {

inline constexpr std::string_view kToolName = "dccsim";
inline constexpr std::string_view kToolVersion = "1.0.0";

/// Headline numbers of one run, over the measurement window.
struct RunSummary {
  double cbr_mean = 0.0;     // mean of the per-window CBR of all vehicles
  double delta_mean = 0.0;   // 0 when the controller has no allowance
  double cam_interval_s = 0.0;
  double dp2_delay_mean_s = 0.0;
  double dp2_pdr = 0.0;      // over every logged (sender, receiver) pair
  std::uint64_t generated = 0;
  std::uint64_t dropped = 0;
};

struct RunResult {
  std::filesystem::path dir;
  RunSummary summary;
  std::map<std::string, std::string> checksums;  // file name -> SHA-256 hex
};

RunSummary summarize(const Simulation& sim);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Writes the metric CSVs and manifest.json for a finished simulation.
/// Refuses a non-empty `dir` unless `overwrite`.
std::map<std::string, std::string> write_outputs(const Simulation& sim,
                                                 const std::filesystem::path& dir, bool overwrite);

/// Simulates `config` and writes into config.output_dir.
RunResult run(const RunConfig& config, bool overwrite);

enum class SweepDimension { Controller, Density, Seed };
SweepDimension parse_sweep_dimension(std::string_view name);
std::string_view to_string(SweepDimension d);

/// One run per value, each in `<output_dir>/<dimension>-<value>`, then
/// `<output_dir>/sweep.csv`. Runs execute in parallel when OpenMP is on.
std::vector<RunResult> sweep(const RunConfig& base, SweepDimension dimension,
                             const std::vector<std::string>& values, bool overwrite);

void write_sweep_csv(std::ostream& os, SweepDimension dimension,
                     const std::vector<std::string>& values, const std::vector<RunResult>& results);

void write_ideal_loop_csv(std::ostream& os, const IdealLoopTrace& trace);

/// Reads a `key = value` config file, or the resolved config recorded in a
/// manifest.json, then applies `overrides`.
RunConfig load_config_file(const std::filesystem::path& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides = {});

}  // namespace dcc
