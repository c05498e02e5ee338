// dccsim: command-line front end for the DCC simulator.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dcc/config.hpp"
#include "dcc/controllers.hpp"
#include "dcc/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOptions {
  std::string config_path;
  std::int64_t seed = -1;
  std::string out;
  bool overwrite = false;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "config file (key = value lines, or a manifest.json)");
  cmd->add_option("--seed", o.seed, "master seed")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_flag("--overwrite", o.overwrite, "replace existing outputs");
  cmd->add_option("--set", o.sets, "key=value override (repeatable)");
}

dcc::RunConfig resolve(const CommonOptions& o) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const std::string& kv : o.sets) overrides.push_back(dcc::split_setting(kv));
  if (o.seed >= 0) overrides.emplace_back("run.seed", std::to_string(o.seed));
  if (!o.out.empty()) overrides.emplace_back("run.output_dir", o.out);
  dcc::RunConfig cfg = o.config_path.empty() ? dcc::parse_config("", overrides)
                                             : dcc::load_config_file(o.config_path, overrides);
  cfg.validate();
  return cfg;
}

void print_summary(const dcc::RunResult& r) {
  const dcc::RunSummary& s = r.summary;
  std::cout << "outputs: " << r.dir.string() << '\n'
            << std::setprecision(6) << "cbr_mean " << s.cbr_mean << "  delta_mean " << s.delta_mean
            << "  cam_interval_s " << s.cam_interval_s << "  dp2_delay_mean_s " << s.dp2_delay_mean_s
            << "  dp2_pdr " << s.dp2_pdr << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator of decentralized congestion control for vehicular networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dcc::kToolVersion));

  CommonOptions run_opts, sweep_opts, loop_opts, val_opts;

  CLI::App* run_cmd = app.add_subcommand("run", "run one simulation and write its outputs");
  add_common(run_cmd, run_opts);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run one simulation per value of a dimension");
  add_common(sweep_cmd, sweep_opts);
  std::string dimension;
  std::vector<std::string> values;
  sweep_cmd->add_option("--dimension", dimension, "controller | density | seed")->required();
  sweep_cmd->add_option("--values", values, "values to sweep")->required()->delimiter(',');

  CLI::App* loop_cmd = app.add_subcommand("ideal-loop", "iterate a controller against cbr = K * delta");
  add_common(loop_cmd, loop_opts);
  std::string preset;
  int k = 100;
  int steps = 500;
  loop_cmd->add_option("--preset", preset, "controller preset (default: the config's)");
  loop_cmd->add_option("--k", k, "number of identical vehicles")->check(CLI::PositiveNumber);
  loop_cmd->add_option("--steps", steps, "controller updates")->check(CLI::PositiveNumber);

  CLI::App* val_cmd = app.add_subcommand("validate-config", "resolve and print a config");
  add_common(val_cmd, val_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) {
      const dcc::RunConfig cfg = resolve(run_opts);
      print_summary(dcc::run(cfg, run_opts.overwrite));
    } else if (*sweep_cmd) {
      const dcc::RunConfig cfg = resolve(sweep_opts);
      const auto dim = dcc::parse_sweep_dimension(dimension);
      const auto results = dcc::sweep(cfg, dim, values, sweep_opts.overwrite);
      dcc::write_sweep_csv(std::cout << std::setprecision(6), dim, values, results);
    } else if (*loop_cmd) {
      dcc::RunConfig cfg = resolve(loop_opts);
      if (!preset.empty()) cfg.controller = dcc::make_preset(preset);
      const dcc::IdealLoopTrace trace = dcc::ideal_loop(cfg.controller, k, steps);
      if (loop_opts.out.empty()) {
        dcc::write_ideal_loop_csv(std::cout << std::setprecision(10), trace);
      } else {
        const std::filesystem::path dir = loop_opts.out;
        const auto file = dir / "ideal_loop.csv";
        if (std::filesystem::exists(file) && !loop_opts.overwrite) {
          throw dcc::ConfigError("run.output_dir", "'" + dir.string() + "' already has outputs (use --overwrite)");
        }
        std::filesystem::create_directories(dir);
        std::ofstream os(file);
        dcc::write_ideal_loop_csv(os << std::setprecision(10), trace);
        if (!os) throw dcc::Error("write failed for '" + file.string() + "'");
      }
    } else if (*val_cmd) {
      std::cout << dcc::to_text(resolve(val_opts));
    }
  } catch (const dcc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime fault: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
