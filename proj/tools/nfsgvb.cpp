// SPDX-License-Identifier: Apache-2.0
// nfsgvb: Monte-Carlo sweeps and single-trial diagnostics.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "nfsgvb/config.hpp"
#include "nfsgvb/error.hpp"
#include "nfsgvb/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

void print_summary(const std::vector<nfsgvb::SummaryRow>& rows) {
  std::cout << "sweep_value  estimator   median_nmse_db  mean_nmse_db  failures\n";
  for (const auto& r : rows) {
    std::cout << std::setw(11) << r.sweep_value << "  " << std::left << std::setw(10)
              << nfsgvb::to_string(r.estimator) << std::right << std::setw(16) << std::fixed
              << std::setprecision(2) << r.median_nmse_ch_db << std::setw(14) << r.mean_nmse_ch_db
              << std::setw(10) << r.failures << '\n';
    std::cout.unsetf(std::ios::floatfield);
    std::cout << std::setprecision(6);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-field XL-MIMO channel estimation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> workers;

  auto* sweep = app.add_subcommand("sweep", "Run a Monte-Carlo sweep and write CSV results");
  sweep->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--trials", trials, "Trials per sweep value");
  sweep->add_option("--seed", seed, "Master seed");
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--workers", workers, "Worker threads (0: all cores; NF_SGVB_WORKERS overrides)");

  bool dump_state = false;
  auto* single = app.add_subcommand("single", "Run one trial at the first sweep value");
  single->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  single->add_flag("--dump-state", dump_state, "Run all iterations and write the estimator trace");
  single->add_option("--out", out_dir, "Output directory");
  single->add_option("--seed", seed, "Master seed");

  auto* presets = app.add_subcommand("presets", "List or show built-in configurations");
  presets->require_subcommand(1);
  presets->add_subcommand("list", "List preset names");
  std::string preset_name;
  auto* show = presets->add_subcommand("show", "Print a preset");
  show->add_option("name", preset_name, "Preset name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (presets->parsed()) {
      if (show->parsed()) {
        std::cout << nfsgvb::preset_text(preset_name);
      } else {
        for (const std::string& name : nfsgvb::preset_names()) std::cout << name << '\n';
      }
      return 0;
    }

    nfsgvb::ExperimentConfig cfg = nfsgvb::load_config(config_path);
    if (trials) cfg.trials = *trials;
    if (seed) cfg.master_seed = *seed;
    if (out_dir) cfg.output_dir = *out_dir;
    if (workers) cfg.workers = *workers;
    cfg.validate();

    if (sweep->parsed()) {
      const nfsgvb::SweepResult result = nfsgvb::run_sweep(cfg);
      nfsgvb::write_sweep_outputs(cfg, result);
      print_summary(result.summary);
      std::cout << "wrote " << (std::filesystem::path(cfg.output_dir) / "results.csv").string() << '\n';
      if (result.failures > 0) {
        std::cerr << result.failures << " estimator run(s) failed; see manifest.txt\n";
        return kExitPartial;
      }
      return 0;
    }

    const nfsgvb::SingleReport report = nfsgvb::run_single(cfg, dump_state);
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "results.csv", std::ios::binary) << nfsgvb::results_csv(report.records);
    if (dump_state) {
      std::ofstream(dir / "trace.csv", std::ios::binary) << nfsgvb::trace_csv(report, cfg.geometry().is_upa());
      std::cout << "wrote " << (dir / "trace.csv").string() << '\n';
    }
    const double y_norm = report.input.y.norm();
    std::cout << "iterations " << report.sgvb.iterations << ", final residual "
              << report.sgvb.state.residual.norm() / (y_norm > 0 ? y_norm : 1.0) << " of ||y||\n";
    bool failed = false;
    for (const auto& rec : report.records) {
      std::cout << nfsgvb::to_string(rec.estimator) << ": nmse " << rec.nmse_ch_db << " dB";
      if (rec.failed) {
        std::cout << " (failed: " << rec.error << ")";
        failed = true;
      }
      std::cout << '\n';
    }
    return failed ? kExitPartial : 0;
  } catch (const nfsgvb::InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
