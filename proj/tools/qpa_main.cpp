// Command-line front end for the distillation simulator: full-grid sweeps,
// single-point reports, key-rate thresholds and region summaries.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qpa/qpa.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct SweepFlags {
  std::string config_path;
  std::string mode;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out_dir;
  bool plots = false;
};

qpa::SweepConfig effective_config(const SweepFlags& flags) {
  qpa::SweepConfig cfg;
  if (!flags.config_path.empty()) cfg = qpa::SweepConfig::load(flags.config_path);
  if (!flags.mode.empty()) cfg.mode = qpa::sweep_mode_from_name(flags.mode);
  if (cfg.mode == qpa::SweepMode::MonteCarlo && !cfg.mc.has_value()) cfg.mc = qpa::McConfig{};
  if (flags.seed.has_value()) {
    if (!cfg.mc.has_value()) cfg.mc = qpa::McConfig{};
    cfg.mc->seed = *flags.seed;
  }
  if (!flags.out_dir.empty()) cfg.output_dir = flags.out_dir;
  if (flags.plots) cfg.emit_plots = true;
  cfg.validate();
  return cfg;
}

void print_report_line(const char* name, double value) {
  std::printf("%-10s %.9f\n", name, value);
}

void print_estimate_line(const char* name, const qpa::Estimate& e) {
  std::printf("%-10s %.9f  [%.9f, %.9f]\n", name, e.value, e.lower, e.upper);
}

void print_key_rates(const qpa::KeyRateReport& r) {
  print_report_line("e_z_pol", r.pol.e_z);
  print_report_line("e_x_pol", r.pol.e_x);
  print_report_line("e_z_et", r.et.e_z);
  print_report_line("e_x_et", r.et.e_x);
  print_report_line("k_pol", r.k_pol);
  print_report_line("k_et", r.k_et);
  print_report_line("k_noisy", r.k_noisy);
  print_report_line("yield", r.yield);
  print_report_line("e_z_post", r.post_pol.e_z);
  print_report_line("e_x_post", r.post_pol.e_x);
  print_report_line("k_qpa", r.k_qpa);
  print_report_line("gain", r.gain);
  std::printf("%-10s %s\n", "region", std::string(qpa::region_name(r.region)).c_str());
}

int cmd_sweep(const SweepFlags& flags) {
  const qpa::SweepConfig cfg = effective_config(flags);
  const qpa::SweepResult result = qpa::run_sweep(cfg, flags.threads);

  std::filesystem::create_directories(cfg.output_dir);
  const auto dir = std::filesystem::path(cfg.output_dir);
  const std::string csv_path = (dir / "sweep.csv").string();
  const std::string json_path = (dir / "sweep.json").string();
  qpa::emit_csv(result, csv_path);
  qpa::emit_json(result, json_path);

  std::printf("grid       %zu x %zu (%zu points)\n", result.np, result.nq, result.grid.size());
  std::printf("mode       %s\n", std::string(qpa::sweep_mode_name(cfg.mode)).c_str());
  std::printf("csv        %s\n", csv_path.c_str());
  std::printf("json       %s\n", json_path.c_str());
  if (cfg.emit_plots) {
    for (const std::string& path : qpa::render_maps(result, cfg.output_dir)) {
      std::printf("map        %s\n", path.c_str());
    }
  }

  double best_gain = 0.0;
  const qpa::GridPoint* best = nullptr;
  for (const qpa::GridPoint& gp : result.grid) {
    if (best == nullptr || gp.report.gain > best_gain) {
      best_gain = gp.report.gain;
      best = &gp;
    }
  }
  if (best != nullptr) {
    std::printf("max_gain   %.9f at p=%g q=%g\n", best->report.gain, best->p, best->q);
  }
  return kExitOk;
}

int cmd_point(double p, double q, double v_pol, double v_et, const std::string& mode,
              std::uint64_t pairs, std::uint64_t seed, bool franson_loss) {
  const qpa::NoiseParams params{p, q, v_pol, v_et};
  print_report_line("p", p);
  print_report_line("q", q);
  if (qpa::sweep_mode_from_name(mode) == qpa::SweepMode::Analytic) {
    print_key_rates(qpa::evaluate_point(params));
    return kExitOk;
  }
  qpa::McConfig cfg;
  cfg.n_pairs = pairs;
  cfg.seed = seed;
  cfg.apply_franson_loss = franson_loss;
  const qpa::McReport mc = qpa::simulate_experiment(params, cfg);
  print_key_rates(mc.report);
  std::printf("\nwilson 95%% intervals (n_pairs per batch: %llu)\n",
              static_cast<unsigned long long>(cfg.n_pairs));
  print_estimate_line("e_z_pol", mc.intervals.pol_z);
  print_estimate_line("e_x_pol", mc.intervals.pol_x);
  print_estimate_line("e_z_et", mc.intervals.et_z);
  print_estimate_line("e_x_et", mc.intervals.et_x);
  print_estimate_line("yield", mc.intervals.yield);
  if (mc.report.qpa_defined) {
    print_estimate_line("e_z_post", mc.intervals.post_z);
    print_estimate_line("e_x_post", mc.intervals.post_x);
  }
  return kExitOk;
}

int cmd_thresholds() {
  std::printf("pol_threshold %s\n", qpa::format_sig12(qpa::threshold_pol()).c_str());
  std::printf("et_threshold %s\n", qpa::format_sig12(qpa::threshold_et()).c_str());
  return kExitOk;
}

int cmd_regions(const SweepFlags& flags) {
  const qpa::SweepConfig cfg = effective_config(flags);
  const qpa::SweepResult result = qpa::run_sweep(cfg, flags.threads);
  std::printf("%-6s %8s %12s %22s %22s\n", "region", "cells", "area", "p_range", "q_range");
  for (const qpa::RegionSummary& s : qpa::summarize_regions(result)) {
    if (s.cells == 0) {
      std::printf("%-6s %8zu %12s %22s %22s\n",
                  std::string(qpa::region_name(s.region)).c_str(), s.cells, "-", "-", "-");
      continue;
    }
    char pr[32], qr[32];
    std::snprintf(pr, sizeof(pr), "[%g, %g]", s.p_min, s.p_max);
    std::snprintf(qr, sizeof(qr), "[%g, %g]", s.q_min, s.q_max);
    std::printf("%-6s %8zu %12.6f %22s %22s\n",
                std::string(qpa::region_name(s.region)).c_str(), s.cells, s.area, pr, qr);
  }
  std::printf("positive_gain_components %zu\n", qpa::count_positive_gain_components(result));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Key-rate simulator for single-copy entanglement distillation"};
  app.require_subcommand(1);

  SweepFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "evaluate a noise grid and write CSV/JSON");
  sweep->add_option("--config", sweep_flags.config_path, "JSON config file");
  sweep->add_option("--mode", sweep_flags.mode, "analytic or montecarlo")
      ->check(CLI::IsMember({"analytic", "montecarlo"}));
  std::uint64_t sweep_seed = 0;
  CLI::Option* seed_opt = sweep->add_option("--seed", sweep_seed, "Monte Carlo master seed");
  sweep->add_option("--threads", sweep_flags.threads, "worker thread count (0 = auto)");
  sweep->add_option("--out", sweep_flags.out_dir, "output directory");
  sweep->add_flag("--plots", sweep_flags.plots, "also write PPM heatmaps");

  double p = 0.0, q = 0.0, v_pol = 0.0, v_et = 0.0;
  std::string point_mode = "analytic";
  std::uint64_t point_pairs = 100000, point_seed = 1;
  bool franson_loss = false;
  CLI::App* point = app.add_subcommand("point", "report key rates at one noise point");
  point->add_option("--p", p, "polarisation error weight")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  point->add_option("--q", q, "energy-time error weight")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  point->add_option("--v-pol", v_pol, "intrinsic polarisation error weight")
      ->check(CLI::Range(0.0, 1.0));
  point->add_option("--v-et", v_et, "intrinsic energy-time error weight")
      ->check(CLI::Range(0.0, 1.0));
  point->add_option("--mode", point_mode, "analytic or montecarlo")
      ->check(CLI::IsMember({"analytic", "montecarlo"}));
  point->add_option("--pairs", point_pairs, "pairs per measured batch (montecarlo)");
  point->add_option("--seed", point_seed, "random seed (montecarlo)");
  point->add_flag("--franson-loss", franson_loss, "apply 50% interferometer postselection loss");

  CLI::App* thresholds =
      app.add_subcommand("thresholds", "print the per-DOF noise thresholds");

  SweepFlags region_flags;
  CLI::App* regions = app.add_subcommand("regions", "summarise gain regions over a sweep");
  regions->add_option("--config", region_flags.config_path, "JSON config file");
  regions->add_option("--threads", region_flags.threads, "worker thread count (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (seed_opt->count() > 0) sweep_flags.seed = sweep_seed;

  try {
    if (sweep->parsed()) return cmd_sweep(sweep_flags);
    if (point->parsed()) {
      return cmd_point(p, q, v_pol, v_et, point_mode, point_pairs, point_seed, franson_loss);
    }
    if (thresholds->parsed()) return cmd_thresholds();
    if (regions->parsed()) return cmd_regions(region_flags);
  } catch (const qpa::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitConfig;
}
