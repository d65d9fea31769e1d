#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "hypx/checks.hpp"
#include "hypx/harness.hpp"

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw hypx::ConfigError("cannot write " + path.string());
  os << content;
}

void write_outputs(const fs::path& dir, const hypx::ExperimentConfig& cfg,
                   const std::vector<hypx::RunResult>& results) {
  fs::create_directories(dir);
  const auto agg = hypx::aggregate(results);
  write_file(dir / "steps.csv", hypx::step_csv_string(results));
  write_file(dir / "summary.csv", hypx::summary_csv_string(agg.summaries));
  write_file(dir / "config_resolved.cfg", hypx::render_config(cfg));
}

void print_brief(const hypx::ExperimentConfig& cfg, const std::vector<hypx::RunResult>& results) {
  const auto agg = hypx::aggregate(results);
  const double mean_cum = agg.mean_cum_regret.empty() ? 0.0 : agg.mean_cum_regret.back();
  const double sem = agg.sem_cum_regret.empty() ? 0.0 : agg.sem_cum_regret.back();
  std::cout << "runs: " << results.size() << "  horizon: " << cfg.horizon
            << "  mean cumulative regret: " << mean_cum << " (sem " << sem << ")"
            << "  mean average regret: " << hypx::mean_average_regret(agg.summaries)
            << "  computation: " << agg.summaries.front().computation << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hypermodel bandit simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, suite;
  int runs_override = -1;
  long long seed_override = -1;
  int threads = 1;

  auto* run = app.add_subcommand("run", "run one experiment configuration");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory for CSVs");
  run->add_option("--runs", runs_override, "override [harness] runs");
  run->add_option("--seed", seed_override, "override [harness] seed");
  run->add_option("--threads", threads, "worker threads across runs");

  auto* sweep = app.add_subcommand("sweep", "run a config grid (comma-list values)");
  sweep->add_option("--config", config_path, "config file with value lists")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--threads", threads, "worker threads across runs");

  auto* check = app.add_subcommand("check", "run an oracle suite");
  check->add_option("--suite", suite, "gradients|posterior|ids|bisection")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      hypx::ExperimentConfig cfg = hypx::parse_config_file(config_path);
      if (runs_override >= 0) cfg.n_runs = runs_override;
      if (seed_override >= 0) cfg.base_seed = static_cast<std::uint64_t>(seed_override);
      const auto results = hypx::run_experiment(cfg, threads);
      if (!out_dir.empty()) write_outputs(out_dir, cfg, results);
      print_brief(cfg, results);
      return 0;
    }
    if (sweep->parsed()) {
      const auto points = hypx::parse_sweep_file(config_path);
      fs::create_directories(out_dir);
      std::string table =
          "point,label,runs,mean_cum_regret,sem_cum_regret,mean_avg_regret,computation\n";
      for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        const auto results = hypx::run_experiment(p.config, threads);
        const auto agg = hypx::aggregate(results);
        char row[256];
        std::snprintf(row, sizeof row, "%zu,%s,%d,%.17g,%.17g,%.17g,%llu\n", i, p.label.c_str(),
                      p.config.n_runs, agg.mean_cum_regret.back(), agg.sem_cum_regret.back(),
                      hypx::mean_average_regret(agg.summaries), agg.summaries.front().computation);
        table += row;
        write_file(fs::path(out_dir) / ("summary_" + std::to_string(i) + ".csv"),
                   hypx::summary_csv_string(agg.summaries));
        std::cout << "point " << i << " [" << p.label << "] " << row;
      }
      write_file(fs::path(out_dir) / "sweep.csv", table);
      return 0;
    }
    const hypx::CheckResult res = hypx::run_check_suite(suite);
    std::cout << "[" << (res.pass ? "PASS" : "FAIL") << "] " << res.name << "\n"
              << res.detail << "\n";
    return res.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
