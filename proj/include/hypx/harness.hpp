#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hypx/environments.hpp"

namespace hypx {

struct AgentSpec {
  std::string kind = "hypermodel";    // hypermodel | eps_greedy | exact_ts
  std::string hypermodel = "linear";  // ensemble | linear | diagonal_linear |
                                      // hypernetwork | sparse_softmax
  std::string exploration = "ts";     // ts | ids
  int particles = 30;
  int index_dim = 30;
  int block_width = 3;
  bool additive_prior = true;
  std::string init = "gaussian";  // gaussian | truncated_gaussian | glorot | ones
  double init_scale = 0.05;
  int ids_samples = 500;
  double eps0 = 1.0;
  double tau = 1000.0;
  double prior_var = 2.25;         // exact_ts belief prior
  double prior_multiplier = 1.0;   // scales the additive prior's D
  std::vector<int> hypernet_hidden = {16};
};

struct ExperimentConfig {
  EnvSpec env;
  AgentSpec agent;
  TrainConfig train;
  long long horizon = 10000;
  int n_runs = 1;
  std::uint64_t base_seed = 1;
};

// Per-period log row.
struct RunRecord {
  int run = 0;
  std::uint64_t seed = 0;
  long long t = 0;
  int action = 0;
  double reward = 0.0;
  double regret = 0.0;
  double cum_regret = 0.0;
};

struct RunSummary {
  int run = 0;
  std::uint64_t seed = 0;
  long long horizon = 0;
  double cum_regret = 0.0;
  double avg_regret = 0.0;
  unsigned long long computation = 0;
  long long ids_fallbacks = 0;
};

struct RunResult {
  std::vector<RunRecord> records;
  RunSummary summary;
};

// Action-selection policy driven by the harness loop.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual int select(long long t, RngStream& rng) = 0;
  virtual void observe(int action, double y, RngStream& perturb_rng, RngStream& train_rng) = 0;
  virtual long long params_per_index() const { return 0; }
  virtual long long ids_fallbacks() const { return 0; }
};

std::unique_ptr<Agent> build_agent(const BanditEnvironment& env, const AgentSpec& spec,
                                   const TrainConfig& train, RngStream& init_rng);

// n_sgd * n_z * n_data * n_params, exactly.
unsigned long long computation_metric(unsigned long long n_sgd, unsigned long long n_z,
                                      unsigned long long n_data, unsigned long long n_params);

// Hypermodel parameters involved in one index sample.
long long n_params_per_index(const AgentSpec& spec, int base_param_count, int n_arms);

RunResult run_bandit(const ExperimentConfig& cfg, int run_id);
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, int threads = 1);

struct Aggregate {
  std::vector<double> mean_cum_regret;  // pointwise over runs
  std::vector<double> sem_cum_regret;   // standard error of the mean
  std::vector<RunSummary> summaries;
};

Aggregate aggregate(const std::vector<RunResult>& results);

// Mean over runs of per-run average regret, from summary rows only.
double mean_average_regret(const std::vector<RunSummary>& summaries);
bool meets_gaussian_target(const std::vector<RunSummary>& summaries, int n_arms);

void write_step_csv(std::ostream& os, const std::vector<RunResult>& results);
void write_summary_csv(std::ostream& os, const std::vector<RunSummary>& summaries);
std::string step_csv_string(const std::vector<RunResult>& results);
std::string summary_csv_string(const std::vector<RunSummary>& summaries);

// Flat key/value config file with [env], [agent], [train], [harness] sections.
// Unknown keys are errors. In sweep mode a value may be a comma list; the
// cross product defines the grid.
struct SweepPoint {
  std::string label;  // "key=value;key=value" for swept keys
  ExperimentConfig config;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);
std::vector<SweepPoint> parse_sweep_text(const std::string& text);
std::vector<SweepPoint> parse_sweep_file(const std::string& path);
std::string render_config(const ExperimentConfig& cfg);

}  // namespace hypx
