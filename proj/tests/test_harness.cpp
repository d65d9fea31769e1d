#include <doctest.h>

#include <cmath>

#include "hypx/checks.hpp"
#include "hypx/harness.hpp"

using namespace hypx;

namespace {

ExperimentConfig small_gaussian_config() {
  ExperimentConfig cfg;
  cfg.env = {"gaussian", 3, 0, 0, 2.25, 1.0};
  cfg.agent.kind = "hypermodel";
  cfg.agent.hypermodel = "diagonal_linear";
  cfg.agent.block_width = 2;
  cfg.train.step_size = 0.2;
  cfg.train.noise_var = 1.0;
  cfg.train.prior_var = 2.25;
  cfg.train.perturb_scale = 1.0;
  cfg.train.batch_data = 16;
  cfg.train.batch_index = 4;
  cfg.train.sgd_per_period = 1;
  cfg.horizon = 40;
  cfg.n_runs = 3;
  cfg.base_seed = 12;
  return cfg;
}

}  // namespace

TEST_CASE("computation metric is the exact product") {
  CHECK(computation_metric(10, 16, 1024, 100) == 16384000ULL);
  CHECK(computation_metric(0, 16, 1024, 100) == 0ULL);
  CHECK(computation_metric(1, 1, 1, 1) == 1ULL);
}

TEST_CASE("parameters involved per index sample") {
  AgentSpec spec;
  spec.kind = "hypermodel";
  spec.hypermodel = "ensemble";
  CHECK(n_params_per_index(spec, 10, 10) == 10);
  spec.hypermodel = "diagonal_linear";
  spec.block_width = 3;
  CHECK(n_params_per_index(spec, 10, 10) == 40);  // K(m+1)
  spec.hypermodel = "linear";
  spec.index_dim = 30;
  CHECK(n_params_per_index(spec, 331, 100) == 331 * 31);
  spec.hypermodel = "sparse_softmax";
  CHECK(n_params_per_index(spec, 32, 62) == 32);
  spec.kind = "eps_greedy";
  CHECK(n_params_per_index(spec, 32, 62) == 0);
}

TEST_CASE("aggregate: single run, constant-regret mean, standard error") {
  std::vector<RunResult> results(2);
  for (int r = 0; r < 2; ++r) {
    double cum = 0.0;
    for (int t = 0; t < 5; ++t) {
      cum += (r == 0 ? 1.0 : 3.0);
      results[r].records.push_back({r, 0, t, 0, 0.0, r == 0 ? 1.0 : 3.0, cum});
    }
    results[r].summary = {r, 0, 5, cum, cum / 5, 0, 0};
  }
  const Aggregate one = aggregate({results[0]});
  CHECK(one.mean_cum_regret.back() == 5.0);
  CHECK(one.sem_cum_regret.back() == 0.0);

  const Aggregate both = aggregate(results);
  CHECK(both.mean_cum_regret[0] == 2.0);
  CHECK(both.mean_cum_regret.back() == 10.0);
  // sem of {5, 15}: sd = sqrt(50), sem = sd/sqrt(2) = 5
  CHECK(both.sem_cum_regret.back() == doctest::Approx(5.0));
  CHECK(mean_average_regret(both.summaries) == doctest::Approx(2.0));

  std::vector<RunResult> bad = results;
  bad[1].records.pop_back();
  CHECK_THROWS_AS(aggregate(bad), ContractError);
}

TEST_CASE("zero horizon produces an empty record list") {
  ExperimentConfig cfg = small_gaussian_config();
  cfg.horizon = 0;
  const RunResult r = run_bandit(cfg, 0);
  CHECK(r.records.empty());
  CHECK(r.summary.cum_regret == 0.0);
}

TEST_CASE("csv headers and determinism across executions and threads") {
  const ExperimentConfig cfg = small_gaussian_config();
  const auto r1 = run_experiment(cfg, 1);
  const auto r2 = run_experiment(cfg, 3);
  const std::string steps1 = step_csv_string(r1);
  CHECK(steps1.substr(0, steps1.find('\n')) == "run,seed,t,action,reward,regret,cum_regret");
  const std::string sum1 = summary_csv_string(aggregate(r1).summaries);
  CHECK(sum1.substr(0, sum1.find('\n')) == "run,seed,horizon,cum_regret,avg_regret,computation");
  CHECK(steps1 == step_csv_string(r2));
  CHECK(sum1 == summary_csv_string(aggregate(r2).summaries));

  // cumulative regret is the nondecreasing prefix sum
  for (const auto& res : r1) {
    double cum = 0.0;
    for (const auto& rec : res.records) {
      cum += rec.regret;
      CHECK(rec.cum_regret == doctest::Approx(cum).epsilon(1e-12));
    }
  }
}

TEST_CASE("paired environments: same seed gives the same truth across agents") {
  ExperimentConfig a = small_gaussian_config();
  ExperimentConfig b = small_gaussian_config();
  b.agent.kind = "eps_greedy";
  b.agent.eps0 = 0.3;
  b.agent.tau = 50;
  const auto ra = run_bandit(a, 1);
  const auto rb = run_bandit(b, 1);
  // equal optimal expected reward implies the same hidden truth draw
  double best_a = -1e300, best_b = -1e300;
  for (const auto& rec : ra.records) best_a = std::max(best_a, rec.reward - 100.0);  // placeholder
  // directly rebuild the envs instead
  RngStream e1 = RngStream(a.base_seed).fork(static_cast<std::uint64_t>(1)).fork("env-setup");
  RngStream e2 = RngStream(b.base_seed).fork(static_cast<std::uint64_t>(1)).fork("env-setup");
  const auto env1 = env_new(a.env, e1);
  const auto env2 = env_new(b.env, e2);
  for (int k = 0; k < env1->n_actions(); ++k)
    CHECK(env1->expected_reward(k) == env2->expected_reward(k));
  CHECK(best_a < 1e300);
  CHECK(rb.summary.computation == 0);  // baselines report zero computation
}

TEST_CASE("greedy one-particle ensemble settles on a noiseless two-arm bandit") {
  ExperimentConfig cfg;
  cfg.env = {"gaussian", 2, 0, 0, 2.25, 0.0};  // noiseless
  cfg.agent.kind = "hypermodel";
  cfg.agent.hypermodel = "ensemble";
  cfg.agent.particles = 1;
  cfg.agent.additive_prior = true;
  cfg.train.step_size = 0.5;
  cfg.train.noise_var = 1.0;
  cfg.train.prior_var = 2.25;
  cfg.train.perturb_scale = 0.0;
  cfg.train.batch_data = 16;
  cfg.train.batch_index = 2;
  cfg.train.sgd_per_period = 50;
  cfg.horizon = 40;
  cfg.base_seed = 2;  // a draw where greedy visits both arms early
  const RunResult r = run_bandit(cfg, 0);
  bool saw0 = false, saw1 = false;
  for (const auto& rec : r.records) {
    if (rec.action == 0) saw0 = true;
    if (rec.action == 1) saw1 = true;
  }
  CHECK(saw0);
  CHECK(saw1);
  for (std::size_t t = 20; t < r.records.size(); ++t) CHECK(r.records[t].regret == 0.0);
}

TEST_CASE("config text parsing: values, strict keys, list handling") {
  const std::string text = R"(
# experiment
[env]
kind = gaussian
arms = 7
noise_var = 0.5

[agent]
kind = hypermodel
hypermodel = diagonal_linear
block_width = 4

[train]
step_size = 0.25
batch_data = 64

[harness]
horizon = 123
runs = 9
seed = 42
)";
  const ExperimentConfig cfg = parse_config_text(text);
  CHECK(cfg.env.kind == "gaussian");
  CHECK(cfg.env.arms == 7);
  CHECK(cfg.env.noise_var == 0.5);
  CHECK(cfg.agent.block_width == 4);
  CHECK(cfg.train.step_size == 0.25);
  CHECK(cfg.train.batch_data == 64);
  CHECK(cfg.horizon == 123);
  CHECK(cfg.n_runs == 9);
  CHECK(cfg.base_seed == 42);

  CHECK_THROWS_AS(parse_config_text("[env]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[nope]\nkind = gaussian\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("kind = gaussian\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[train]\nstep_size = 0.1,0.2\n"), ConfigError);

  const auto points = parse_sweep_text("[train]\nstep_size = 0.1,0.2\nbatch_index = 4,8,16\n");
  CHECK(points.size() == 6);
  CHECK(points[0].label == "train.step_size=0.1;train.batch_index=4");
  CHECK(points[5].config.train.step_size == 0.2);
  CHECK(points[5].config.train.batch_index == 16);

  // render -> parse round trip preserves the configuration
  ExperimentConfig rt = small_gaussian_config();
  const ExperimentConfig back = parse_config_text(render_config(rt));
  CHECK(back.env.arms == rt.env.arms);
  CHECK(back.agent.hypermodel == rt.agent.hypermodel);
  CHECK(back.train.step_size == rt.train.step_size);
  CHECK(back.horizon == rt.horizon);
  CHECK(back.base_seed == rt.base_seed);
}

TEST_CASE("structural check helpers stay green") {
  CHECK(check_bisection().pass);
  CHECK(check_simplex(2000, 8).pass);
  CHECK(check_csv_determinism(10).pass);
}
