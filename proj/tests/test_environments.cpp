#include <doctest.h>

#include <cmath>
#include <set>

#include "hypx/environments.hpp"

using namespace hypx;

TEST_CASE("gaussian env: expected rewards are the truth, one optimal arm") {
  RngStream rng(41);
  GaussianBanditEnv env(6, 2.25, 1.0, rng);
  int zero_regret = 0;
  for (int a = 0; a < 6; ++a) {
    CHECK(env.expected_reward(a) == env.truth()[a]);
    CHECK(env.regret(a) >= 0.0);
    if (env.regret(a) == 0.0) ++zero_regret;
  }
  CHECK(zero_regret == 1);
  CHECK_THROWS_AS(env.expected_reward(6), ContractError);
  CHECK_THROWS_AS(env.step(-1, rng), ContractError);
}

TEST_CASE("nn env: unit-norm actions and generator-evaluated expectations") {
  RngStream rng(42);
  NnBanditEnv env(30, 1.0, rng);
  const BaseParams gen = make_base_params(env.generator_params(), env.generator_arch());
  for (int a = 0; a < 30; ++a) {
    const Tensor x = env.actions().action(a);
    CHECK(std::fabs(norm2(x) - 1.0) < 1e-12);
    CHECK(env.expected_reward(a) == doctest::Approx(eval_mlp(gen, x)).epsilon(1e-13));
  }
}

TEST_CASE("sparse env structure for theta_dim 4 and 8") {
  RngStream rng(43);
  SparseLinearBanditEnv env4(4, 1.0, rng);
  CHECK(env4.n_actions() == 6);  // 4 one-hots + (4-2) halves
  CHECK(bisection_sublists(8).size() == 6);

  // halves are indicators of (0..1) and (2..3) scaled by one half
  const Tensor& m = env4.actions().matrix;
  for (int r = 4; r < 6; ++r) {
    double total = 0.0;
    for (int c = 0; c < 4; ++c) {
      CHECK((m(r, c) == 0.0 || m(r, c) == 0.5));
      total += m(r, c);
    }
    CHECK(total == 1.0);
  }

  // expected rewards: optimum 1 at the spike one-hot; halves in {0, 0.5}
  int optimal = 0;
  for (int a = 0; a < env4.n_actions(); ++a) {
    const double er = env4.expected_reward(a);
    if (a < 4) CHECK((er == 0.0 || er == 1.0));
    else CHECK((er == 0.0 || er == 0.5));
    if (env4.regret(a) == 0.0) ++optimal;
  }
  CHECK(optimal == 1);
  CHECK(env4.optimal_reward() == 1.0);
  CHECK(env4.expected_reward(env4.spike()) == 1.0);

  // non-spike one-hot regret 1, covering half regret 0.5
  for (int a = 0; a < 4; ++a)
    if (a != env4.spike()) CHECK(env4.regret(a) == 1.0);
  for (int a = 4; a < 6; ++a)
    CHECK((env4.regret(a) == 0.5 || env4.regret(a) == 1.0));
}

TEST_CASE("bisection tree: unique non-root nodes, root excluded, odd sizes too") {
  for (int n : {4, 5, 6, 7, 12, 200}) {
    const auto subs = bisection_sublists(n);
    CHECK(static_cast<int>(subs.size()) == n - 2);
    std::set<std::pair<int, int>> seen(subs.begin(), subs.end());
    CHECK(seen.size() == subs.size());
    CHECK(seen.find({0, n}) == seen.end());
    for (const auto& [lo, hi] : subs) CHECK(hi - lo >= 2);
  }
}

TEST_CASE("noiseless steps return expected rewards exactly; CLT at sigma 1") {
  RngStream rng(44);
  SparseLinearBanditEnv env(8, 0.0, rng);
  RngStream noise(1);
  for (int a = 0; a < env.n_actions(); ++a) CHECK(env.step(a, noise) == env.expected_reward(a));

  GaussianBanditEnv genv(3, 2.25, 1.0, rng);
  const int n = 10000;
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += genv.step(1, noise);
  mean /= n;
  CHECK(std::fabs(mean - genv.expected_reward(1)) < 4.0 / 100.0);
}

TEST_CASE("same seed reproduces truth, actions, and noise") {
  auto build = [] {
    RngStream rng(77);
    return NnBanditEnv(10, 1.0, rng);
  };
  NnBanditEnv a = build(), b = build();
  CHECK(a.generator_params() == b.generator_params());
  CHECK(a.actions().matrix == b.actions().matrix);
  RngStream n1(5), n2(5);
  for (int i = 0; i < 20; ++i) CHECK(a.step(i % 10, n1) == b.step(i % 10, n2));
}

TEST_CASE("env_new validates parameters") {
  RngStream rng(45);
  EnvSpec bad;
  bad.kind = "sparse";
  bad.theta_dim = 3;
  CHECK_THROWS_AS(env_new(bad, rng), ConfigError);
  bad.kind = "unknown";
  CHECK_THROWS_AS(env_new(bad, rng), ConfigError);
  EnvSpec good;
  good.kind = "gaussian";
  good.arms = 2;
  CHECK(env_new(good, rng)->n_actions() == 2);
}
