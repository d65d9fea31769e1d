#pragma once

#include <memory>
#include <string>

#include "hypx/agents.hpp"
#include "hypx/rng.hpp"

namespace hypx {

// Synthetic bandit: hidden truth, reward channel Y = f(X) + W, and the exact
// expected rewards used for regret accounting.
class BanditEnvironment {
 public:
  virtual ~BanditEnvironment() = default;

  const ActionSet& actions() const { return actions_; }
  int n_actions() const { return actions_.size(); }
  double noise_std() const { return noise_std_; }

  double expected_reward(int action) const;
  double optimal_reward() const { return optimal_; }
  double step(int action, RngStream& rng);
  double regret(int action) const;

 protected:
  void finalize();  // fills optimal_ from expected_

  ActionSet actions_;
  std::vector<double> expected_;
  double noise_std_ = 0.0;
  double optimal_ = 0.0;
};

// K independent arms, theta* ~ N(0, prior_var I), one-hot actions.
class GaussianBanditEnv : public BanditEnvironment {
 public:
  GaussianBanditEnv(int n_arms, double prior_var, double noise_var, RngStream& rng);
  const Tensor& truth() const { return theta_star_; }

 private:
  Tensor theta_star_;
};

// Rewards from a random 20-3-3-1 ReLU network; actions on the unit sphere.
class NnBanditEnv : public BanditEnvironment {
 public:
  NnBanditEnv(int n_actions, double noise_var, RngStream& rng);
  const MlpArchitecture& generator_arch() const { return gen_arch_; }
  const Tensor& generator_params() const { return gen_params_; }

 private:
  MlpArchitecture gen_arch_;
  Tensor gen_params_;
};

// One-sparse linear bandit: theta* a uniform one-hot vector; actions are all
// one-hot vectors plus halved indicators of non-singleton bisection sublists.
class SparseLinearBanditEnv : public BanditEnvironment {
 public:
  SparseLinearBanditEnv(int n_theta, double noise_var, RngStream& rng);
  int spike() const { return spike_; }
  int n_theta() const { return n_theta_; }

 private:
  int n_theta_;
  int spike_;
};

// Indicator vectors of all non-singleton sublists reachable by bisecting
// (0..n-1) one or more times; odd splits give the first half the extra
// element. Size is n - 2 for any n >= 2.
std::vector<std::pair<int, int>> bisection_sublists(int n);

struct EnvSpec {
  std::string kind;  // "gaussian" | "nn" | "sparse"
  int arms = 10;         // gaussian
  int n_actions = 100;   // nn
  int theta_dim = 32;    // sparse
  double prior_var = 2.25;
  double noise_var = 1.0;
};

std::unique_ptr<BanditEnvironment> env_new(const EnvSpec& spec, RngStream& rng);

}  // namespace hypx
