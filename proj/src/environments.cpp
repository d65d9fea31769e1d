#include "hypx/environments.hpp"

#include <cmath>

namespace hypx {

double BanditEnvironment::expected_reward(int action) const {
  if (action < 0 || action >= n_actions())
    throw ContractError("environment: action index out of range");
  return expected_[action];
}

double BanditEnvironment::step(int action, RngStream& rng) {
  const double mean = expected_reward(action);
  return noise_std_ == 0.0 ? mean : mean + noise_std_ * rng.normal();
}

double BanditEnvironment::regret(int action) const {
  return optimal_ - expected_reward(action);
}

void BanditEnvironment::finalize() {
  optimal_ = expected_[0];
  for (double v : expected_)
    if (v > optimal_) optimal_ = v;
}

GaussianBanditEnv::GaussianBanditEnv(int n_arms, double prior_var, double noise_var,
                                     RngStream& rng) {
  if (n_arms < 1) throw ConfigError("gaussian env: need at least 1 arm");
  if (prior_var <= 0.0 || noise_var < 0.0) throw ConfigError("gaussian env: bad variances");
  noise_std_ = std::sqrt(noise_var);
  theta_star_ = Tensor(n_arms, 1);
  const double sp = std::sqrt(prior_var);
  for (int i = 0; i < n_arms; ++i) theta_star_[i] = sp * rng.normal();
  Tensor acts(n_arms, n_arms);
  for (int i = 0; i < n_arms; ++i) acts(i, i) = 1.0;
  actions_ = make_action_set(std::move(acts));
  expected_.assign(theta_star_.data(), theta_star_.data() + n_arms);
  finalize();
}

NnBanditEnv::NnBanditEnv(int n_actions, double noise_var, RngStream& rng) {
  if (n_actions < 1) throw ConfigError("nn env: need at least 1 action");
  if (noise_var < 0.0) throw ConfigError("nn env: bad noise variance");
  noise_std_ = std::sqrt(noise_var);
  gen_arch_ = MlpArchitecture{20, {3, 3}, 1};
  gen_params_ = Tensor(gen_arch_.param_count(), 1);
  const std::vector<double> weight_stds = {std::sqrt(2.25), std::sqrt(2.25 / 3.0),
                                           std::sqrt(2.25 / 3.0)};
  std::size_t layer = 0;
  for (const auto& b : gen_arch_.blocks()) {
    const double std_dev = b.bias ? 1.0 : weight_stds[layer];
    for (int i = 0; i < b.size(); ++i) gen_params_[b.offset + i] = std_dev * rng.normal();
    if (b.bias) ++layer;
  }
  Tensor acts(n_actions, 20);
  for (int i = 0; i < n_actions; ++i) {
    const Tensor row = sample_hypersphere(rng, 20);
    for (int j = 0; j < 20; ++j) acts(i, j) = row[j];
  }
  actions_ = make_action_set(std::move(acts));
  const BaseParams gen = make_base_params(gen_params_, gen_arch_);
  expected_.resize(n_actions);
  for (int i = 0; i < n_actions; ++i) expected_[i] = eval_mlp(gen, actions_.action(i));
  finalize();
}

std::vector<std::pair<int, int>> bisection_sublists(int n) {
  std::vector<std::pair<int, int>> out;
  // Preorder over the bisection tree; the root (whole list) is excluded.
  struct Rec {
    std::vector<std::pair<int, int>>& out;
    int n;
    void visit(int lo, int hi) {
      if (hi - lo < 2) return;
      if (!(lo == 0 && hi == n)) out.emplace_back(lo, hi);
      const int mid = lo + (hi - lo + 1) / 2;
      visit(lo, mid);
      visit(mid, hi);
    }
  } rec{out, n};
  rec.visit(0, n);
  return out;
}

SparseLinearBanditEnv::SparseLinearBanditEnv(int n_theta, double noise_var, RngStream& rng)
    : n_theta_(n_theta) {
  if (n_theta < 4) throw ConfigError("sparse env: theta_dim must be >= 4");
  if (noise_var < 0.0) throw ConfigError("sparse env: bad noise variance");
  noise_std_ = std::sqrt(noise_var);
  spike_ = rng.uniform_int(n_theta);
  const auto halves = bisection_sublists(n_theta);
  Tensor acts(n_theta + static_cast<int>(halves.size()), n_theta);
  for (int i = 0; i < n_theta; ++i) acts(i, i) = 1.0;
  for (std::size_t h = 0; h < halves.size(); ++h) {
    const int row = n_theta + static_cast<int>(h);
    for (int j = halves[h].first; j < halves[h].second; ++j) acts(row, j) = 0.5;
  }
  actions_ = make_action_set(std::move(acts));
  expected_.resize(actions_.size());
  for (int i = 0; i < actions_.size(); ++i) expected_[i] = actions_.matrix(i, spike_);
  finalize();
}

std::unique_ptr<BanditEnvironment> env_new(const EnvSpec& spec, RngStream& rng) {
  if (spec.kind == "gaussian")
    return std::make_unique<GaussianBanditEnv>(spec.arms, spec.prior_var, spec.noise_var, rng);
  if (spec.kind == "nn") return std::make_unique<NnBanditEnv>(spec.n_actions, spec.noise_var, rng);
  if (spec.kind == "sparse")
    return std::make_unique<SparseLinearBanditEnv>(spec.theta_dim, spec.noise_var, rng);
  throw ConfigError("unknown environment kind '" + spec.kind + "'");
}

}  // namespace hypx
