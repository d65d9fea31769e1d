#pragma once

#include <optional>
#include <vector>

#include "hypx/training.hpp"

namespace hypx {

// Finite action set; row k holds action k. Indexing is stable for a run.
struct ActionSet {
  Tensor matrix;  // K x N_x

  int size() const { return matrix.rows(); }
  int action_dim() const { return matrix.cols(); }
  Tensor action(int k) const;
};

ActionSet make_action_set(Tensor matrix);

// Evaluates f_{g_nu(z)} on every action with reusable workspace.
class ActionEvaluator {
 public:
  ActionEvaluator(const ModelBundle* bundle, const ActionSet* actions);
  // K x 1 values of the full model (prior + differential) at index z.
  const Tensor& values(const Tensor& z);

  const ModelBundle& bundle() const { return *bundle_; }
  const ActionSet& actions() const { return *actions_; }

 private:
  const ModelBundle* bundle_;
  const ActionSet* actions_;
  BatchEvaluator diff_eval_;
  std::optional<BatchEvaluator> prior_eval_;
  Tensor theta_, prior_theta_, vals_, prior_vals_;
};

// Thompson sampling: one index draw, greedy on the induced base model.
// Ties break to the lowest action index.
int ts_select(ActionEvaluator& eval, RngStream& rng);
int ts_select(const ModelBundle& bundle, const ActionSet& actions, RngStream& rng);

struct IdsStats {
  std::vector<double> regret;       // r_x
  std::vector<double> variance;     // v_x
  std::vector<int> partition_sizes;  // |Z~_{x*}| per action
};

// sample_matrix is |Z~| x K with entries f_{g_nu(z)}(x); |Z~| >= 2.
IdsStats ids_stats(const Tensor& sample_matrix);

struct ActionDistribution {
  std::vector<double> pi;  // sums to 1, at most two nonzero entries
};

// Minimizes (sum pi r)^2 / (sum pi v) over the simplex by enumerating action
// pairs; candidate interior points are the roots of r(q) = 0 and of
// 2 r'(q) v(q) = r(q) v'(q) clamped to [0,1]. Throws
// DegenerateInformationError when every action has zero variance and positive
// regret.
ActionDistribution ids_optimize(const IdsStats& stats);

int sample_action(const ActionDistribution& dist, RngStream& rng);

// Variance-IDS selection: n_samples index draws, stats, optimize, sample.
// On degenerate information falls back to a TS draw and sets *fell_back.
int ids_select(ActionEvaluator& eval, int n_samples, RngStream& rng, bool* fell_back = nullptr);

// Annealing epsilon-greedy: eps_t = eps0 * tau / (tau + t); unvisited arms
// are treated as +infinity so each gets pulled once.
int eps_greedy_select(const std::vector<double>& means, const std::vector<long long>& counts,
                      long long t, double eps0, double tau, RngStream& rng);

struct GaussianArmPosterior {
  double mean = 0.0;
  double var = 1.0;
};

GaussianArmPosterior gaussian_posterior_update(const GaussianArmPosterior& post, double y,
                                               double noise_var);

}  // namespace hypx
