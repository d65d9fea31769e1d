#include "hypx/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <tuple>

namespace hypx {

Tensor ActionSet::action(int k) const {
  if (k < 0 || k >= size()) throw ContractError("ActionSet: index out of range");
  Tensor x(action_dim(), 1);
  for (int j = 0; j < action_dim(); ++j) x[j] = matrix(k, j);
  return x;
}

ActionSet make_action_set(Tensor matrix) {
  if (matrix.rows() < 1) throw DimensionError("action set must be nonempty");
  return {std::move(matrix)};
}

ActionEvaluator::ActionEvaluator(const ModelBundle* bundle, const ActionSet* actions)
    : bundle_(bundle), actions_(actions), diff_eval_(bundle->base) {
  if (input_dim(bundle->base) != actions->action_dim())
    throw DimensionError("ActionEvaluator: action dim mismatch");
  if (bundle->prior) prior_eval_.emplace(bundle->prior->prior_arch);
}

const Tensor& ActionEvaluator::values(const Tensor& z) {
  map_index_into(bundle_->hypermodel, z, theta_);
  diff_eval_.eval(theta_.data(), actions_->matrix, vals_);
  if (prior_eval_) {
    const auto& spec = *bundle_->prior;
    matmul_into(spec.prior_mixer, z, prior_theta_);
    for (std::size_t i = 0; i < prior_theta_.size(); ++i)
      prior_theta_[i] *= spec.prior_scale[i];
    prior_eval_->eval(prior_theta_.data(), actions_->matrix, prior_vals_);
    for (std::size_t i = 0; i < vals_.size(); ++i) vals_[i] += prior_vals_[i];
  }
  return vals_;
}

namespace {

int argmax_lowest(const Tensor& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace

int ts_select(ActionEvaluator& eval, RngStream& rng) {
  const Tensor z = eval.bundle().index_dist.sample(rng);
  return argmax_lowest(eval.values(z));
}

int ts_select(const ModelBundle& bundle, const ActionSet& actions, RngStream& rng) {
  ActionEvaluator eval(&bundle, &actions);
  return ts_select(eval, rng);
}

IdsStats ids_stats(const Tensor& f) {
  const int m = f.rows(), k = f.cols();
  if (m < 2) throw ContractError("ids_stats: need at least 2 samples");
  IdsStats st;
  st.regret.assign(k, 0.0);
  st.variance.assign(k, 0.0);
  st.partition_sizes.assign(k, 0);

  std::vector<int> argmax(m);
  std::vector<double> colmean(k, 0.0);
  for (int i = 0; i < m; ++i) {
    const double* row = f.data() + static_cast<std::size_t>(i) * k;
    int am = 0;
    for (int j = 1; j < k; ++j)
      if (row[j] > row[am]) am = j;
    argmax[i] = am;
    st.partition_sizes[am] += 1;
    const double mx = row[am];
    for (int j = 0; j < k; ++j) {
      st.regret[j] += mx - row[j];
      colmean[j] += row[j];
    }
  }
  for (int j = 0; j < k; ++j) {
    st.regret[j] /= m;
    colmean[j] /= m;
  }

  // Per-partition column means, accumulated in one pass.
  std::vector<double> part_sum(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < m; ++i) {
    const double* row = f.data() + static_cast<std::size_t>(i) * k;
    double* ps = part_sum.data() + static_cast<std::size_t>(argmax[i]) * k;
    for (int j = 0; j < k; ++j) ps[j] += row[j];
  }
  for (int xs = 0; xs < k; ++xs) {
    const int cnt = st.partition_sizes[xs];
    if (cnt == 0) continue;
    const double w = static_cast<double>(cnt) / m;
    const double* ps = part_sum.data() + static_cast<std::size_t>(xs) * k;
    for (int j = 0; j < k; ++j) {
      const double d = ps[j] / cnt - colmean[j];
      st.variance[j] += w * d * d;
    }
  }
  return st;
}

ActionDistribution ids_optimize(const IdsStats& stats) {
  const int k = static_cast<int>(stats.regret.size());
  if (k < 1) throw ContractError("ids_optimize: empty stats");
  constexpr double kVarFloor = 1e-12;

  double best_val = std::numeric_limits<double>::infinity();
  std::tuple<int, int, double> best_support{-1, -1, 0.0};

  auto consider = [&](double val, int a, int b, double q) {
    const std::tuple<int, int, double> support{a, b, q};
    if (val < best_val ||
        (val == best_val && std::get<0>(best_support) >= 0 && support < best_support)) {
      best_val = val;
      best_support = support;
    }
  };

  for (int a = 0; a < k; ++a) {
    if (stats.variance[a] > kVarFloor) {
      consider(stats.regret[a] * stats.regret[a] / stats.variance[a], a, a, 1.0);
    } else if (stats.regret[a] == 0.0) {
      consider(0.0, a, a, 1.0);
    }
  }
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      const double ra = stats.regret[a], rb = stats.regret[b];
      const double va = stats.variance[a], vb = stats.variance[b];
      double cand[2];
      int nc = 0;
      if (ra != rb) cand[nc++] = rb / (rb - ra);           // root of r(q) = 0
      const double den = (ra - rb) * (va - vb);            // stationary point
      if (den != 0.0) cand[nc++] = (rb * (va - vb) - 2.0 * (ra - rb) * vb) / den;
      for (int c = 0; c < nc; ++c) {
        double q = cand[c];
        q = std::clamp(q, 0.0, 1.0);
        const double v = q * va + (1.0 - q) * vb;
        if (v <= kVarFloor) continue;
        const double r = q * ra + (1.0 - q) * rb;
        consider(r * r / v, a, b, q);
      }
    }
  }

  if (std::get<0>(best_support) < 0)
    throw DegenerateInformationError("ids_optimize: zero variance and positive regret everywhere");

  ActionDistribution dist;
  dist.pi.assign(k, 0.0);
  const auto [a, b, q] = best_support;
  dist.pi[a] += q;
  dist.pi[b] += 1.0 - q;
  return dist;
}

int sample_action(const ActionDistribution& dist, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  const int k = static_cast<int>(dist.pi.size());
  for (int i = 0; i < k; ++i) {
    acc += dist.pi[i];
    if (u < acc) return i;
  }
  for (int i = k - 1; i >= 0; --i)
    if (dist.pi[i] > 0.0) return i;
  throw ContractError("sample_action: empty distribution");
}

int ids_select(ActionEvaluator& eval, int n_samples, RngStream& rng, bool* fell_back) {
  if (n_samples < 2) throw ContractError("ids_select: need at least 2 samples");
  if (fell_back) *fell_back = false;
  const int k = eval.actions().size();
  Tensor f(n_samples, k);
  for (int i = 0; i < n_samples; ++i) {
    const Tensor z = eval.bundle().index_dist.sample(rng);
    const Tensor& v = eval.values(z);
    std::memcpy(f.data() + static_cast<std::size_t>(i) * k, v.data(),
                static_cast<std::size_t>(k) * sizeof(double));
  }
  try {
    const ActionDistribution pi = ids_optimize(ids_stats(f));
    return sample_action(pi, rng);
  } catch (const DegenerateInformationError&) {
    if (fell_back) *fell_back = true;
    return ts_select(eval, rng);
  }
}

int eps_greedy_select(const std::vector<double>& means, const std::vector<long long>& counts,
                      long long t, double eps0, double tau, RngStream& rng) {
  const int k = static_cast<int>(means.size());
  if (k < 1 || counts.size() != means.size())
    throw ContractError("eps_greedy_select: bad inputs");
  const double eps = eps0 * tau / (tau + static_cast<double>(t));
  if (eps > 0.0 && rng.uniform() < eps) return rng.uniform_int(k);
  int best = -1;
  for (int i = 0; i < k; ++i) {
    if (counts[i] == 0) return i;  // +infinity value, lowest index first
    if (best < 0 || means[i] > means[best]) best = i;
  }
  return best;
}

GaussianArmPosterior gaussian_posterior_update(const GaussianArmPosterior& post, double y,
                                               double noise_var) {
  if (noise_var <= 0.0) throw ContractError("gaussian_posterior_update: noise_var must be > 0");
  GaussianArmPosterior out;
  out.var = 1.0 / (1.0 / post.var + 1.0 / noise_var);
  out.mean = out.var * (post.mean / post.var + y / noise_var);
  return out;
}

}  // namespace hypx
