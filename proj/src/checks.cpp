#include "hypx/checks.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <sstream>

namespace hypx {

namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// Smallest |preactivation| over every ReLU input reached while evaluating the
// bundle at (z, x); used to resample finite-difference points near kinks.
double min_relu_gap(const ModelBundle& b, const Tensor& z, const Tensor& x) {
  double gap = 1e300;
  auto scan_mlp = [&gap](const MlpArchitecture& arch, const Tensor& theta, const Tensor& in) {
    const auto dims = arch.layer_dims();
    std::vector<double> cur(in.data(), in.data() + in.size());
    std::vector<double> nxt;
    int off = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      const int fi = dims[l], fo = dims[l + 1];
      nxt.assign(fo, 0.0);
      for (int i = 0; i < fi; ++i)
        for (int j = 0; j < fo; ++j) nxt[j] += cur[i] * theta[off + i * fo + j];
      off += fi * fo;
      for (int j = 0; j < fo; ++j) nxt[j] += theta[off + j];
      off += fo;
      if (l + 2 < dims.size()) {
        for (double& v : nxt) {
          if (std::fabs(v) < gap) gap = std::fabs(v);
          if (v < 0.0) v = 0.0;
        }
      }
      cur.swap(nxt);
    }
  };
  if (const auto* hn = std::get_if<HypernetworkHypermodel>(&b.hypermodel))
    scan_mlp(hn->net, hn->params, z);
  if (const auto* mlp = std::get_if<MlpArchitecture>(&b.base))
    scan_mlp(*mlp, map_index(b.hypermodel, z), x);
  return gap;
}

}  // namespace

CheckResult check_gradients(int n_instances, std::uint64_t seed) {
  RngStream root(seed);
  double worst = 0.0;
  int worst_instance = -1;
  for (int inst = 0; inst < n_instances; ++inst) {
    RngStream rng = root.fork(inst);
    for (int attempt = 0;; ++attempt) {
      const int combo = inst % 7;
      const bool mlp_base = combo == 1 || combo == 3 || combo == 5;
      BaseArchitecture base;
      if (mlp_base)
        base = MlpArchitecture{2 + rng.uniform_int(2), {2 + rng.uniform_int(2), 2}, 1};
      else
        base = LinearArchitecture{2 + rng.uniform_int(3)};
      const int n_theta = param_count(base);

      Hypermodel hm;
      ReferenceDistribution dist;
      if (combo < 2) {
        const int p = 2 + rng.uniform_int(3);
        dist = {ReferenceDistribution::Kind::OneHotUniform, p};
        hm = make_ensemble(n_theta, p, InitScheme::Gaussian, 0.6, rng);
      } else if (combo < 4) {
        const int nz = 2 + rng.uniform_int(3);
        dist = {ReferenceDistribution::Kind::GaussianUnit, nz};
        hm = make_linear_hypermodel(n_theta, nz, InitScheme::Gaussian, 0.6, rng);
      } else if (combo < 6) {
        const int nz = 2 + rng.uniform_int(2);
        dist = {ReferenceDistribution::Kind::GaussianUnit, nz};
        hm = make_hypernetwork(MlpArchitecture{nz, {3}, n_theta}, InitScheme::Gaussian, 0.6, rng);
      } else {
        dist = {ReferenceDistribution::Kind::GaussianUnit, n_theta};
        hm = make_sparse_softmax(n_theta);
        auto& sm = std::get<SparseSoftmaxHypermodel>(hm);
        for (std::size_t i = 0; i < sm.nu.size(); ++i) sm.nu[i] = 1.0 + 0.3 * rng.normal();
        sm.beta = 2.0;  // keep the loss surface well-scaled for differencing
      }

      std::optional<AdditivePriorSpec> prior;
      if (combo != 6 && rng.uniform() < 0.5) {
        Tensor d(n_theta, 1);
        for (int i = 0; i < n_theta; ++i) d[i] = 0.5 + rng.uniform();
        prior = make_additive_prior(std::move(d), make_gaussian_mixer(n_theta, dist.dim, rng),
                                    base);
      }
      ModelBundle bundle = make_bundle(std::move(hm), base, std::move(prior), dist);

      TrainConfig cfg;
      cfg.noise_var = 0.5 + rng.uniform();
      cfg.prior_var = 0.5 + rng.uniform();
      cfg.perturb_scale = rng.uniform() < 0.5 ? 0.0 : 0.7;
      cfg.batch_data = 2 + rng.uniform_int(3);
      cfg.batch_index = 2 + rng.uniform_int(2);

      const int xd = input_dim(base);
      AugmentedDataset data(xd, dist.dim);
      for (int i = 0; i < cfg.batch_data; ++i)
        data.append(sample_gaussian(rng, xd), rng.normal(),
                    make_perturbation(dist, rng));
      std::vector<int> batch(cfg.batch_data);
      for (int i = 0; i < cfg.batch_data; ++i) batch[i] = i;
      std::vector<Tensor> indices;
      for (int j = 0; j < cfg.batch_index; ++j) indices.push_back(dist.sample(rng));
      const int total_n = data.size() + 2;

      double gap = 1e300;
      for (const Tensor& z : indices)
        for (int i = 0; i < data.size(); ++i) gap = std::min(gap, min_relu_gap(bundle, z, data.point(i).x));
      if (gap < 1e-6 && attempt < 20) continue;  // kink-adjacent, resample

      TrainingSession session(&bundle, cfg);
      const std::vector<double> grad = session.loss_gradient(data, batch, indices, total_n);
      std::vector<double> params = session.param_vector();

      std::vector<AugmentedDataPoint> mb;
      for (int i : batch) mb.push_back(data.point(i));

      double ginf = 0.0;
      for (double g : grad) ginf = std::max(ginf, std::fabs(g));
      const double h = 1e-5;
      double inst_worst = 0.0;
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double p0 = params[i];
        params[i] = p0 + h;
        session.set_param_vector(params);
        const double lp = approx_loss(bundle, mb, indices, cfg, total_n);
        params[i] = p0 - h;
        session.set_param_vector(params);
        const double lm = approx_loss(bundle, mb, indices, cfg, total_n);
        params[i] = p0;
        const double fd = (lp - lm) / (2.0 * h);
        const double den = std::max({std::fabs(grad[i]), std::fabs(fd), 1e-4 * ginf, 1e-8});
        inst_worst = std::max(inst_worst, std::fabs(grad[i] - fd) / den);
      }
      session.set_param_vector(params);
      if (inst_worst > worst) {
        worst = inst_worst;
        worst_instance = inst;
      }
      break;
    }
  }
  CheckResult res;
  res.name = "gradients";
  res.pass = worst <= 1e-5;
  res.detail = fmt("max relative error %.3g (tolerance 1e-5), %d instances, worst at %d", worst,
                   n_instances, worst_instance);
  return res;
}

CheckResult check_posterior(std::uint64_t seed) {
  const int k = 5, n_per_arm = 20, m = 3;
  const double sp2 = 2.25, sw2 = 1.0;
  RngStream root(seed);
  RngStream truth_rng = root.fork("truth");
  RngStream obs_rng = root.fork("obs");
  RngStream pert_rng = root.fork("perturb");
  RngStream init_rng = root.fork("init");
  RngStream prior_rng = root.fork("prior");
  RngStream train_rng = root.fork("train");
  RngStream eval_rng = root.fork("eval");

  Tensor theta_star(k, 1);
  for (int i = 0; i < k; ++i) theta_star[i] = std::sqrt(sp2) * truth_rng.normal();

  const ReferenceDistribution dist{ReferenceDistribution::Kind::GaussianUnit, k * m};
  std::vector<std::pair<int, int>> blocks(k, {1, m});
  Tensor d(k, 1);
  d.fill(std::sqrt(sp2));
  auto prior = make_additive_prior(d, make_block_diagonal_mixer(blocks, prior_rng),
                                   LinearArchitecture{k});
  Hypermodel hm = make_linear_hypermodel(k, k * m, InitScheme::Gaussian, 0.05, init_rng,
                                         make_block_diagonal_mask(blocks));
  ModelBundle bundle = make_bundle(std::move(hm), LinearArchitecture{k}, std::move(prior), dist, m);

  AugmentedDataset data(k, k * m);
  std::vector<double> y_sum(k, 0.0);
  Tensor a_sum(k * m, 1);
  for (int arm = 0; arm < k; ++arm) {
    Tensor x(k, 1);
    x[arm] = 1.0;
    for (int i = 0; i < n_per_arm; ++i) {
      const double y = theta_star[arm] + std::sqrt(sw2) * obs_rng.normal();
      y_sum[arm] += y;
      const Tensor a = make_perturbation(dist, pert_rng, arm * m, m);
      for (int j = 0; j < m; ++j) a_sum[arm * m + j] += a[arm * m + j];
      data.append(x, y, a);
    }
  }
  // Closed-form fixed point of the perturbed loss, for the report.
  const auto& lin0 = std::get<LinearHypermodel>(bundle.hypermodel);
  Tensor fixed_std(k, 1);
  {
    const double s2_fp = 1.0 / (n_per_arm / sw2 + 1.0 / sp2);
    for (int arm = 0; arm < k; ++arm) {
      double nrm2 = 0.0;
      for (int j = 0; j < m; ++j) {
        const double w = s2_fp * (a_sum[arm * m + j] / sw2 + lin0.mixer(arm, arm * m + j) / sp2) +
                         std::sqrt(sp2) * bundle.prior->prior_mixer(arm, arm * m + j) * (s2_fp / sp2);
        nrm2 += w * w;
      }
      fixed_std[arm] = std::sqrt(nrm2);
    }
  }

  TrainConfig cfg;
  cfg.step_size = 0.1;
  cfg.noise_var = sw2;
  cfg.prior_var = sp2;
  cfg.perturb_scale = std::sqrt(sw2);
  cfg.batch_data = data.size();
  cfg.batch_index = 16;
  cfg.sgd_per_period = 1;
  TrainingSession session(&bundle, cfg);
  for (int step = 0; step < 50000; ++step) session.sgd_step(data, train_rng);

  const double s2 = 1.0 / (n_per_arm / sw2 + 1.0 / sp2);
  const int n_draws = 10000;
  std::vector<double> mean(k, 0.0), sq(k, 0.0);
  Tensor diff_theta, prior_theta;
  for (int i = 0; i < n_draws; ++i) {
    const Tensor z = dist.sample(eval_rng);
    map_index_into(bundle.hypermodel, z, diff_theta);
    matmul_into(bundle.prior->prior_mixer, z, prior_theta);
    for (int arm = 0; arm < k; ++arm) {
      const double v = diff_theta[arm] + bundle.prior->prior_scale[arm] * prior_theta[arm];
      mean[arm] += v;
      sq[arm] += v * v;
    }
  }
  CheckResult res;
  res.name = "posterior";
  res.pass = true;
  std::ostringstream os;
  for (int arm = 0; arm < k; ++arm) {
    mean[arm] /= n_draws;
    const double var = sq[arm] / n_draws - mean[arm] * mean[arm];
    const double emp_std = std::sqrt(std::max(0.0, var));
    const double post_mean = s2 * y_sum[arm] / sw2;
    const double post_std = std::sqrt(s2);
    const bool mean_ok = std::fabs(mean[arm] - post_mean) < 0.05;
    const bool std_ok = std::fabs(emp_std - post_std) < 0.10 * post_std;
    res.pass = res.pass && mean_ok && std_ok;
    os << fmt("arm %d: mean %.4f vs %.4f (%s), std %.4f vs %.4f (%s; loss fixed point %.4f)\n",
              arm, mean[arm], post_mean, mean_ok ? "ok" : "FAIL", emp_std, post_std,
              std_ok ? "ok" : "FAIL", fixed_std[arm]);
  }
  res.detail = os.str();
  return res;
}

namespace {

double grid_objective(double r, double v) {
  if (v > 1e-12) return r * r / v;
  if (r == 0.0) return 0.0;
  return 1e300;
}

double pair_grid_min(const IdsStats& st, int steps) {
  const int k = static_cast<int>(st.regret.size());
  double best = 1e300;
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      for (int s = 0; s <= steps; ++s) {
        const double q = static_cast<double>(s) / steps;
        const double r = q * st.regret[a] + (1 - q) * st.regret[b];
        const double v = q * st.variance[a] + (1 - q) * st.variance[b];
        best = std::min(best, grid_objective(r, v));
      }
    }
  }
  return best;
}

double simplex3_grid_min(const IdsStats& st, int steps) {
  double best = 1e300;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps - i; ++j) {
      const int l = steps - i - j;
      const double p0 = static_cast<double>(i) / steps;
      const double p1 = static_cast<double>(j) / steps;
      const double p2 = static_cast<double>(l) / steps;
      const double r = p0 * st.regret[0] + p1 * st.regret[1] + p2 * st.regret[2];
      const double v = p0 * st.variance[0] + p1 * st.variance[1] + p2 * st.variance[2];
      best = std::min(best, grid_objective(r, v));
    }
  }
  return best;
}

}  // namespace

CheckResult check_ids(int n_instances, std::uint64_t seed) {
  RngStream root(seed);
  CheckResult res;
  res.name = "ids";
  res.pass = true;
  double worst_gap = -1e300;
  for (int inst = 0; inst < n_instances; ++inst) {
    RngStream rng = root.fork(inst);
    const int k = 2 + rng.uniform_int(7);  // K in [2, 8]
    IdsStats st;
    st.regret.resize(k);
    st.variance.resize(k);
    st.partition_sizes.assign(k, 1);
    for (int i = 0; i < k; ++i) {
      st.regret[i] = 2.0 * rng.uniform();
      st.variance[i] = 2.0 * rng.uniform();
    }
    if (rng.uniform() < 0.25) st.variance[rng.uniform_int(k)] = 0.0;
    if (rng.uniform() < 0.25) st.regret[rng.uniform_int(k)] = 0.0;

    ActionDistribution pi;
    try {
      pi = ids_optimize(st);
    } catch (const DegenerateInformationError&) {
      bool degenerate = true;
      for (int i = 0; i < k; ++i)
        if (st.variance[i] > 1e-12 || st.regret[i] == 0.0) degenerate = false;
      if (!degenerate) {
        res.pass = false;
        res.detail = fmt("instance %d: spurious degenerate-information error", inst);
        return res;
      }
      continue;
    }

    int nonzero = 0;
    double total = 0.0, opt_r = 0.0, opt_v = 0.0;
    for (int i = 0; i < k; ++i) {
      if (pi.pi[i] < 0.0) res.pass = false;
      if (pi.pi[i] > 0.0) ++nonzero;
      total += pi.pi[i];
      opt_r += pi.pi[i] * st.regret[i];
      opt_v += pi.pi[i] * st.variance[i];
    }
    if (nonzero > 2 || std::fabs(total - 1.0) > 1e-12) {
      res.pass = false;
      res.detail = fmt("instance %d: support %d, mass %.17g", inst, nonzero, total);
      return res;
    }
    const double opt_val = grid_objective(opt_r, opt_v);

    double oracle = pair_grid_min(st, 1000);
    if (k == 3) oracle = std::min(oracle, simplex3_grid_min(st, 1000));
    for (int s = 0; s < 2000; ++s) {  // random full-support points
      double pr = 0.0, pv = 0.0, norm = 0.0;
      for (int i = 0; i < k; ++i) {
        const double e = -std::log(1.0 - rng.uniform());
        pr += e * st.regret[i];
        pv += e * st.variance[i];
        norm += e;
      }
      oracle = std::min(oracle, grid_objective(pr / norm, pv / norm));
    }
    worst_gap = std::max(worst_gap, opt_val - oracle);
    if (opt_val > oracle + 1e-9) {
      res.pass = false;
      res.detail = fmt("instance %d (K=%d): optimizer %.12g > oracle %.12g", inst, k, opt_val,
                       oracle);
      return res;
    }
  }
  res.detail = fmt("%d instances, worst optimizer-minus-oracle gap %.3g (tolerance 1e-9)",
                   n_instances, worst_gap);
  return res;
}

CheckResult check_bisection() {
  CheckResult res;
  res.name = "bisection";
  res.pass = true;
  std::ostringstream os;
  for (int n : {4, 8, 16, 32, 64}) {
    const auto subs = bisection_sublists(n);
    bool unique = true;
    for (std::size_t i = 0; i < subs.size() && unique; ++i)
      for (std::size_t j = i + 1; j < subs.size(); ++j)
        if (subs[i] == subs[j]) {
          unique = false;
          break;
        }
    bool no_root = true, no_singleton = true;
    for (const auto& [lo, hi] : subs) {
      if (lo == 0 && hi == n) no_root = false;
      if (hi - lo < 2) no_singleton = false;
    }
    const bool ok = static_cast<int>(subs.size()) == n - 2 && unique && no_root && no_singleton;
    res.pass = res.pass && ok;
    os << fmt("n=%d: |I|=%zu (want %d) %s\n", n, subs.size(), n - 2, ok ? "ok" : "FAIL");
  }
  res.detail = os.str();
  return res;
}

CheckResult check_simplex(int n_samples, std::uint64_t seed) {
  RngStream rng(seed);
  CheckResult res;
  res.name = "simplex";
  res.pass = true;
  double worst = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const int n = 2 + rng.uniform_int(63);
    SparseSoftmaxHypermodel hm = make_sparse_softmax(n);
    for (int j = 0; j < n; ++j) hm.nu[j] = 1.0 + rng.normal();
    const Tensor z = sample_gaussian(rng, n);
    const Tensor th = map_index(Hypermodel{hm}, z);
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
      if (th[j] < 0.0) res.pass = false;
      total += th[j];
    }
    worst = std::max(worst, std::fabs(total - 1.0));
  }
  res.pass = res.pass && worst <= 1e-12;
  res.detail = fmt("%d samples, max |sum-1| = %.3g (tolerance 1e-12)", n_samples, worst);
  return res;
}

CheckResult check_block_mask(int n_steps, std::uint64_t seed) {
  RngStream root(seed);
  RngStream init_rng = root.fork("init");
  RngStream prior_rng = root.fork("prior");
  RngStream data_rng = root.fork("data");
  RngStream train_rng = root.fork("train");
  const int k = 4, m = 3;
  std::vector<std::pair<int, int>> blocks(k, {1, m});
  const ReferenceDistribution dist{ReferenceDistribution::Kind::GaussianUnit, k * m};
  Tensor d(k, 1);
  d.fill(1.5);
  auto prior =
      make_additive_prior(d, make_block_diagonal_mixer(blocks, prior_rng), LinearArchitecture{k});
  Hypermodel hm = make_linear_hypermodel(k, k * m, InitScheme::Gaussian, 0.05, init_rng,
                                         make_block_diagonal_mask(blocks));
  ModelBundle bundle = make_bundle(std::move(hm), LinearArchitecture{k}, std::move(prior), dist, m);

  AugmentedDataset data(k, k * m);
  for (int i = 0; i < 40; ++i) {
    const int arm = data_rng.uniform_int(k);
    Tensor x(k, 1);
    x[arm] = 1.0;
    data.append(x, data_rng.normal(), make_perturbation(dist, data_rng, arm * m, m));
  }
  TrainConfig cfg;
  cfg.step_size = 0.2;
  cfg.noise_var = 1.0;
  cfg.prior_var = 2.25;
  cfg.perturb_scale = 1.0;
  cfg.batch_data = 16;
  cfg.batch_index = 8;
  TrainingSession session(&bundle, cfg);
  for (int s = 0; s < n_steps; ++s) session.sgd_step(data, train_rng);

  const auto& lin = std::get<LinearHypermodel>(bundle.hypermodel);
  int violations = 0;
  for (std::size_t i = 0; i < lin.mixer.size(); ++i)
    if ((*lin.block_mask)[i] == 0.0 && lin.mixer[i] != 0.0) ++violations;
  CheckResult res;
  res.name = "block_mask";
  res.pass = violations == 0;
  res.detail = fmt("%d masked entries nonzero after %d steps", violations, n_steps);
  return res;
}

CheckResult check_csv_determinism(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.env = {"gaussian", 4, 0, 0, 2.25, 1.0};
  cfg.agent.kind = "hypermodel";
  cfg.agent.hypermodel = "diagonal_linear";
  cfg.agent.block_width = 2;
  cfg.agent.exploration = "ts";
  cfg.train.step_size = 0.2;
  cfg.train.noise_var = 1.0;
  cfg.train.prior_var = 2.25;
  cfg.train.perturb_scale = 1.0;
  cfg.train.batch_data = 16;
  cfg.train.batch_index = 4;
  cfg.train.sgd_per_period = 1;
  cfg.horizon = 60;
  cfg.n_runs = 2;
  cfg.base_seed = seed;

  const auto r1 = run_experiment(cfg, 1);
  const auto r2 = run_experiment(cfg, 2);  // parallel must match sequential
  const std::string s1 = step_csv_string(r1) + summary_csv_string(aggregate(r1).summaries);
  const std::string s2 = step_csv_string(r2) + summary_csv_string(aggregate(r2).summaries);
  CheckResult res;
  res.name = "csv_determinism";
  res.pass = s1 == s2;
  res.detail = res.pass ? "byte-identical CSV across repeated executions"
                        : "CSV bytes differ between executions";
  return res;
}

CheckResult run_check_suite(const std::string& suite) {
  if (suite == "gradients") return check_gradients();
  if (suite == "posterior") return check_posterior();
  if (suite == "ids") return check_ids();
  if (suite == "bisection") return check_bisection();
  throw ConfigError("unknown check suite '" + suite + "'");
}

}  // namespace hypx
