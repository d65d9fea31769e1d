#include "hypx/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace hypx {

namespace {

InitScheme parse_init_scheme(const std::string& name) {
  if (name == "gaussian") return InitScheme::Gaussian;
  if (name == "truncated_gaussian") return InitScheme::TruncatedGaussian;
  if (name == "glorot") return InitScheme::GlorotUniform;
  if (name == "zeros") return InitScheme::Zeros;
  throw ConfigError("unknown init scheme '" + name + "'");
}

class HypermodelAgent : public Agent {
 public:
  HypermodelAgent(const BanditEnvironment& env, const AgentSpec& spec, const TrainConfig& train,
                  RngStream& init_rng)
      : bundle_(build_bundle(env, spec, train, init_rng)),
        actions_(&env.actions()),
        eval_(&bundle_, actions_),
        session_(&bundle_, train),
        data_(actions_->action_dim(), index_dim(bundle_.hypermodel)),
        exploration_(spec.exploration),
        ids_m_(spec.ids_samples),
        ppi_(n_params_per_index(spec, param_count(bundle_.base), env.n_actions())) {
    if (exploration_ != "ts" && exploration_ != "ids")
      throw ConfigError("unknown exploration scheme '" + exploration_ + "'");
  }

  int select(long long, RngStream& rng) override {
    if (exploration_ == "ts") return ts_select(eval_, rng);
    bool fell_back = false;
    const int a = ids_select(eval_, ids_m_, rng, &fell_back);
    if (fell_back) ++fallbacks_;
    return a;
  }

  void observe(int action, double y, RngStream& perturb_rng, RngStream& train_rng) override {
    const int m = bundle_.per_arm_block_width;
    const Tensor a =
        make_perturbation(bundle_.index_dist, perturb_rng, m > 0 ? action * m : -1, m);
    data_.append(actions_->action(action), y, a);
    session_.train_period(data_, train_rng);
  }

  long long params_per_index() const override { return ppi_; }
  long long ids_fallbacks() const override { return fallbacks_; }

 private:
  static ModelBundle build_bundle(const BanditEnvironment& env, const AgentSpec& spec,
                                  const TrainConfig& train, RngStream& init_rng);

  ModelBundle bundle_;
  const ActionSet* actions_;
  ActionEvaluator eval_;
  TrainingSession session_;
  AugmentedDataset data_;
  std::string exploration_;
  int ids_m_;
  long long fallbacks_ = 0;
  long long ppi_;
};

ModelBundle HypermodelAgent::build_bundle(const BanditEnvironment& env, const AgentSpec& spec,
                                          const TrainConfig& train, RngStream& init_rng) {
  RngStream hm_rng = init_rng.fork("hypermodel");
  RngStream prior_rng = init_rng.fork("prior");

  BaseArchitecture base;
  BaseArchitecture prior_arch;
  std::vector<double> prior_weight_stds;
  double prior_bias_std = 1.0;
  const bool is_nn_env = dynamic_cast<const NnBanditEnv*>(&env) != nullptr;
  const bool is_gaussian_env = dynamic_cast<const GaussianBanditEnv*>(&env) != nullptr;
  const int k = env.n_actions();
  if (is_nn_env) {
    base = MlpArchitecture{20, {10, 10}, 1};
    prior_arch = MlpArchitecture{20, {3, 3}, 1};
    prior_weight_stds = {std::sqrt(2.25), std::sqrt(2.25 / 3.0), std::sqrt(2.25 / 3.0)};
  } else {
    const int dim = env.actions().action_dim();
    base = LinearArchitecture{dim};
    prior_arch = LinearArchitecture{dim};
  }
  const int n_theta = param_count(base);

  Hypermodel hm;
  ReferenceDistribution dist;
  int per_arm_width = 0;
  const InitScheme scheme = parse_init_scheme(spec.init);
  if (spec.hypermodel == "ensemble") {
    dist = {ReferenceDistribution::Kind::OneHotUniform, spec.particles};
    hm = make_ensemble(n_theta, spec.particles, scheme, spec.init_scale, hm_rng);
  } else if (spec.hypermodel == "diagonal_linear") {
    if (!is_gaussian_env)
      throw ConfigError("diagonal_linear requires the independent-arm gaussian environment");
    const int m = spec.block_width;
    if (m < 1) throw ConfigError("diagonal_linear: block_width must be >= 1");
    std::vector<std::pair<int, int>> blocks(k, {1, m});
    dist = {ReferenceDistribution::Kind::GaussianUnit, k * m};
    hm = make_linear_hypermodel(n_theta, k * m, scheme, spec.init_scale, hm_rng,
                                make_block_diagonal_mask(blocks));
    per_arm_width = m;
  } else if (spec.hypermodel == "linear") {
    dist = {ReferenceDistribution::Kind::GaussianUnit, spec.index_dim};
    hm = make_linear_hypermodel(n_theta, spec.index_dim, scheme, spec.init_scale, hm_rng);
  } else if (spec.hypermodel == "hypernetwork") {
    dist = {ReferenceDistribution::Kind::GaussianUnit, spec.index_dim};
    hm = make_hypernetwork(MlpArchitecture{spec.index_dim, spec.hypernet_hidden, n_theta}, scheme,
                           spec.init_scale, hm_rng);
  } else if (spec.hypermodel == "sparse_softmax") {
    if (is_nn_env) throw ConfigError("sparse_softmax requires a linear base model");
    dist = {ReferenceDistribution::Kind::GaussianUnit, n_theta};
    hm = make_sparse_softmax(n_theta);
  } else {
    throw ConfigError("unknown hypermodel kind '" + spec.hypermodel + "'");
  }

  std::optional<AdditivePriorSpec> prior;
  if (spec.additive_prior) {
    if (spec.hypermodel == "sparse_softmax")
      throw ConfigError("sparse_softmax does not use an additive prior");
    Tensor d;
    if (is_nn_env) {
      d = nn_prior_scale(std::get<MlpArchitecture>(prior_arch), prior_weight_stds,
                         prior_bias_std);
    } else {
      d = Tensor(n_theta, 1);
      d.fill(std::sqrt(train.prior_var));
    }
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= spec.prior_multiplier;

    Tensor mixer;
    if (spec.hypermodel == "diagonal_linear") {
      std::vector<std::pair<int, int>> blocks(k, {1, spec.block_width});
      mixer = make_block_diagonal_mixer(blocks, prior_rng);
    } else if (spec.hypermodel == "linear" && is_nn_env) {
      // Independence of prior weights across layers: one block per layer.
      const auto& parch = std::get<MlpArchitecture>(prior_arch);
      const auto dims = parch.layer_dims();
      const int n_layers = static_cast<int>(dims.size()) - 1;
      if (dist.dim % n_layers != 0)
        throw ConfigError("linear hypermodel on nn env: index_dim must be divisible by layers");
      const int width = dist.dim / n_layers;
      std::vector<std::pair<int, int>> blocks;
      for (int l = 0; l < n_layers; ++l)
        blocks.emplace_back(dims[l] * dims[l + 1] + dims[l + 1], width);
      mixer = make_block_diagonal_mixer(blocks, prior_rng);
    } else {
      mixer = make_gaussian_mixer(param_count(prior_arch), dist.dim, prior_rng);
    }
    prior = make_additive_prior(std::move(d), std::move(mixer), prior_arch);
  }

  return make_bundle(std::move(hm), std::move(base), std::move(prior), dist, per_arm_width);
}

class EpsGreedyAgent : public Agent {
 public:
  EpsGreedyAgent(int k, double eps0, double tau)
      : eps0_(eps0), tau_(tau), sums_(k, 0.0), means_(k, 0.0), counts_(k, 0) {}

  int select(long long t, RngStream& rng) override {
    return eps_greedy_select(means_, counts_, t, eps0_, tau_, rng);
  }

  void observe(int action, double y, RngStream&, RngStream&) override {
    sums_[action] += y;
    counts_[action] += 1;
    means_[action] = sums_[action] / counts_[action];
  }

 private:
  double eps0_, tau_;
  std::vector<double> sums_, means_;
  std::vector<long long> counts_;
};

class ExactGaussianTsAgent : public Agent {
 public:
  ExactGaussianTsAgent(int k, double prior_var, double noise_var)
      : noise_var_(noise_var), posts_(k, GaussianArmPosterior{0.0, prior_var}) {}

  int select(long long, RngStream& rng) override {
    int best = 0;
    double best_v = 0.0;
    for (int i = 0; i < static_cast<int>(posts_.size()); ++i) {
      const double v = posts_[i].mean + std::sqrt(posts_[i].var) * rng.normal();
      if (i == 0 || v > best_v) {
        best = i;
        best_v = v;
      }
    }
    return best;
  }

  void observe(int action, double y, RngStream&, RngStream&) override {
    posts_[action] = gaussian_posterior_update(posts_[action], y, noise_var_);
  }

 private:
  double noise_var_;
  std::vector<GaussianArmPosterior> posts_;
};

}  // namespace

std::unique_ptr<Agent> build_agent(const BanditEnvironment& env, const AgentSpec& spec,
                                   const TrainConfig& train, RngStream& init_rng) {
  if (spec.kind == "hypermodel")
    return std::make_unique<HypermodelAgent>(env, spec, train, init_rng);
  if (spec.kind == "eps_greedy")
    return std::make_unique<EpsGreedyAgent>(env.n_actions(), spec.eps0, spec.tau);
  if (spec.kind == "exact_ts")
    return std::make_unique<ExactGaussianTsAgent>(env.n_actions(), spec.prior_var,
                                                  train.noise_var);
  throw ConfigError("unknown agent kind '" + spec.kind + "'");
}

unsigned long long computation_metric(unsigned long long n_sgd, unsigned long long n_z,
                                      unsigned long long n_data, unsigned long long n_params) {
  return n_sgd * n_z * n_data * n_params;
}

long long n_params_per_index(const AgentSpec& spec, int base_param_count, int n_arms) {
  if (spec.kind != "hypermodel") return 0;
  if (spec.hypermodel == "ensemble") return base_param_count;
  if (spec.hypermodel == "diagonal_linear")
    return static_cast<long long>(n_arms) * (spec.block_width + 1);
  if (spec.hypermodel == "linear")
    return static_cast<long long>(base_param_count) * (spec.index_dim + 1);
  if (spec.hypermodel == "hypernetwork")
    return MlpArchitecture{spec.index_dim, spec.hypernet_hidden, base_param_count}.param_count();
  if (spec.hypermodel == "sparse_softmax") return base_param_count;
  throw ConfigError("unknown hypermodel kind '" + spec.hypermodel + "'");
}

RunResult run_bandit(const ExperimentConfig& cfg, int run_id) {
  cfg.train.validate();
  if (cfg.horizon < 0) throw ConfigError("harness: horizon must be >= 0");
  RngStream root(cfg.base_seed);
  RngStream run_stream = root.fork(static_cast<std::uint64_t>(run_id));
  RngStream env_rng = run_stream.fork("env-setup");
  RngStream noise_rng = run_stream.fork("env-noise");
  RngStream init_rng = run_stream.fork("agent-init");
  RngStream select_rng = run_stream.fork("select");
  RngStream perturb_rng = run_stream.fork("perturb");
  RngStream train_rng = run_stream.fork("train");

  const auto env = env_new(cfg.env, env_rng);
  const auto agent = build_agent(*env, cfg.agent, cfg.train, init_rng);

  RunResult out;
  out.records.reserve(cfg.horizon);
  double cum = 0.0;
  for (long long t = 0; t < cfg.horizon; ++t) {
    const int a = agent->select(t, select_rng);
    const double y = env->step(a, noise_rng);
    const double r = env->regret(a);
    cum += r;
    agent->observe(a, y, perturb_rng, train_rng);
    out.records.push_back({run_id, run_stream.seed(), t, a, y, r, cum});
  }
  out.summary.run = run_id;
  out.summary.seed = run_stream.seed();
  out.summary.horizon = cfg.horizon;
  out.summary.cum_regret = cum;
  out.summary.avg_regret = cfg.horizon > 0 ? cum / cfg.horizon : 0.0;
  const long long ppi = agent->params_per_index();
  out.summary.computation =
      ppi > 0 ? computation_metric(cfg.train.sgd_per_period, cfg.train.batch_index,
                                   cfg.train.batch_data, static_cast<unsigned long long>(ppi))
              : 0;
  out.summary.ids_fallbacks = agent->ids_fallbacks();
  return out;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, int threads) {
  std::vector<RunResult> results(cfg.n_runs);
  if (threads <= 1) {
    for (int r = 0; r < cfg.n_runs; ++r) results[r] = run_bandit(cfg, r);
    return results;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    while (true) {
      const int r = next.fetch_add(1);
      if (r >= cfg.n_runs) return;
      results[r] = run_bandit(cfg, r);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min(threads, cfg.n_runs);
  pool.reserve(n);
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return results;
}

Aggregate aggregate(const std::vector<RunResult>& results) {
  if (results.empty()) throw ContractError("aggregate: no runs");
  const std::size_t horizon = results[0].records.size();
  for (const auto& r : results)
    if (r.records.size() != horizon) throw ContractError("aggregate: mismatched horizons");
  Aggregate agg;
  agg.mean_cum_regret.assign(horizon, 0.0);
  agg.sem_cum_regret.assign(horizon, 0.0);
  const double n = static_cast<double>(results.size());
  for (const auto& r : results)
    for (std::size_t t = 0; t < horizon; ++t) agg.mean_cum_regret[t] += r.records[t].cum_regret;
  for (std::size_t t = 0; t < horizon; ++t) agg.mean_cum_regret[t] /= n;
  if (results.size() > 1) {
    for (const auto& r : results)
      for (std::size_t t = 0; t < horizon; ++t) {
        const double d = r.records[t].cum_regret - agg.mean_cum_regret[t];
        agg.sem_cum_regret[t] += d * d;
      }
    for (std::size_t t = 0; t < horizon; ++t)
      agg.sem_cum_regret[t] = std::sqrt(agg.sem_cum_regret[t] / (n * (n - 1.0)));
  }
  agg.summaries.reserve(results.size());
  for (const auto& r : results) agg.summaries.push_back(r.summary);
  return agg;
}

double mean_average_regret(const std::vector<RunSummary>& summaries) {
  if (summaries.empty()) throw ContractError("mean_average_regret: no summaries");
  double acc = 0.0;
  for (const auto& s : summaries) acc += s.avg_regret;
  return acc / summaries.size();
}

bool meets_gaussian_target(const std::vector<RunSummary>& summaries, int n_arms) {
  return mean_average_regret(summaries) < 0.01 * std::sqrt(static_cast<double>(n_arms));
}

namespace {

void append_g17(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

std::string step_csv_string(const std::vector<RunResult>& results) {
  std::string out = "run,seed,t,action,reward,regret,cum_regret\n";
  char head[96];
  for (const auto& res : results) {
    for (const auto& r : res.records) {
      std::snprintf(head, sizeof head, "%d,%llu,%lld,%d,", r.run,
                    static_cast<unsigned long long>(r.seed), r.t, r.action);
      out += head;
      append_g17(out, r.reward);
      out += ',';
      append_g17(out, r.regret);
      out += ',';
      append_g17(out, r.cum_regret);
      out += '\n';
    }
  }
  return out;
}

std::string summary_csv_string(const std::vector<RunSummary>& summaries) {
  std::string out = "run,seed,horizon,cum_regret,avg_regret,computation\n";
  char head[64];
  for (const auto& s : summaries) {
    std::snprintf(head, sizeof head, "%d,%llu,%lld,", s.run,
                  static_cast<unsigned long long>(s.seed), s.horizon);
    out += head;
    append_g17(out, s.cum_regret);
    out += ',';
    append_g17(out, s.avg_regret);
    std::snprintf(head, sizeof head, ",%llu\n", s.computation);
    out += head;
  }
  return out;
}

void write_step_csv(std::ostream& os, const std::vector<RunResult>& results) {
  os << step_csv_string(results);
}

void write_summary_csv(std::ostream& os, const std::vector<RunSummary>& summaries) {
  os << summary_csv_string(summaries);
}

// ---------------------------------------------------------------------------
// Config file parsing

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(trim(s.substr(start)));
      return out;
    }
    out.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
}

double parse_double(const std::string& v) {
  std::size_t pos = 0;
  const double d = std::stod(v, &pos);
  if (pos != v.size()) throw ConfigError("bad numeric value '" + v + "'");
  return d;
}

long long parse_int(const std::string& v) {
  std::size_t pos = 0;
  const long long d = std::stoll(v, &pos);
  if (pos != v.size()) throw ConfigError("bad integer value '" + v + "'");
  return d;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("bad boolean value '" + v + "'");
}

std::vector<int> parse_dims(const std::string& v) {
  std::vector<int> out;
  for (const auto& tok : split(v, 'x')) out.push_back(static_cast<int>(parse_int(tok)));
  return out;
}

void apply_kv(ExperimentConfig& cfg, const std::string& section, const std::string& key,
              const std::string& value) {
  if (section == "env") {
    if (key == "kind") cfg.env.kind = value;
    else if (key == "arms") cfg.env.arms = static_cast<int>(parse_int(value));
    else if (key == "actions") cfg.env.n_actions = static_cast<int>(parse_int(value));
    else if (key == "theta_dim") cfg.env.theta_dim = static_cast<int>(parse_int(value));
    else if (key == "prior_var") cfg.env.prior_var = parse_double(value);
    else if (key == "noise_var") cfg.env.noise_var = parse_double(value);
    else throw ConfigError("unknown key '" + key + "' in [env]");
  } else if (section == "agent") {
    if (key == "kind") cfg.agent.kind = value;
    else if (key == "hypermodel") cfg.agent.hypermodel = value;
    else if (key == "exploration") cfg.agent.exploration = value;
    else if (key == "particles") cfg.agent.particles = static_cast<int>(parse_int(value));
    else if (key == "index_dim") cfg.agent.index_dim = static_cast<int>(parse_int(value));
    else if (key == "block_width") cfg.agent.block_width = static_cast<int>(parse_int(value));
    else if (key == "additive_prior") cfg.agent.additive_prior = parse_bool(value);
    else if (key == "init") cfg.agent.init = value;
    else if (key == "init_scale") cfg.agent.init_scale = parse_double(value);
    else if (key == "ids_samples") cfg.agent.ids_samples = static_cast<int>(parse_int(value));
    else if (key == "eps0") cfg.agent.eps0 = parse_double(value);
    else if (key == "tau") cfg.agent.tau = parse_double(value);
    else if (key == "prior_var") cfg.agent.prior_var = parse_double(value);
    else if (key == "prior_multiplier") cfg.agent.prior_multiplier = parse_double(value);
    else if (key == "hypernet_hidden") cfg.agent.hypernet_hidden = parse_dims(value);
    else throw ConfigError("unknown key '" + key + "' in [agent]");
  } else if (section == "train") {
    if (key == "step_size") cfg.train.step_size = parse_double(value);
    else if (key == "noise_var") cfg.train.noise_var = parse_double(value);
    else if (key == "prior_var") cfg.train.prior_var = parse_double(value);
    else if (key == "perturb_scale") cfg.train.perturb_scale = parse_double(value);
    else if (key == "batch_data") cfg.train.batch_data = static_cast<int>(parse_int(value));
    else if (key == "batch_index") cfg.train.batch_index = static_cast<int>(parse_int(value));
    else if (key == "sgd_per_period")
      cfg.train.sgd_per_period = static_cast<int>(parse_int(value));
    else throw ConfigError("unknown key '" + key + "' in [train]");
  } else if (section == "harness") {
    if (key == "horizon") cfg.horizon = parse_int(value);
    else if (key == "runs") cfg.n_runs = static_cast<int>(parse_int(value));
    else if (key == "seed") cfg.base_seed = static_cast<std::uint64_t>(parse_int(value));
    else throw ConfigError("unknown key '" + key + "' in [harness]");
  } else {
    throw ConfigError("unknown section [" + section + "]");
  }
}

struct RawEntry {
  std::string section, key;
  std::vector<std::string> values;  // >1 means swept
};

std::vector<RawEntry> parse_entries(const std::string& text) {
  std::vector<RawEntry> entries;
  std::istringstream is(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": key outside any section");
    RawEntry e;
    e.section = section;
    e.key = trim(line.substr(0, eq));
    e.values = split(line.substr(eq + 1), ',');
    if (e.key.empty() || e.values.empty() || e.values[0].empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  for (const auto& e : parse_entries(text)) {
    if (e.values.size() != 1)
      throw ConfigError("key '" + e.key + "' has a value list; lists are only valid in sweep mode");
    apply_kv(cfg, e.section, e.key, e.values[0]);
  }
  return cfg;
}

std::vector<SweepPoint> parse_sweep_text(const std::string& text) {
  const auto entries = parse_entries(text);
  std::vector<SweepPoint> points{{std::string(), ExperimentConfig{}}};
  for (const auto& e : entries) {
    if (e.values.size() == 1) {
      for (auto& p : points) apply_kv(p.config, e.section, e.key, e.values[0]);
      continue;
    }
    std::vector<SweepPoint> expanded;
    expanded.reserve(points.size() * e.values.size());
    for (const auto& p : points) {
      for (const auto& v : e.values) {
        SweepPoint q = p;
        apply_kv(q.config, e.section, e.key, v);
        if (!q.label.empty()) q.label += ';';
        q.label += e.section + "." + e.key + "=" + v;
        expanded.push_back(std::move(q));
      }
    }
    points = std::move(expanded);
  }
  return points;
}

namespace {
std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}
}  // namespace

ExperimentConfig parse_config_file(const std::string& path) {
  return parse_config_text(read_file(path));
}

std::vector<SweepPoint> parse_sweep_file(const std::string& path) {
  return parse_sweep_text(read_file(path));
}

std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "[env]\n";
  os << "kind = " << cfg.env.kind << "\n";
  if (cfg.env.kind == "gaussian") os << "arms = " << cfg.env.arms << "\n";
  if (cfg.env.kind == "nn") os << "actions = " << cfg.env.n_actions << "\n";
  if (cfg.env.kind == "sparse") os << "theta_dim = " << cfg.env.theta_dim << "\n";
  os << "prior_var = " << cfg.env.prior_var << "\n";
  os << "noise_var = " << cfg.env.noise_var << "\n";
  os << "\n[agent]\n";
  os << "kind = " << cfg.agent.kind << "\n";
  if (cfg.agent.kind == "hypermodel") {
    os << "hypermodel = " << cfg.agent.hypermodel << "\n";
    os << "exploration = " << cfg.agent.exploration << "\n";
    if (cfg.agent.hypermodel == "ensemble") os << "particles = " << cfg.agent.particles << "\n";
    if (cfg.agent.hypermodel == "linear" || cfg.agent.hypermodel == "hypernetwork")
      os << "index_dim = " << cfg.agent.index_dim << "\n";
    if (cfg.agent.hypermodel == "diagonal_linear")
      os << "block_width = " << cfg.agent.block_width << "\n";
    if (cfg.agent.hypermodel == "hypernetwork") {
      os << "hypernet_hidden = ";
      for (std::size_t i = 0; i < cfg.agent.hypernet_hidden.size(); ++i)
        os << (i ? "x" : "") << cfg.agent.hypernet_hidden[i];
      os << "\n";
    }
    os << "additive_prior = " << (cfg.agent.additive_prior ? "true" : "false") << "\n";
    os << "init = " << cfg.agent.init << "\n";
    os << "init_scale = " << cfg.agent.init_scale << "\n";
    if (cfg.agent.exploration == "ids") os << "ids_samples = " << cfg.agent.ids_samples << "\n";
    os << "prior_multiplier = " << cfg.agent.prior_multiplier << "\n";
  }
  if (cfg.agent.kind == "eps_greedy")
    os << "eps0 = " << cfg.agent.eps0 << "\ntau = " << cfg.agent.tau << "\n";
  if (cfg.agent.kind == "exact_ts") os << "prior_var = " << cfg.agent.prior_var << "\n";
  os << "\n[train]\n";
  os << "step_size = " << cfg.train.step_size << "\n";
  os << "noise_var = " << cfg.train.noise_var << "\n";
  os << "prior_var = " << cfg.train.prior_var << "\n";
  os << "perturb_scale = " << cfg.train.perturb_scale << "\n";
  os << "batch_data = " << cfg.train.batch_data << "\n";
  os << "batch_index = " << cfg.train.batch_index << "\n";
  os << "sgd_per_period = " << cfg.train.sgd_per_period << "\n";
  os << "\n[harness]\n";
  os << "horizon = " << cfg.horizon << "\n";
  os << "runs = " << cfg.n_runs << "\n";
  os << "seed = " << cfg.base_seed << "\n";
  return os.str();
}

}  // namespace hypx
