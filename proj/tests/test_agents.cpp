#include <doctest.h>

#include <cmath>

#include "hypx/agents.hpp"

using namespace hypx;

namespace {

// Bundle whose induced arm values are independent N(mu_k, s_k^2): linear
// hypermodel with diagonal mixer and one-hot actions.
ModelBundle gaussian_arm_bundle(const std::vector<double>& mu, const std::vector<double>& s) {
  const int k = static_cast<int>(mu.size());
  LinearHypermodel lin{Tensor(k, 1), Tensor(k, k), std::nullopt};
  for (int i = 0; i < k; ++i) {
    lin.offset[i] = mu[i];
    lin.mixer(i, i) = s[i];
  }
  const ReferenceDistribution dist{ReferenceDistribution::Kind::GaussianUnit, k};
  return make_bundle(lin, LinearArchitecture{k}, std::nullopt, dist);
}

ActionSet one_hot_actions(int k) {
  Tensor m(k, k);
  for (int i = 0; i < k; ++i) m(i, i) = 1.0;
  return make_action_set(std::move(m));
}

}  // namespace

TEST_CASE("ts_select is greedy for a one-particle ensemble and breaks ties low") {
  RngStream rng(31);
  EnsembleHypermodel en{Tensor(3, 1)};
  en.particles(0, 0) = 0.2;
  en.particles(1, 0) = 0.9;
  en.particles(2, 0) = -0.3;
  const ReferenceDistribution dist{ReferenceDistribution::Kind::OneHotUniform, 1};
  ModelBundle bundle = make_bundle(en, LinearArchitecture{3}, std::nullopt, dist);
  const ActionSet actions = one_hot_actions(3);
  ActionEvaluator eval(&bundle, &actions);
  for (int i = 0; i < 20; ++i) CHECK(ts_select(eval, rng) == 1);

  EnsembleHypermodel flat{Tensor(3, 1)};
  flat.particles.fill(0.4);  // constant over actions: tie -> index 0
  ModelBundle fb = make_bundle(flat, LinearArchitecture{3}, std::nullopt, dist);
  ActionEvaluator feval(&fb, &actions);
  for (int i = 0; i < 20; ++i) CHECK(ts_select(feval, rng) == 0);
}

TEST_CASE("ts_select frequencies match the probability of optimality") {
  // 2-arm case; P(arm0 optimal) via numerical integration of the posterior.
  const std::vector<double> mu{0.3, 0.1};
  const std::vector<double> s{0.4, 0.5};
  ModelBundle bundle = gaussian_arm_bundle(mu, s);
  const ActionSet actions = one_hot_actions(2);
  ActionEvaluator eval(&bundle, &actions);
  RngStream rng(32);
  const int n = 100000;
  int count0 = 0;
  for (int i = 0; i < n; ++i)
    if (ts_select(eval, rng) == 0) ++count0;

  // oracle: integrate phi((v-mu0)/s0)/s0 * Phi((v-mu1)/s1) dv by trapezoid
  auto phi = [](double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI); };
  auto Phi = [](double u) { return 0.5 * std::erfc(-u / std::sqrt(2.0)); };
  const double lo = mu[0] - 8 * s[0], hi = mu[0] + 8 * s[0];
  const int steps = 20000;
  double p0 = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double v = lo + (hi - lo) * i / steps;
    const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
    p0 += w * phi((v - mu[0]) / s[0]) / s[0] * Phi((v - mu[1]) / s[1]);
  }
  p0 *= (hi - lo) / steps;
  CHECK(std::fabs(count0 / static_cast<double>(n) - p0) < 0.01);
}

TEST_CASE("ts argmax is invariant to constant shifts of all action values") {
  const std::vector<double> mu{0.3, -0.2, 0.15};
  const std::vector<double> s{0.4, 0.3, 0.6};
  ModelBundle a = gaussian_arm_bundle(mu, s);
  std::vector<double> mu_shift{mu[0] + 5.0, mu[1] + 5.0, mu[2] + 5.0};
  ModelBundle b = gaussian_arm_bundle(mu_shift, s);
  const ActionSet actions = one_hot_actions(3);
  ActionEvaluator ea(&a, &actions), eb(&b, &actions);
  RngStream r1(33), r2(33);
  for (int i = 0; i < 200; ++i) CHECK(ts_select(ea, r1) == ts_select(eb, r2));
}

TEST_CASE("ids_stats: identical rows give zero variance and max-gap regret") {
  Tensor f(3, 4);
  const double row[4] = {0.5, 2.0, 1.0, -1.0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) f(i, j) = row[j];
  const IdsStats st = ids_stats(f);
  for (int j = 0; j < 4; ++j) {
    CHECK(st.regret[j] == doctest::Approx(2.0 - row[j]));
    CHECK(st.variance[j] == 0.0);
  }
  CHECK(st.partition_sizes[1] == 3);
}

TEST_CASE("ids_stats hand case: rows (1,0) and (0,1)") {
  Tensor f(2, 2);
  f(0, 0) = 1.0;
  f(0, 1) = 0.0;
  f(1, 0) = 0.0;
  f(1, 1) = 1.0;
  const IdsStats st = ids_stats(f);
  CHECK(st.regret[0] == doctest::Approx(0.5));
  CHECK(st.regret[1] == doctest::Approx(0.5));
  CHECK(st.variance[0] == doctest::Approx(0.25));
  CHECK(st.variance[1] == doctest::Approx(0.25));
  CHECK(st.partition_sizes[0] == 1);
  CHECK(st.partition_sizes[1] == 1);
  CHECK_THROWS_AS(ids_stats(Tensor(1, 2)), ContractError);
}

TEST_CASE("ids_stats matches a direct recomputation on a random matrix") {
  RngStream rng(34);
  Tensor f(50, 6);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.normal();
  const IdsStats st = ids_stats(f);

  // direct formulas
  const int m = 50, k = 6;
  std::vector<int> am(m);
  for (int i = 0; i < m; ++i) {
    int best = 0;
    for (int j = 1; j < k; ++j)
      if (f(i, j) > f(i, best)) best = j;
    am[i] = best;
  }
  for (int j = 0; j < k; ++j) {
    double r = 0.0;
    for (int i = 0; i < m; ++i) r += f(i, am[i]) - f(i, j);
    r /= m;
    CHECK(st.regret[j] == doctest::Approx(r).epsilon(1e-12));
    double colmean = 0.0;
    for (int i = 0; i < m; ++i) colmean += f(i, j);
    colmean /= m;
    double v = 0.0;
    for (int xs = 0; xs < k; ++xs) {
      int cnt = 0;
      double pm = 0.0;
      for (int i = 0; i < m; ++i)
        if (am[i] == xs) {
          ++cnt;
          pm += f(i, j);
        }
      if (cnt == 0) continue;
      pm /= cnt;
      v += (static_cast<double>(cnt) / m) * (pm - colmean) * (pm - colmean);
    }
    CHECK(st.variance[j] == doctest::Approx(v).epsilon(1e-12));
    // law of total variance: v_x bounded by the column variance
    double colvar = 0.0;
    for (int i = 0; i < m; ++i) colvar += (f(i, j) - colmean) * (f(i, j) - colmean);
    colvar /= m;
    CHECK(st.variance[j] <= colvar + 1e-12);
  }
}

TEST_CASE("ids_optimize closed cases") {
  {  // zero-regret action with positive variance gets all the mass
    IdsStats st;
    st.regret = {0.4, 0.0, 1.0};
    st.variance = {0.5, 0.2, 0.9};
    st.partition_sizes = {1, 1, 1};
    const auto pi = ids_optimize(st);
    CHECK(pi.pi[1] == 1.0);
  }
  {  // r=(1,0), v=(0,1): the zero-regret zero-variance action wins with ratio 0
    IdsStats st;
    st.regret = {1.0, 0.0};
    st.variance = {0.0, 1.0};
    st.partition_sizes = {1, 1};
    const auto pi = ids_optimize(st);
    CHECK(pi.pi[1] == 1.0);
  }
  {  // all-zero variance with positive regret everywhere: degenerate
    IdsStats st;
    st.regret = {1.0, 0.5};
    st.variance = {0.0, 0.0};
    st.partition_sizes = {1, 1};
    CHECK_THROWS_AS(ids_optimize(st), DegenerateInformationError);
  }
}

TEST_CASE("ids_optimize support and scale invariance") {
  RngStream rng(35);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + rng.uniform_int(7);
    IdsStats st;
    st.regret.resize(k);
    st.variance.resize(k);
    st.partition_sizes.assign(k, 1);
    for (int i = 0; i < k; ++i) {
      st.regret[i] = rng.uniform();
      st.variance[i] = rng.uniform();
    }
    const auto pi = ids_optimize(st);
    int nonzero = 0;
    double mass = 0.0;
    for (double p : pi.pi) {
      CHECK(p >= 0.0);
      if (p > 0.0) ++nonzero;
      mass += p;
    }
    CHECK(nonzero <= 2);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

    // objective no worse than any single action
    double r = 0.0, v = 0.0;
    for (int i = 0; i < k; ++i) {
      r += pi.pi[i] * st.regret[i];
      v += pi.pi[i] * st.variance[i];
    }
    const double val = r * r / v;
    for (int i = 0; i < k; ++i)
      if (st.variance[i] > 1e-12)
        CHECK(val <= st.regret[i] * st.regret[i] / st.variance[i] + 1e-9);

    // scale invariance: r -> c r, v -> c^2 v keeps the support
    IdsStats scaled = st;
    const double c = 3.7;
    for (int i = 0; i < k; ++i) {
      scaled.regret[i] *= c;
      scaled.variance[i] *= c * c;
    }
    const auto pi2 = ids_optimize(scaled);
    for (int i = 0; i < k; ++i) CHECK(pi2.pi[i] == doctest::Approx(pi.pi[i]).epsilon(1e-9));
  }
}

TEST_CASE("ids_select on a deterministic hypermodel degrades to greedy") {
  // zero mixer: every index maps to the same parameters
  LinearHypermodel lin{Tensor(3, 1), Tensor(3, 3), std::nullopt};
  lin.offset[0] = 0.1;
  lin.offset[1] = 0.8;
  lin.offset[2] = 0.3;
  const ReferenceDistribution dist{ReferenceDistribution::Kind::GaussianUnit, 3};
  ModelBundle bundle = make_bundle(lin, LinearArchitecture{3}, std::nullopt, dist);
  const ActionSet actions = one_hot_actions(3);
  ActionEvaluator eval(&bundle, &actions);
  RngStream rng(36);
  bool fell_back = false;
  for (int i = 0; i < 10; ++i) CHECK(ids_select(eval, 16, rng, &fell_back) == 1);
  CHECK_FALSE(fell_back);  // the optimal action has r=0, not a degenerate case
  CHECK_THROWS_AS(ids_select(eval, 1, rng, nullptr), ContractError);
}

TEST_CASE("two-sample two-action pipeline traced by hand") {
  // F = [[1,0],[0,1]] gives r=(.5,.5), v=(.25,.25); every distribution has
  // ratio 1 and the lexicographic tie rule picks the single action 0.
  Tensor f(2, 2);
  f(0, 0) = 1.0;
  f(1, 1) = 1.0;
  const auto pi = ids_optimize(ids_stats(f));
  CHECK(pi.pi[0] == 1.0);
  CHECK(pi.pi[1] == 0.0);
}

TEST_CASE("eps-greedy schedule") {
  RngStream rng(37);
  const std::vector<double> means{0.1, 0.9, 0.5};
  const std::vector<long long> full{5, 5, 5};
  // eps0 = 0: pure greedy
  for (int i = 0; i < 50; ++i) CHECK(eps_greedy_select(means, full, i, 0.0, 100.0, rng) == 1);
  // huge t: effectively greedy
  int greedy = 0;
  for (int i = 0; i < 2000; ++i)
    if (eps_greedy_select(means, full, 100000000LL, 1.0, 10.0, rng) == 1) ++greedy;
  CHECK(greedy >= 1999);
  // unvisited arms come first, lowest index first
  const std::vector<long long> partial{3, 0, 0};
  CHECK(eps_greedy_select(means, partial, 1000, 0.0, 1.0, rng) == 1);
  // eps0 = 1 with huge tau: uniform
  std::vector<int> counts(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[eps_greedy_select(means, full, i, 1.0, 1e12, rng)] += 1;
  for (int c : counts) CHECK(std::fabs(c / static_cast<double>(n) - 1.0 / 3) < 0.01);
}

TEST_CASE("conjugate gaussian posterior update") {
  const GaussianArmPosterior prior{0.0, 2.25};
  const double y = 1.3;
  const GaussianArmPosterior post = gaussian_posterior_update(prior, y, 1.0);
  CHECK(post.var == doctest::Approx(2.25 / 3.25));
  CHECK(post.mean == doctest::Approx(2.25 / 3.25 * y));
  CHECK(post.var < prior.var);

  // observing the current mean leaves the mean unchanged
  const GaussianArmPosterior q = gaussian_posterior_update(post, post.mean, 1.0);
  CHECK(q.mean == doctest::Approx(post.mean));

  // n identical updates match one batch update with the mean observation
  GaussianArmPosterior it = prior;
  const int n = 7;
  for (int i = 0; i < n; ++i) it = gaussian_posterior_update(it, y, 1.0);
  // batch: precision adds n/sigma_w^2, mean weighs sum of ys
  const double bv = 1.0 / (1.0 / prior.var + n / 1.0);
  const double bm = bv * (prior.mean / prior.var + n * y / 1.0);
  CHECK(it.var == doctest::Approx(bv).epsilon(1e-12));
  CHECK(it.mean == doctest::Approx(bm).epsilon(1e-12));
  CHECK_THROWS_AS(gaussian_posterior_update(prior, 0.0, 0.0), ContractError);
}
