#include <doctest.h>

#include <cmath>
#include <vector>

#include "hypx/graph.hpp"
#include "hypx/rng.hpp"

using namespace hypx;

TEST_CASE("streams with the same seed produce identical sequences") {
  RngStream a(7), b(7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  Tensor ga = sample_gaussian(a, 3);
  Tensor gb = sample_gaussian(b, 3);
  CHECK(ga == gb);
}

TEST_CASE("forked streams differ by label and ignore parent consumption") {
  RngStream parent(123);
  RngStream c1 = parent.fork("alpha");
  parent.next_u64();
  parent.next_u64();
  RngStream c2 = parent.fork("alpha");
  RngStream c3 = parent.fork("beta");
  CHECK(c1.next_u64() == c2.next_u64());
  // distinct labels: overwhelmingly unlikely to collide
  bool all_equal = true;
  RngStream c1b = parent.fork("alpha");
  for (int i = 0; i < 16; ++i)
    if (c1b.next_u64() != c3.next_u64()) all_equal = false;
  CHECK_FALSE(all_equal);
}

TEST_CASE("sample_gaussian moments and degenerate input") {
  CHECK_THROWS_AS(sample_gaussian(*(new RngStream(1)), 0), DimensionError);
  RngStream rng(2025);
  const int n = 100000;
  double mean = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    mean += v;
    sq += v * v;
  }
  mean /= n;
  const double var = sq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.02);
  CHECK(std::fabs(var - 1.0) < 0.02);
}

TEST_CASE("hypersphere samples have unit norm for a spread of dimensions") {
  RngStream rng(17);
  const Tensor one = sample_hypersphere(rng, 1);
  CHECK(std::fabs(std::fabs(one[0]) - 1.0) < 1e-15);
  for (int n : {2, 3, 5, 64, 1000, 10000}) {
    const Tensor s = sample_hypersphere(rng, n);
    CHECK(std::fabs(norm2(s) - 1.0) < 1e-12);
  }
  // coordinate symmetry
  const int draws = 100000;
  double mean[3] = {0, 0, 0};
  for (int i = 0; i < draws; ++i) {
    const Tensor s = sample_hypersphere(rng, 3);
    for (int j = 0; j < 3; ++j) mean[j] += s[j];
  }
  for (double m : mean) CHECK(std::fabs(m / draws) < 0.02);
}

TEST_CASE("backward on the identity and on sum of squares") {
  ComputationGraph g;
  const NodeId x = g.input(Tensor::scalar(3.5));
  g.forward();
  g.backward(x);
  CHECK(g.adjoint(x)[0] == 1.0);

  ComputationGraph g2;
  const NodeId v = g2.input(Tensor::vector({1.0, -2.0, 0.5}));
  const NodeId out = g2.sum(g2.square(v));
  g2.forward();
  g2.backward(out);
  CHECK(g2.adjoint(v)[0] == doctest::Approx(2.0));
  CHECK(g2.adjoint(v)[1] == doctest::Approx(-4.0));
  CHECK(g2.adjoint(v)[2] == doctest::Approx(1.0));
}

TEST_CASE("backward requires a scalar output") {
  ComputationGraph g;
  const NodeId x = g.input(Tensor::vector({1.0, 2.0}));
  const NodeId y = g.square(x);
  g.forward();
  CHECK_THROWS_AS(g.backward(y), ContractError);
}

namespace {

// Random graph over the supported op set with FD-checkable inputs.
struct RandomGraph {
  ComputationGraph g;
  std::vector<NodeId> inputs;
  std::vector<NodeId> relus;
  NodeId out = -1;
};

RandomGraph build_random_graph(RngStream& rng) {
  RandomGraph rg;
  auto& g = rg.g;
  struct Live {
    NodeId id;
    int rows, cols;
  };
  std::vector<Live> live;
  const int n_inputs = 2 + rng.uniform_int(2);
  for (int i = 0; i < n_inputs; ++i) {
    const int r = 1 + rng.uniform_int(3);
    const int c = 1 + rng.uniform_int(2);
    Tensor t(r, c);
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = rng.normal();
    const NodeId id = g.input(t);
    rg.inputs.push_back(id);
    live.push_back({id, r, c});
  }
  const int n_ops = 4 + rng.uniform_int(6);
  for (int k = 0; k < n_ops; ++k) {
    const Live a = live[rng.uniform_int(static_cast<int>(live.size()))];
    switch (rng.uniform_int(7)) {
      case 0: {  // add with a same-shaped node if available
        for (const Live& b : live)
          if (b.rows == a.rows && b.cols == a.cols) {
            live.push_back({g.add(a.id, b.id), a.rows, a.cols});
            break;
          }
        break;
      }
      case 1:
        live.push_back({g.scale(a.id, rng.uniform(-2.0, 2.0)), a.rows, a.cols});
        break;
      case 2: {  // matmul with a fresh constant-free input
        const int c2 = 1 + rng.uniform_int(2);
        Tensor t(a.cols, c2);
        for (std::size_t j = 0; j < t.size(); ++j) t[j] = rng.normal();
        const NodeId b = g.input(t);
        rg.inputs.push_back(b);
        live.push_back({g.matmul(a.id, b), a.rows, c2});
        break;
      }
      case 3: {
        const NodeId r = g.relu(a.id);
        rg.relus.push_back(r);
        live.push_back({r, a.rows, a.cols});
        break;
      }
      case 4:
        live.push_back({g.square(a.id), a.rows, a.cols});
        break;
      case 5: {  // exp of a shrunk node to keep values tame
        const NodeId s = g.scale(a.id, 0.3);
        live.push_back({g.exp(s), a.rows, a.cols});
        break;
      }
      case 6: {  // divide by a strictly positive scalar: 1 + sum(square(b))
        const Live b = live[rng.uniform_int(static_cast<int>(live.size()))];
        const NodeId pos = g.sum(g.square(b.id));
        Tensor one(1, 1);
        one[0] = 1.0;
        const NodeId shifted = g.add(pos, g.input(one));
        live.push_back({g.divide(a.id, shifted), a.rows, a.cols});
        break;
      }
    }
  }
  // reduce everything reachable into one scalar through dot/sum
  const Live a = live[live.size() - 1];
  const Live b = live[rng.uniform_int(static_cast<int>(live.size()))];
  NodeId s1 = g.sum(a.id);
  NodeId s2 = (a.rows == b.rows && a.cols == b.cols) ? g.dot(a.id, b.id) : g.sum(b.id);
  rg.out = g.add(s1, s2);
  return rg;
}

}  // namespace

TEST_CASE("100 random graphs match central finite differences") {
  RngStream root(4040);
  double worst = 0.0;
  int built = 0;
  for (int inst = 0; built < 100; ++inst) {
    RngStream rng = root.fork(inst);
    RandomGraph rg = build_random_graph(rng);
    rg.g.forward();
    // resample kink-adjacent instances
    bool near_kink = false;
    for (NodeId r : rg.relus) {
      const Tensor& v = rg.g.value(r);
      for (std::size_t i = 0; i < v.size(); ++i)
        if (std::fabs(v[i]) < 1e-6 && v[i] != 0.0) near_kink = true;
    }
    if (near_kink) continue;
    ++built;
    rg.g.backward(rg.out);

    std::vector<Tensor> grads;
    for (NodeId in : rg.inputs) grads.push_back(rg.g.adjoint(in));
    double gmax = 0.0;
    for (const auto& t : grads)
      for (std::size_t i = 0; i < t.size(); ++i) gmax = std::max(gmax, std::fabs(t[i]));

    const double h = 1e-5;
    for (std::size_t ii = 0; ii < rg.inputs.size(); ++ii) {
      const NodeId in = rg.inputs[ii];
      Tensor v = rg.g.value(in);
      for (std::size_t j = 0; j < v.size(); ++j) {
        const double v0 = v[j];
        v[j] = v0 + h;
        rg.g.set_value(in, v);
        rg.g.forward();
        const double lp = rg.g.value(rg.out)[0];
        v[j] = v0 - h;
        rg.g.set_value(in, v);
        rg.g.forward();
        const double lm = rg.g.value(rg.out)[0];
        v[j] = v0;
        rg.g.set_value(in, v);
        const double fd = (lp - lm) / (2 * h);
        const double gv = grads[ii][j];
        const double den = std::max({std::fabs(gv), std::fabs(fd), 1e-4 * gmax, 1e-8});
        worst = std::max(worst, std::fabs(gv - fd) / den);
      }
    }
    rg.g.forward();
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("two-hidden-layer relu network gradient matches finite differences") {
  RngStream rng(99);
  ComputationGraph g;
  Tensor x(1, 4), w1(4, 3), b1(1, 3), w2(3, 3), b2(1, 3), w3(3, 1), b3(1, 1);
  for (auto* t : {&x, &w1, &b1, &w2, &b2, &w3, &b3})
    for (std::size_t i = 0; i < t->size(); ++i) (*t)[i] = rng.normal();
  const NodeId xi = g.constant(x);
  const NodeId iw1 = g.input(w1), ib1 = g.input(b1);
  const NodeId iw2 = g.input(w2), ib2 = g.input(b2);
  const NodeId iw3 = g.input(w3), ib3 = g.input(b3);
  const NodeId h1 = g.relu(g.add(g.matmul(xi, iw1), ib1));
  const NodeId h2 = g.relu(g.add(g.matmul(h1, iw2), ib2));
  const NodeId out = g.sum(g.add(g.matmul(h2, iw3), ib3));
  g.forward();
  g.backward(out);

  const double h = 1e-5;
  for (NodeId in : {iw1, ib1, iw2, ib2, iw3, ib3}) {
    Tensor v = g.value(in);
    const Tensor grad = g.adjoint(in);
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double v0 = v[j];
      v[j] = v0 + h;
      g.set_value(in, v);
      g.forward();
      const double lp = g.value(out)[0];
      v[j] = v0 - h;
      g.set_value(in, v);
      g.forward();
      const double lm = g.value(out)[0];
      v[j] = v0;
      g.set_value(in, v);
      const double fd = (lp - lm) / (2 * h);
      const double den = std::max({std::fabs(grad[j]), std::fabs(fd), 1e-8});
      CHECK(std::fabs(grad[j] - fd) / den <= 1e-5);
    }
  }
}

TEST_CASE("relu subgradient at zero is zero") {
  ComputationGraph g;
  const NodeId x = g.input(Tensor::vector({0.0, -1.0, 2.0}));
  const NodeId out = g.sum(g.relu(x));
  g.forward();
  g.backward(out);
  CHECK(g.adjoint(x)[0] == 0.0);
  CHECK(g.adjoint(x)[1] == 0.0);
  CHECK(g.adjoint(x)[2] == 1.0);
}

TEST_CASE("uniform_int covers its range uniformly") {
  RngStream rng(314);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) counts[rng.uniform_int(7)] += 1;
  for (int c : counts) CHECK(std::fabs(c / static_cast<double>(n) - 1.0 / 7) < 0.01);
  CHECK_THROWS_AS(rng.uniform_int(0), ContractError);
}

TEST_CASE("truncated normal respects the two-sigma bound") {
  RngStream rng(11);
  for (int i = 0; i < 20000; ++i) CHECK(std::fabs(rng.truncated_normal(0.05)) <= 0.1);
}
