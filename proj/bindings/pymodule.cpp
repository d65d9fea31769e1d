#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "hypx/checks.hpp"
#include "hypx/harness.hpp"

namespace py = pybind11;
using namespace hypx;

namespace {

Tensor to_tensor(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  const auto buf = a.request();
  if (buf.ndim == 1) {
    Tensor t(static_cast<int>(buf.shape[0]), 1);
    std::memcpy(t.data(), buf.ptr, t.size() * sizeof(double));
    return t;
  }
  if (buf.ndim == 2) {
    Tensor t(static_cast<int>(buf.shape[0]), static_cast<int>(buf.shape[1]));
    std::memcpy(t.data(), buf.ptr, t.size() * sizeof(double));
    return t;
  }
  throw DimensionError("expected a 1-d or 2-d array");
}

py::array_t<double> to_array(const Tensor& t) {
  if (t.cols() == 1) {
    py::array_t<double> a(t.rows());
    std::memcpy(a.mutable_data(), t.data(), t.size() * sizeof(double));
    return a;
  }
  py::array_t<double> a({t.rows(), t.cols()});
  std::memcpy(a.mutable_data(), t.data(), t.size() * sizeof(double));
  return a;
}

// Hypermodel handle exposed to python.
struct PyHypermodel {
  Hypermodel hm;
};

// Environment plus its own noise stream.
struct PyEnv {
  std::unique_ptr<BanditEnvironment> env;
  RngStream noise;

  PyEnv(const EnvSpec& spec, std::uint64_t seed)
      : env(nullptr), noise(RngStream(seed).fork("env-noise")) {
    RngStream setup = RngStream(seed).fork("env-setup");
    env = env_new(spec, setup);
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "hypermodel bandit simulator core";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);
  py::register_exception<DegenerateInformationError>(m, "DegenerateInformationError",
                                                     PyExc_RuntimeError);

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("fork", [](const RngStream& s, std::uint64_t label) { return s.fork(label); })
      .def("fork_label",
           [](const RngStream& s, const std::string& label) { return s.fork(label); })
      .def("seed", &RngStream::seed)
      .def("uniform", [](RngStream& s) { return s.uniform(); })
      .def("uniform_int", &RngStream::uniform_int)
      .def("normal", &RngStream::normal);

  m.def("sample_gaussian",
        [](RngStream& rng, int n) { return to_array(sample_gaussian(rng, n)); });
  m.def("sample_hypersphere",
        [](RngStream& rng, int n) { return to_array(sample_hypersphere(rng, n)); });

  py::class_<PyHypermodel>(m, "Hypermodel")
      .def_property_readonly("index_dim",
                             [](const PyHypermodel& h) { return index_dim(h.hm); })
      .def_property_readonly("output_dim",
                             [](const PyHypermodel& h) { return output_dim(h.hm); })
      .def("map",
           [](const PyHypermodel& h, const py::array_t<double>& z) {
             return to_array(map_index(h.hm, to_tensor(z)));
           })
      .def("save", [](const PyHypermodel& h, const std::string& path) {
        save_hypermodel_file(h.hm, path);
      });

  m.def("load_hypermodel",
        [](const std::string& path) { return PyHypermodel{load_hypermodel_file(path)}; });
  m.def(
      "make_ensemble",
      [](int n_theta, int n_particles, double init_scale, std::uint64_t seed) {
        RngStream rng(seed);
        return PyHypermodel{
            make_ensemble(n_theta, n_particles, InitScheme::Gaussian, init_scale, rng)};
      },
      py::arg("n_theta"), py::arg("n_particles"), py::arg("init_scale") = 0.05,
      py::arg("seed") = 0);
  m.def(
      "make_linear",
      [](int n_theta, int n_z, double init_scale, std::uint64_t seed) {
        RngStream rng(seed);
        return PyHypermodel{
            make_linear_hypermodel(n_theta, n_z, InitScheme::Gaussian, init_scale, rng)};
      },
      py::arg("n_theta"), py::arg("n_z"), py::arg("init_scale") = 0.05, py::arg("seed") = 0);
  m.def(
      "make_hypernetwork",
      [](int n_z, const std::vector<int>& hidden, int n_theta, std::uint64_t seed) {
        RngStream rng(seed);
        return PyHypermodel{make_hypernetwork(MlpArchitecture{n_z, hidden, n_theta},
                                              InitScheme::GlorotUniform, 0.05, rng)};
      },
      py::arg("n_z"), py::arg("hidden"), py::arg("n_theta"), py::arg("seed") = 0);
  m.def(
      "make_sparse_softmax",
      [](int n_theta, double alpha, double beta) {
        return PyHypermodel{make_sparse_softmax(n_theta, alpha, beta)};
      },
      py::arg("n_theta"), py::arg("alpha") = 0.01, py::arg("beta") = 10.0);

  m.def("ids_stats", [](const py::array_t<double>& f) {
    const IdsStats st = ids_stats(to_tensor(f));
    return py::make_tuple(st.regret, st.variance, st.partition_sizes);
  });
  m.def("ids_optimize",
        [](const std::vector<double>& r, const std::vector<double>& v) {
          IdsStats st;
          st.regret = r;
          st.variance = v;
          st.partition_sizes.assign(r.size(), 0);
          return ids_optimize(st).pi;
        });

  py::class_<PyEnv>(m, "BanditEnv")
      .def_property_readonly("n_actions", [](const PyEnv& e) { return e.env->n_actions(); })
      .def_property_readonly("actions",
                             [](const PyEnv& e) { return to_array(e.env->actions().matrix); })
      .def_property_readonly("optimal_reward",
                             [](const PyEnv& e) { return e.env->optimal_reward(); })
      .def("expected_reward",
           [](const PyEnv& e, int a) { return e.env->expected_reward(a); })
      .def("regret", [](const PyEnv& e, int a) { return e.env->regret(a); })
      .def("step", [](PyEnv& e, int a) { return e.env->step(a, e.noise); });

  m.def(
      "make_env",
      [](const std::string& kind, int size, double prior_var, double noise_var,
         std::uint64_t seed) {
        EnvSpec spec;
        spec.kind = kind;
        spec.arms = size;
        spec.n_actions = size;
        spec.theta_dim = size;
        spec.prior_var = prior_var;
        spec.noise_var = noise_var;
        return std::make_unique<PyEnv>(spec, seed);
      },
      py::arg("kind"), py::arg("size"), py::arg("prior_var") = 2.25, py::arg("noise_var") = 1.0,
      py::arg("seed") = 1);

  m.def(
      "run_config",
      [](const std::string& text, int runs, long long seed, int threads) {
        ExperimentConfig cfg = parse_config_text(text);
        if (runs >= 0) cfg.n_runs = runs;
        if (seed >= 0) cfg.base_seed = static_cast<std::uint64_t>(seed);
        const auto results = run_experiment(cfg, threads);
        const auto agg = aggregate(results);
        py::dict out;
        out["steps_csv"] = step_csv_string(results);
        out["summary_csv"] = summary_csv_string(agg.summaries);
        out["mean_cum_regret"] = agg.mean_cum_regret.back();
        out["mean_avg_regret"] = mean_average_regret(agg.summaries);
        out["computation"] = agg.summaries.front().computation;
        return out;
      },
      py::arg("config_text"), py::arg("runs") = -1, py::arg("seed") = -1, py::arg("threads") = 1);

  m.def("check_suite", [](const std::string& suite) {
    const CheckResult res = run_check_suite(suite);
    return py::make_tuple(res.pass, res.detail);
  });
}
