#include "hypx/hypermodels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hypx {

Tensor ReferenceDistribution::sample(RngStream& rng) const {
  switch (kind) {
    case Kind::GaussianUnit:
      return sample_gaussian(rng, dim);
    case Kind::HypersphereUniform:
      return sample_hypersphere(rng, dim);
    case Kind::OneHotUniform: {
      Tensor z(dim, 1);
      z[rng.uniform_int(dim)] = 1.0;
      return z;
    }
  }
  throw ContractError("ReferenceDistribution: bad kind");
}

Tensor sample_index(const ReferenceDistribution& dist, RngStream& rng) { return dist.sample(rng); }

int index_dim(const Hypermodel& hm) {
  return std::visit([](const auto& h) -> int {
    using T = std::decay_t<decltype(h)>;
    if constexpr (std::is_same_v<T, EnsembleHypermodel>) return h.particles.cols();
    else if constexpr (std::is_same_v<T, LinearHypermodel>) return h.mixer.cols();
    else if constexpr (std::is_same_v<T, HypernetworkHypermodel>) return h.net.input_dim;
    else return h.nu.rows();
  }, hm);
}

int output_dim(const Hypermodel& hm) {
  return std::visit([](const auto& h) -> int {
    using T = std::decay_t<decltype(h)>;
    if constexpr (std::is_same_v<T, EnsembleHypermodel>) return h.particles.rows();
    else if constexpr (std::is_same_v<T, LinearHypermodel>) return h.offset.rows();
    else if constexpr (std::is_same_v<T, HypernetworkHypermodel>) return h.net.output_dim;
    else return h.nu.rows();
  }, hm);
}

namespace {

void mlp_forward_vector(const MlpArchitecture& arch, const double* th, const Tensor& x,
                        Tensor& out) {
  const auto dims = arch.layer_dims();
  std::vector<double> cur(x.data(), x.data() + x.size());
  std::vector<double> nxt;
  int off = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l], outw = dims[l + 1];
    nxt.assign(outw, 0.0);
    for (int i = 0; i < in; ++i) {
      const double xi = cur[i];
      if (xi == 0.0) continue;
      const double* wrow = th + off + static_cast<std::size_t>(i) * outw;
      for (int j = 0; j < outw; ++j) nxt[j] += xi * wrow[j];
    }
    off += in * outw;
    for (int j = 0; j < outw; ++j) nxt[j] += th[off + j];
    off += outw;
    if (l + 2 < dims.size())
      for (double& v : nxt)
        if (v < 0.0) v = 0.0;
    cur.swap(nxt);
  }
  if (out.rows() != static_cast<int>(cur.size()) || out.cols() != 1)
    out = Tensor(static_cast<int>(cur.size()), 1);
  std::memcpy(out.data(), cur.data(), cur.size() * sizeof(double));
}

}  // namespace

void map_index_into(const Hypermodel& hm, const Tensor& z, Tensor& out) {
  if (static_cast<int>(z.size()) != index_dim(hm))
    throw DimensionError("map_index: index dimension mismatch");
  std::visit([&](const auto& h) {
    using T = std::decay_t<decltype(h)>;
    if constexpr (std::is_same_v<T, EnsembleHypermodel>) {
      matmul_into(h.particles, z, out);
    } else if constexpr (std::is_same_v<T, LinearHypermodel>) {
      matmul_into(h.mixer, z, out);
      const double* a = h.offset.data();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += a[i];
    } else if constexpr (std::is_same_v<T, HypernetworkHypermodel>) {
      mlp_forward_vector(h.net, h.params.data(), z, out);
    } else {  // sparse softmax, computed with max subtraction
      const int n = h.nu.rows();
      if (out.rows() != n || out.cols() != 1) out = Tensor(n, 1);
      double mx = -1e300;
      for (int i = 0; i < n; ++i) {
        const double zi = z[i];
        const double w = h.beta * h.nu[i] * (zi * zi + h.alpha_s);
        out[i] = w;
        if (w > mx) mx = w;
      }
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        out[i] = std::exp(out[i] - mx);
        total += out[i];
      }
      for (int i = 0; i < n; ++i) out[i] /= total;
    }
  }, hm);
}

Tensor map_index(const Hypermodel& hm, const Tensor& z) {
  Tensor out;
  map_index_into(hm, z, out);
  return out;
}

Tensor make_block_diagonal_mixer(const std::vector<std::pair<int, int>>& blocks, RngStream& rng) {
  int rows = 0, cols = 0;
  for (const auto& [r, c] : blocks) {
    if (r < 1 || c < 1) throw DimensionError("block mixer: empty block");
    rows += r;
    cols += c;
  }
  Tensor b(rows, cols);
  int ro = 0, co = 0;
  for (const auto& [r, c] : blocks) {
    for (int i = 0; i < r; ++i) {
      Tensor row = sample_hypersphere(rng, c);
      for (int j = 0; j < c; ++j) b(ro + i, co + j) = row[j];
    }
    ro += r;
    co += c;
  }
  return b;
}

Tensor make_block_diagonal_mask(const std::vector<std::pair<int, int>>& blocks) {
  int rows = 0, cols = 0;
  for (const auto& [r, c] : blocks) {
    if (r < 1 || c < 1) throw DimensionError("block mask: empty block");
    rows += r;
    cols += c;
  }
  Tensor m(rows, cols);
  int ro = 0, co = 0;
  for (const auto& [r, c] : blocks) {
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(ro + i, co + j) = 1.0;
    ro += r;
    co += c;
  }
  return m;
}

Tensor make_gaussian_mixer(int rows, int cols, RngStream& rng) {
  if (rows < 1 || cols < 1) throw DimensionError("gaussian mixer: empty");
  Tensor b(rows, cols);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = rng.normal();
  return b;
}

namespace {

void fill_init(Tensor& t, InitScheme scheme, double scale, RngStream& rng) {
  switch (scheme) {
    case InitScheme::Zeros:
      t.fill(0.0);
      break;
    case InitScheme::Gaussian:
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
      break;
    case InitScheme::TruncatedGaussian:
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.truncated_normal(scale);
      break;
    default:
      throw ConfigError("fill_init: unsupported scheme");
  }
}

void glorot_fill(double* p, int fan_in, int fan_out, RngStream& rng) {
  const double lim = std::sqrt(6.0 / (fan_in + fan_out));
  const std::size_t n = static_cast<std::size_t>(fan_in) * fan_out;
  for (std::size_t i = 0; i < n; ++i) p[i] = rng.uniform(-lim, lim);
}

}  // namespace

EnsembleHypermodel make_ensemble(int n_theta, int n_particles, InitScheme scheme, double scale,
                                 RngStream& rng) {
  if (n_theta < 1 || n_particles < 1) throw DimensionError("ensemble: empty dims");
  EnsembleHypermodel hm{Tensor(n_theta, n_particles)};
  if (scheme == InitScheme::GlorotUniform)
    throw ConfigError("ensemble: glorot init is not defined for particles");
  fill_init(hm.particles, scheme, scale, rng);
  return hm;
}

LinearHypermodel make_linear_hypermodel(int n_theta, int n_z, InitScheme scheme, double scale,
                                        RngStream& rng, std::optional<Tensor> mask) {
  if (n_theta < 1 || n_z < 1) throw DimensionError("linear hypermodel: empty dims");
  LinearHypermodel hm{Tensor(n_theta, 1), Tensor(n_theta, n_z), std::move(mask)};
  if (hm.block_mask && !hm.block_mask->same_shape(hm.mixer))
    throw DimensionError("linear hypermodel: mask shape mismatch");
  if (scheme == InitScheme::GlorotUniform) {
    glorot_fill(hm.mixer.data(), n_z, n_theta, rng);
    hm.offset.fill(0.0);
  } else {
    fill_init(hm.mixer, scheme, scale, rng);
    fill_init(hm.offset, scheme, scale, rng);
  }
  if (hm.block_mask) {
    const Tensor& m = *hm.block_mask;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i] == 0.0) hm.mixer[i] = 0.0;
  }
  return hm;
}

HypernetworkHypermodel make_hypernetwork(MlpArchitecture net, InitScheme scheme, double scale,
                                         RngStream& rng) {
  HypernetworkHypermodel hm{std::move(net), Tensor(0, 0)};
  hm.params = Tensor(hm.net.param_count(), 1);
  if (scheme == InitScheme::GlorotUniform) {
    for (const auto& b : hm.net.blocks())
      if (!b.bias) glorot_fill(hm.params.data() + b.offset, b.rows, b.cols, rng);
  } else {
    fill_init(hm.params, scheme, scale, rng);
  }
  return hm;
}

SparseSoftmaxHypermodel make_sparse_softmax(int n_theta, double alpha_s, double beta) {
  if (n_theta < 1) throw DimensionError("sparse softmax: empty dim");
  SparseSoftmaxHypermodel hm{Tensor(n_theta, 1), alpha_s, beta};
  hm.nu.fill(1.0);  // nu_0 = all ones
  return hm;
}

namespace {

void write_tensor(std::ostream& os, const Tensor& t) {
  os << t.rows() << ' ' << t.cols() << '\n';
  char buf[40];
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%a", t[i]);
    os << buf << (i + 1 == t.size() ? '\n' : ' ');
  }
  if (t.size() == 0) os << '\n';
}

Tensor read_tensor(std::istream& is) {
  int r = 0, c = 0;
  if (!(is >> r >> c)) throw ConfigError("checkpoint: bad tensor header");
  Tensor t(r, c);
  std::string tok;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(is >> tok)) throw ConfigError("checkpoint: truncated tensor");
    t[i] = std::strtod(tok.c_str(), nullptr);
  }
  return t;
}

}  // namespace

void save_hypermodel(const Hypermodel& hm, std::ostream& os) {
  os << "hypx-hypermodel 1\n";
  std::visit([&](const auto& h) {
    using T = std::decay_t<decltype(h)>;
    if constexpr (std::is_same_v<T, EnsembleHypermodel>) {
      os << "ensemble\n";
      write_tensor(os, h.particles);
    } else if constexpr (std::is_same_v<T, LinearHypermodel>) {
      os << "linear " << (h.block_mask ? 1 : 0) << '\n';
      write_tensor(os, h.offset);
      write_tensor(os, h.mixer);
      if (h.block_mask) write_tensor(os, *h.block_mask);
    } else if constexpr (std::is_same_v<T, HypernetworkHypermodel>) {
      os << "hypernetwork " << h.net.input_dim << ' ' << h.net.output_dim << ' '
         << h.net.hidden.size();
      for (int w : h.net.hidden) os << ' ' << w;
      os << '\n';
      write_tensor(os, h.params);
    } else {
      char a[40], b[40];
      std::snprintf(a, sizeof a, "%a", h.alpha_s);
      std::snprintf(b, sizeof b, "%a", h.beta);
      os << "sparse_softmax " << a << ' ' << b << '\n';
      write_tensor(os, h.nu);
    }
  }, hm);
}

Hypermodel load_hypermodel(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "hypx-hypermodel" || version != 1)
    throw ConfigError("checkpoint: bad header");
  std::string kind;
  is >> kind;
  if (kind == "ensemble") {
    return EnsembleHypermodel{read_tensor(is)};
  } else if (kind == "linear") {
    int has_mask = 0;
    is >> has_mask;
    Tensor offset = read_tensor(is);
    Tensor mixer = read_tensor(is);
    std::optional<Tensor> mask;
    if (has_mask) mask = read_tensor(is);
    return LinearHypermodel{std::move(offset), std::move(mixer), std::move(mask)};
  } else if (kind == "hypernetwork") {
    MlpArchitecture net;
    std::size_t nh = 0;
    is >> net.input_dim >> net.output_dim >> nh;
    net.hidden.resize(nh);
    for (auto& w : net.hidden) is >> w;
    Tensor params = read_tensor(is);
    return HypernetworkHypermodel{std::move(net), std::move(params)};
  } else if (kind == "sparse_softmax") {
    std::string a, b;
    is >> a >> b;
    SparseSoftmaxHypermodel hm{Tensor(0, 0), std::strtod(a.c_str(), nullptr),
                               std::strtod(b.c_str(), nullptr)};
    hm.nu = read_tensor(is);
    return hm;
  }
  throw ConfigError("checkpoint: unknown hypermodel kind '" + kind + "'");
}

void save_hypermodel_file(const Hypermodel& hm, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open checkpoint file for writing: " + path);
  save_hypermodel(hm, os);
}

Hypermodel load_hypermodel_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open checkpoint file: " + path);
  return load_hypermodel(is);
}

}  // namespace hypx
