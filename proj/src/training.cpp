#include "hypx/training.hpp"

#include <cmath>
#include <cstring>

namespace hypx {

void AugmentedDataset::append(const Tensor& x, double y, const Tensor& a) {
  if (static_cast<int>(x.size()) != x_dim_ || static_cast<int>(a.size()) != a_dim_)
    throw DimensionError("dataset append: dimension mismatch");
  xs_.insert(xs_.end(), x.data(), x.data() + x.size());
  as_.insert(as_.end(), a.data(), a.data() + a.size());
  ys_.push_back(y);
}

AugmentedDataPoint AugmentedDataset::point(int i) const {
  AugmentedDataPoint p;
  p.x = Tensor(x_dim_, 1);
  p.a = Tensor(a_dim_, 1);
  std::memcpy(p.x.data(), x(i), x_dim_ * sizeof(double));
  std::memcpy(p.a.data(), a(i), a_dim_ * sizeof(double));
  p.y = y(i);
  return p;
}

void TrainConfig::validate() const {
  if (step_size <= 0.0) throw ConfigError("train: step_size must be positive");
  if (noise_var <= 0.0) throw ConfigError("train: noise_var must be positive");
  if (prior_var <= 0.0) throw ConfigError("train: prior_var must be positive");
  if (perturb_scale < 0.0) throw ConfigError("train: perturb_scale must be nonnegative");
  if (batch_data < 1) throw ConfigError("train: batch_data must be >= 1");
  if (batch_index < 1) throw ConfigError("train: batch_index must be >= 1");
  if (sgd_per_period < 0) throw ConfigError("train: sgd_per_period must be >= 0");
}

ModelBundle make_bundle(Hypermodel hm, BaseArchitecture base,
                        std::optional<AdditivePriorSpec> prior, ReferenceDistribution dist,
                        int per_arm_block_width) {
  if (output_dim(hm) != param_count(base))
    throw DimensionError("bundle: hypermodel output dim != base param count");
  if (index_dim(hm) != dist.dim) throw DimensionError("bundle: index dim mismatch");
  if (prior) {
    if (prior->prior_mixer.cols() != dist.dim)
      throw DimensionError("bundle: prior mixer index dim mismatch");
    if (input_dim(prior->prior_arch) != input_dim(base))
      throw DimensionError("bundle: prior input dim mismatch");
  }
  ModelBundle b{hm, std::move(hm), std::move(base), std::move(prior), dist, per_arm_block_width};
  b.initial = b.hypermodel;
  return b;
}

double bundle_value(const ModelBundle& b, const Tensor& z, const Tensor& x) {
  const BaseParams diff = make_base_params(map_index(b.hypermodel, z), b.base);
  double v = eval_base(diff, x);
  if (b.prior) v += eval_base(make_base_params(prior_params(*b.prior, z), b.prior->prior_arch), x);
  return v;
}

Tensor make_perturbation(const ReferenceDistribution& dist, RngStream& rng, int block_offset,
                         int block_width) {
  if (dist.kind == ReferenceDistribution::Kind::GaussianUnit) {
    if (block_width > 0) {
      if (block_offset < 0 || block_offset + block_width > dist.dim)
        throw DimensionError("make_perturbation: block out of range");
      Tensor a(dist.dim, 1);
      Tensor s = sample_hypersphere(rng, block_width);
      for (int i = 0; i < block_width; ++i) a[block_offset + i] = s[i];
      return a;
    }
    return sample_hypersphere(rng, dist.dim);
  }
  return sample_gaussian(rng, dist.dim);
}

double approx_loss(const ModelBundle& bundle, const std::vector<AugmentedDataPoint>& minibatch,
                   const std::vector<Tensor>& indices, const TrainConfig& cfg, int total_n) {
  if (minibatch.empty() || indices.empty())
    throw ContractError("approx_loss: empty minibatch or index set");
  const double w_data = static_cast<double>(total_n) / (2.0 * cfg.noise_var * minibatch.size());
  const double w_reg = 1.0 / (2.0 * cfg.prior_var);
  double loss = 0.0;
  for (const Tensor& z : indices) {
    const Tensor theta = map_index(bundle.hypermodel, z);
    const Tensor theta0 = map_index(bundle.initial, z);
    double reg = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double d = theta[i] - theta0[i];
      reg += d * d;
    }
    const BaseParams diff = make_base_params(theta, bundle.base);
    Tensor prior_theta;
    if (bundle.prior) prior_theta = prior_params(*bundle.prior, z);
    double dt = 0.0;
    for (const auto& p : minibatch) {
      double f = eval_base(diff, p.x);
      if (bundle.prior)
        f += eval_base({prior_theta, bundle.prior->prior_arch}, p.x);
      double target = p.y;
      if (cfg.perturb_scale != 0.0) target += cfg.perturb_scale * dot(p.a, z);
      const double r = target - f;
      dt += r * r;
    }
    loss += w_data * dt + w_reg * reg;
  }
  return loss / indices.size();
}

TrainingSession::TrainingSession(ModelBundle* bundle, TrainConfig cfg)
    : bundle_(bundle), cfg_(cfg) {
  cfg_.validate();
  build();
}

void TrainingSession::build() {
  const auto blocks = param_blocks(bundle_->base);
  const int n = cfg_.batch_data;
  const int nz = cfg_.batch_index;
  const int nz_dim = index_dim(bundle_->hypermodel);
  const int n_theta = output_dim(bundle_->hypermodel);
  const bool softmax = std::holds_alternative<SparseSoftmaxHypermodel>(bundle_->hypermodel);
  const bool hypernet = std::holds_alternative<HypernetworkHypermodel>(bundle_->hypermodel);
  const bool mlp_base = std::holds_alternative<MlpArchitecture>(bundle_->base);

  x_node_ = g_.constant(Tensor(n, input_dim(bundle_->base)));

  // Parameter input nodes and their storage bindings.
  struct HmNodes {
    std::vector<NodeId> per_block_a, per_block_b;  // linear: offset, mixer; ensemble: particles
    std::vector<NodeId> trunk;                     // hypernetwork trunk layers
    std::vector<NodeId> head_w, head_b;            // hypernetwork output heads per block
    NodeId nu = -1;                                // sparse softmax
  } pn;

  std::visit([&](const auto& h) {
    using T = std::decay_t<decltype(h)>;
    if constexpr (std::is_same_v<T, EnsembleHypermodel>) {
      const int n_nu = h.particles.cols();
      for (const auto& b : blocks) {
        NodeId id = g_.input(Tensor(b.size(), n_nu));
        bindings_.push_back({id, Src::Particles, b.offset * n_nu, b.size(), n_nu, n_nu, false});
        pn.per_block_b.push_back(id);
      }
    } else if constexpr (std::is_same_v<T, LinearHypermodel>) {
      const bool masked = h.block_mask.has_value();
      for (const auto& b : blocks) {
        NodeId ida = g_.input(Tensor(b.size(), 1));
        bindings_.push_back({ida, Src::Offset, b.offset, b.size(), 1, 1, false});
        pn.per_block_a.push_back(ida);
        NodeId idb = g_.input(Tensor(b.size(), nz_dim));
        bindings_.push_back(
            {idb, Src::Mixer, b.offset * nz_dim, b.size(), nz_dim, nz_dim, masked});
        pn.per_block_b.push_back(idb);
      }
    } else if constexpr (std::is_same_v<T, HypernetworkHypermodel>) {
      const auto nb = h.net.blocks();
      const int n_layers = static_cast<int>(nb.size()) / 2;
      for (int l = 0; l + 1 < n_layers; ++l) {
        for (int k = 0; k < 2; ++k) {
          const auto& b = nb[2 * l + k];
          NodeId id = g_.input(Tensor(b.rows, b.cols));
          bindings_.push_back({id, Src::HypernetParams, b.offset, b.rows, b.cols, b.cols, false});
          pn.trunk.push_back(id);
        }
      }
      const auto& lw = nb[2 * n_layers - 2];
      const auto& lb = nb[2 * n_layers - 1];
      for (const auto& b : blocks) {
        NodeId idw = g_.input(Tensor(lw.rows, b.size()));
        bindings_.push_back(
            {idw, Src::HypernetParams, lw.offset + b.offset, lw.rows, b.size(), n_theta, false});
        pn.head_w.push_back(idw);
        NodeId idb = g_.input(Tensor(1, b.size()));
        bindings_.push_back(
            {idb, Src::HypernetParams, lb.offset + b.offset, 1, b.size(), b.size(), false});
        pn.head_b.push_back(idb);
      }
    } else {
      if (!std::holds_alternative<LinearArchitecture>(bundle_->base))
        throw ConfigError("sparse softmax hypermodel requires a linear base model");
      pn.nu = g_.input(Tensor(n_theta, 1));
      bindings_.push_back({pn.nu, Src::SoftmaxNu, 0, n_theta, 1, 1, false});
    }
  }, bundle_->hypermodel);

  z_draws_.assign(nz, Tensor());
  anchor_const_.assign(nz, {});

  NodeId acc = -1;
  for (int j = 0; j < nz; ++j) {
    // Hypermodel map: one output node per base-parameter block.
    std::vector<NodeId> raw;  // block outputs, natural orientation
    if (softmax) {
      NodeId w = g_.scale(pn.nu, Tensor(n_theta, 1));
      softmax_weight_.push_back(w);
      NodeId shift = g_.constant(Tensor(n_theta, 1));
      softmax_shift_.push_back(shift);
      NodeId e = g_.exp(g_.add(w, shift));
      NodeId s = g_.sum(e);
      raw.push_back(g_.divide(e, s));
    } else if (hypernet) {
      NodeId z = g_.constant(Tensor(1, nz_dim));
      z_nodes_.push_back(z);
      NodeId cur = z;
      for (std::size_t l = 0; l < pn.trunk.size(); l += 2)
        cur = g_.relu(g_.add(g_.matmul(cur, pn.trunk[l]), pn.trunk[l + 1]));
      for (std::size_t bi = 0; bi < blocks.size(); ++bi)
        raw.push_back(g_.add(g_.matmul(cur, pn.head_w[bi]), pn.head_b[bi]));
    } else {
      NodeId z = g_.constant(Tensor(nz_dim, 1));
      z_nodes_.push_back(z);
      for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        NodeId t = g_.matmul(pn.per_block_b[bi], z);
        if (!pn.per_block_a.empty()) t = g_.add(t, pn.per_block_a[bi]);
        raw.push_back(t);
      }
    }

    // Prediction of the differential base model over the minibatch.
    NodeId pred;
    if (!mlp_base) {
      NodeId th = raw[0];
      if (g_.value(th).cols() != 1) th = g_.reshape(th, n_theta, 1);
      pred = g_.matmul(x_node_, th);
    } else {
      NodeId cur = x_node_;
      for (std::size_t bi = 0; bi < blocks.size(); bi += 2) {
        const auto& wb = blocks[bi];
        const auto& bb = blocks[bi + 1];
        NodeId wn = raw[bi];
        if (g_.value(wn).rows() != wb.rows || g_.value(wn).cols() != wb.cols)
          wn = g_.reshape(wn, wb.rows, wb.cols);
        NodeId bn = raw[bi + 1];
        if (g_.value(bn).rows() != 1) bn = g_.reshape(bn, 1, bb.cols);
        cur = g_.add(g_.matmul(cur, wn), bn);
        if (bi + 2 < blocks.size()) cur = g_.relu(cur);
      }
      pred = cur;
    }

    NodeId rc = g_.constant(Tensor(n, 1));
    resid_const_.push_back(rc);
    NodeId resid = g_.add(g_.scale(pred, -1.0), rc);
    NodeId dt = g_.scale(g_.sum(g_.square(resid)), 1.0);
    data_scale_.push_back(dt);

    NodeId reg = -1;
    for (std::size_t bi = 0; bi < raw.size(); ++bi) {
      const Tensor& tv = g_.value(raw[bi]);
      NodeId anchor = g_.constant(Tensor(tv.rows(), tv.cols()));
      anchor_const_[j].push_back(anchor);
      NodeId r = g_.sum(g_.square(g_.add(raw[bi], anchor)));
      reg = reg < 0 ? r : g_.add(reg, r);
    }
    NodeId tot = g_.add(dt, g_.scale(reg, 1.0 / (2.0 * cfg_.prior_var)));
    acc = acc < 0 ? tot : g_.add(acc, tot);
  }
  loss_ = g_.scale(acc, 1.0 / nz);

  theta0_scratch_ = Tensor(n_theta, 1);
  if (bundle_->prior) {
    prior_eval_.emplace(bundle_->prior->prior_arch);
    prior_theta_scratch_ = Tensor(param_count(bundle_->prior->prior_arch), 1);
  }
}

double* TrainingSession::source_data(Src src) {
  return std::visit([&](auto& h) -> double* {
    using T = std::decay_t<decltype(h)>;
    if constexpr (std::is_same_v<T, EnsembleHypermodel>) {
      if (src == Src::Particles) return h.particles.data();
    } else if constexpr (std::is_same_v<T, LinearHypermodel>) {
      if (src == Src::Offset) return h.offset.data();
      if (src == Src::Mixer) return h.mixer.data();
    } else if constexpr (std::is_same_v<T, HypernetworkHypermodel>) {
      if (src == Src::HypernetParams) return h.params.data();
    } else {
      if (src == Src::SoftmaxNu) return h.nu.data();
    }
    throw ContractError("training: binding does not match hypermodel kind");
  }, bundle_->hypermodel);
}

const double* TrainingSession::mask_data() const {
  if (const auto* lin = std::get_if<LinearHypermodel>(&bundle_->hypermodel))
    if (lin->block_mask) return lin->block_mask->data();
  return nullptr;
}

void TrainingSession::push_params() {
  for (const auto& b : bindings_) {
    const double* src = source_data(b.src) + b.src_offset;
    double* dst = g_.value_data(b.node);
    for (int r = 0; r < b.rows; ++r)
      std::memcpy(dst + static_cast<std::size_t>(r) * b.cols,
                  src + static_cast<std::size_t>(r) * b.src_stride,
                  static_cast<std::size_t>(b.cols) * sizeof(double));
  }
}

void TrainingSession::apply_update(double scale) {
  const double* mask = mask_data();
  for (const auto& b : bindings_) {
    double* src = source_data(b.src) + b.src_offset;
    const Tensor& adj = g_.adjoint(b.node);
    const double* ap = adj.data();
    const double* m = (b.masked && mask) ? mask + b.src_offset : nullptr;
    for (int r = 0; r < b.rows; ++r) {
      double* srow = src + static_cast<std::size_t>(r) * b.src_stride;
      const double* arow = ap + static_cast<std::size_t>(r) * b.cols;
      if (m) {
        const double* mrow = m + static_cast<std::size_t>(r) * b.src_stride;
        for (int c = 0; c < b.cols; ++c)
          if (mrow[c] != 0.0) srow[c] -= scale * arow[c];
      } else {
        for (int c = 0; c < b.cols; ++c) srow[c] -= scale * arow[c];
      }
    }
  }
}

void TrainingSession::refresh_step_inputs(const AugmentedDataset& data, int total_n) {
  const int n = cfg_.batch_data;
  const int nz = cfg_.batch_index;
  const bool softmax = !softmax_weight_.empty();
  const int xd = data.x_dim();

  double* xdst = g_.value_data(x_node_);
  for (int i = 0; i < n; ++i)
    std::memcpy(xdst + static_cast<std::size_t>(i) * xd, data.x(batch_idx_[i]),
                static_cast<std::size_t>(xd) * sizeof(double));

  push_params();

  const double data_w = static_cast<double>(total_n) / (2.0 * cfg_.noise_var * n);
  const double st = cfg_.perturb_scale;
  for (int j = 0; j < nz; ++j) {
    const Tensor& z = z_draws_[j];
    if (softmax) {
      const auto& h = std::get<SparseSoftmaxHypermodel>(bundle_->hypermodel);
      double* w = g_.scale_weights_data(softmax_weight_[j]);
      double mx = -1e300;
      for (int i = 0; i < z.rows(); ++i) {
        w[i] = h.beta * (z[i] * z[i] + h.alpha_s);
        const double v = w[i] * h.nu[i];
        if (v > mx) mx = v;
      }
      double* sh = g_.value_data(softmax_shift_[j]);
      for (int i = 0; i < z.rows(); ++i) sh[i] = -mx;
    } else {
      std::memcpy(g_.value_data(z_nodes_[j]), z.data(), z.size() * sizeof(double));
    }

    map_index_into(bundle_->initial, z, theta0_scratch_);
    int off = 0;
    for (NodeId anchor : anchor_const_[j]) {
      double* ad = g_.value_data(anchor);
      const int len = static_cast<int>(g_.value(anchor).size());
      for (int i = 0; i < len; ++i) ad[i] = -theta0_scratch_[off + i];
      off += len;
    }

    if (prior_eval_) {
      Tensor& pt = prior_theta_scratch_;
      matmul_into(bundle_->prior->prior_mixer, z, pt);
      for (std::size_t i = 0; i < pt.size(); ++i) pt[i] *= bundle_->prior->prior_scale[i];
      prior_eval_->eval(pt.data(), g_.value(x_node_), prior_out_scratch_);
    }
    double* rc = g_.value_data(resid_const_[j]);
    for (int i = 0; i < n; ++i) {
      const int di = batch_idx_[i];
      double r = data.y(di);
      if (st != 0.0) {
        const double* ar = data.a(di);
        double acc = 0.0;
        for (int k = 0; k < z.rows(); ++k) {
          const double zk = z[k];
          if (zk != 0.0) acc += ar[k] * zk;
        }
        r += st * acc;
      }
      if (prior_eval_) r -= prior_out_scratch_[i];
      rc[i] = r;
    }
    g_.set_scale_factor(data_scale_[j], data_w);
  }
}

void TrainingSession::sgd_step(const AugmentedDataset& data, RngStream& rng) {
  const int total = data.size();
  if (total == 0) return;  // agent has no data yet
  // Minibatch sampled uniformly with replacement, then the index set.
  batch_idx_.resize(cfg_.batch_data);
  for (int& i : batch_idx_) i = rng.uniform_int(total);
  for (int j = 0; j < cfg_.batch_index; ++j) z_draws_[j] = bundle_->index_dist.sample(rng);
  refresh_step_inputs(data, total);
  g_.forward();
  g_.backward(loss_);
  apply_update(cfg_.step_size / total);
}

std::vector<double> TrainingSession::loss_gradient(const AugmentedDataset& data,
                                                   const std::vector<int>& minibatch,
                                                   const std::vector<Tensor>& indices,
                                                   int total_n) {
  if (static_cast<int>(minibatch.size()) != cfg_.batch_data ||
      static_cast<int>(indices.size()) != cfg_.batch_index)
    throw ContractError("loss_gradient: shapes must match the configured batch");
  batch_idx_ = minibatch;
  for (int j = 0; j < cfg_.batch_index; ++j) z_draws_[j] = indices[j];
  refresh_step_inputs(data, total_n);
  g_.forward();
  g_.backward(loss_);
  std::vector<double> grad;
  for (const auto& b : bindings_) {
    const Tensor& adj = g_.adjoint(b.node);
    grad.insert(grad.end(), adj.data(), adj.data() + adj.size());
  }
  return grad;
}

std::vector<double> TrainingSession::param_vector() {
  std::vector<double> out;
  for (const auto& b : bindings_) {
    const double* src = source_data(b.src) + b.src_offset;
    for (int r = 0; r < b.rows; ++r)
      out.insert(out.end(), src + static_cast<std::size_t>(r) * b.src_stride,
                 src + static_cast<std::size_t>(r) * b.src_stride + b.cols);
  }
  return out;
}

void TrainingSession::set_param_vector(const std::vector<double>& flat) {
  std::size_t pos = 0;
  for (const auto& b : bindings_) {
    double* src = source_data(b.src) + b.src_offset;
    for (int r = 0; r < b.rows; ++r)
      for (int c = 0; c < b.cols; ++c) src[static_cast<std::size_t>(r) * b.src_stride + c] = flat[pos++];
  }
  if (pos != flat.size()) throw ContractError("set_param_vector: length mismatch");
}

void TrainingSession::train_period(const AugmentedDataset& data, RngStream& rng) {
  for (int s = 0; s < cfg_.sgd_per_period; ++s) sgd_step(data, rng);
}

}  // namespace hypx
