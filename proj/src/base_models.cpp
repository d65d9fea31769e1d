#include "hypx/base_models.hpp"

namespace hypx {

std::vector<int> MlpArchitecture::layer_dims() const {
  std::vector<int> dims;
  dims.push_back(input_dim);
  for (int h : hidden) dims.push_back(h);
  dims.push_back(output_dim);
  return dims;
}

int MlpArchitecture::param_count() const {
  const auto dims = layer_dims();
  int n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += dims[l] * dims[l + 1] + dims[l + 1];
  return n;
}

std::vector<ParamBlock> MlpArchitecture::blocks() const {
  const auto dims = layer_dims();
  std::vector<ParamBlock> out;
  int off = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    out.push_back({off, dims[l], dims[l + 1], false});
    off += dims[l] * dims[l + 1];
    out.push_back({off, 1, dims[l + 1], true});
    off += dims[l + 1];
  }
  return out;
}

int param_count(const BaseArchitecture& arch) {
  return std::visit([](const auto& a) -> int {
    if constexpr (std::is_same_v<std::decay_t<decltype(a)>, LinearArchitecture>) return a.dim;
    else return a.param_count();
  }, arch);
}

int input_dim(const BaseArchitecture& arch) {
  return std::visit([](const auto& a) -> int {
    if constexpr (std::is_same_v<std::decay_t<decltype(a)>, LinearArchitecture>) return a.dim;
    else return a.input_dim;
  }, arch);
}

std::vector<ParamBlock> param_blocks(const BaseArchitecture& arch) {
  return std::visit([](const auto& a) -> std::vector<ParamBlock> {
    if constexpr (std::is_same_v<std::decay_t<decltype(a)>, LinearArchitecture>)
      return {{0, a.dim, 1, false}};
    else
      return a.blocks();
  }, arch);
}

BaseParams make_base_params(Tensor flat, BaseArchitecture arch) {
  if (static_cast<int>(flat.size()) != param_count(arch))
    throw DimensionError("base params: flat length does not match architecture");
  return {std::move(flat), std::move(arch)};
}

double eval_linear(const BaseParams& p, const Tensor& x) {
  if (x.size() != p.flat.size()) throw DimensionError("eval_linear: dimension mismatch");
  return dot(p.flat, x);
}

double eval_mlp(const BaseParams& p, const Tensor& x) {
  const auto* arch = std::get_if<MlpArchitecture>(&p.arch);
  if (!arch) throw ContractError("eval_mlp: params are not MLP params");
  if (static_cast<int>(x.size()) != arch->input_dim)
    throw DimensionError("eval_mlp: input dimension mismatch");
  const auto dims = arch->layer_dims();
  std::vector<double> cur(x.data(), x.data() + x.size());
  std::vector<double> nxt;
  const double* th = p.flat.data();
  int off = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l], out = dims[l + 1];
    nxt.assign(out, 0.0);
    for (int i = 0; i < in; ++i) {
      const double xi = cur[i];
      if (xi == 0.0) continue;
      const double* wrow = th + off + static_cast<std::size_t>(i) * out;
      for (int j = 0; j < out; ++j) nxt[j] += xi * wrow[j];
    }
    off += in * out;
    for (int j = 0; j < out; ++j) nxt[j] += th[off + j];
    off += out;
    const bool last = l + 2 == dims.size();
    if (!last)
      for (double& v : nxt)
        if (v < 0.0) v = 0.0;
    cur.swap(nxt);
  }
  return cur[0];
}

double eval_base(const BaseParams& p, const Tensor& x) {
  if (std::holds_alternative<LinearArchitecture>(p.arch)) return eval_linear(p, x);
  return eval_mlp(p, x);
}

BatchEvaluator::BatchEvaluator(BaseArchitecture arch) : arch_(std::move(arch)) {}

void BatchEvaluator::eval(const double* th, const Tensor& X, Tensor& out) {
  const int n = X.rows();
  if (X.cols() != input_dim(arch_)) throw DimensionError("BatchEvaluator: input dim mismatch");
  if (out.rows() != n || out.cols() != 1) out = Tensor(n, 1);
  if (const auto* lin = std::get_if<LinearArchitecture>(&arch_)) {
    const double* xp = X.data();
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      const double* row = xp + static_cast<std::size_t>(i) * lin->dim;
      for (int j = 0; j < lin->dim; ++j) acc += row[j] * th[j];
      out[i] = acc;
    }
    return;
  }
  const auto& mlp = std::get<MlpArchitecture>(arch_);
  const auto dims = mlp.layer_dims();
  const std::size_t n_layers = dims.size() - 1;
  if (acts_.size() != n_layers) acts_.assign(n_layers, Tensor());
  const Tensor* cur = &X;
  int off = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int in = dims[l], outw = dims[l + 1];
    Tensor& act = acts_[l];
    if (act.rows() != n || act.cols() != outw) act = Tensor(n, outw);
    const double* W = th + off;
    off += in * outw;
    const double* b = th + off;
    off += outw;
    const double* cp = cur->data();
    double* ap = act.data();
    const bool last = l + 1 == n_layers;
    for (int i = 0; i < n; ++i) {
      double* arow = ap + static_cast<std::size_t>(i) * outw;
      for (int j = 0; j < outw; ++j) arow[j] = b[j];
      const double* crow = cp + static_cast<std::size_t>(i) * in;
      for (int k = 0; k < in; ++k) {
        const double xv = crow[k];
        if (xv == 0.0) continue;
        const double* wrow = W + static_cast<std::size_t>(k) * outw;
        for (int j = 0; j < outw; ++j) arow[j] += xv * wrow[j];
      }
      if (!last)
        for (int j = 0; j < outw; ++j)
          if (arow[j] < 0.0) arow[j] = 0.0;
    }
    cur = &act;
  }
  const double* res = cur->data();
  for (int i = 0; i < n; ++i) out[i] = res[i];
}

AdditivePriorSpec make_additive_prior(Tensor prior_scale, Tensor prior_mixer,
                                      BaseArchitecture prior_arch) {
  const int n = param_count(prior_arch);
  if (static_cast<int>(prior_scale.size()) != n)
    throw DimensionError("additive prior: scale length mismatch");
  if (prior_mixer.rows() != n) throw DimensionError("additive prior: mixer rows mismatch");
  for (std::size_t i = 0; i < prior_scale.size(); ++i)
    if (prior_scale[i] <= 0.0) throw ConfigError("additive prior: scale must be strictly positive");
  return {std::move(prior_scale), std::move(prior_mixer), std::move(prior_arch)};
}

Tensor prior_params(const AdditivePriorSpec& spec, const Tensor& z) {
  if (static_cast<int>(z.size()) != spec.prior_mixer.cols())
    throw DimensionError("prior_params: index dimension mismatch");
  Tensor th = matmul(spec.prior_mixer, z);
  for (std::size_t i = 0; i < th.size(); ++i) th[i] *= spec.prior_scale[i];
  return th;
}

double eval_additive(const AdditivePriorSpec& spec, const Tensor& z,
                     const BaseParams& differential, const Tensor& x) {
  const BaseParams prior = make_base_params(prior_params(spec, z), spec.prior_arch);
  return eval_base(prior, x) + eval_base(differential, x);
}

Tensor nn_prior_scale(const MlpArchitecture& arch, const std::vector<double>& weight_stds,
                      double bias_std) {
  const auto blocks = arch.blocks();
  if (weight_stds.size() * 2 != blocks.size())
    throw ConfigError("nn_prior_scale: one weight std per layer required");
  Tensor d(arch.param_count(), 1);
  std::size_t layer = 0;
  for (const auto& b : blocks) {
    const double s = b.bias ? bias_std : weight_stds[layer];
    for (int i = 0; i < b.size(); ++i) d[b.offset + i] = s;
    if (b.bias) ++layer;
  }
  return d;
}

}  // namespace hypx
