#pragma once

#include <variant>
#include <vector>

#include "hypx/tensor.hpp"

namespace hypx {

// One contiguous range of a flat parameter vector, shaped for use.
// MLP packing order per layer: weights (fan_in x fan_out, row-major), then
// biases (1 x fan_out). A linear model is a single (dim x 1) block.
struct ParamBlock {
  int offset = 0;
  int rows = 0;
  int cols = 0;
  bool bias = false;
  int size() const { return rows * cols; }
};

// ReLU MLP with a linear scalar output.
struct MlpArchitecture {
  int input_dim = 0;
  std::vector<int> hidden;
  int output_dim = 1;

  std::vector<int> layer_dims() const;
  int param_count() const;
  std::vector<ParamBlock> blocks() const;
};

// f_theta(x) = theta . x
struct LinearArchitecture {
  int dim = 0;
};

using BaseArchitecture = std::variant<LinearArchitecture, MlpArchitecture>;

int param_count(const BaseArchitecture& arch);
int input_dim(const BaseArchitecture& arch);
std::vector<ParamBlock> param_blocks(const BaseArchitecture& arch);

struct BaseParams {
  Tensor flat;  // length = param_count(arch)
  BaseArchitecture arch;
};

BaseParams make_base_params(Tensor flat, BaseArchitecture arch);

double eval_linear(const BaseParams& p, const Tensor& x);
double eval_mlp(const BaseParams& p, const Tensor& x);
double eval_base(const BaseParams& p, const Tensor& x);

// Batched forward over an action/input matrix X (n x input_dim) -> (n x 1).
// Owns its hidden-layer workspace so repeated calls do not allocate.
class BatchEvaluator {
 public:
  explicit BatchEvaluator(BaseArchitecture arch);
  void eval(const double* flat_params, const Tensor& X, Tensor& out);
  const BaseArchitecture& arch() const { return arch_; }

 private:
  BaseArchitecture arch_;
  std::vector<Tensor> acts_;
};

// Additive decomposition f = f~_{DBz} + f^_{theta^} (prior + differential).
// D and B are fixed at construction and never trained.
struct AdditivePriorSpec {
  Tensor prior_scale;  // diagonal of D, strictly positive, length N_theta~
  Tensor prior_mixer;  // B, N_theta~ x N_z
  BaseArchitecture prior_arch;
};

AdditivePriorSpec make_additive_prior(Tensor prior_scale, Tensor prior_mixer,
                                      BaseArchitecture prior_arch);

// theta~ = D * (B z)
Tensor prior_params(const AdditivePriorSpec& spec, const Tensor& z);

double eval_additive(const AdditivePriorSpec& spec, const Tensor& z,
                     const BaseParams& differential, const Tensor& x);

// Diagonal of D for an MLP prior: per-layer weight stds, common bias std.
Tensor nn_prior_scale(const MlpArchitecture& arch, const std::vector<double>& weight_stds,
                      double bias_std);

}  // namespace hypx
