#pragma once

#include <optional>
#include <vector>

#include "hypx/base_models.hpp"
#include "hypx/graph.hpp"
#include "hypx/hypermodels.hpp"
#include "hypx/rng.hpp"

namespace hypx {

struct AugmentedDataPoint {
  Tensor x;
  double y = 0.0;
  Tensor a;  // perturbation vector, fixed at insertion time
};

// Contiguous storage for (x, y, a) triples.
class AugmentedDataset {
 public:
  AugmentedDataset(int x_dim, int a_dim) : x_dim_(x_dim), a_dim_(a_dim) {}

  void append(const Tensor& x, double y, const Tensor& a);
  int size() const { return static_cast<int>(ys_.size()); }
  int x_dim() const { return x_dim_; }
  int a_dim() const { return a_dim_; }
  const double* x(int i) const { return xs_.data() + static_cast<std::size_t>(i) * x_dim_; }
  const double* a(int i) const { return as_.data() + static_cast<std::size_t>(i) * a_dim_; }
  double y(int i) const { return ys_[i]; }
  AugmentedDataPoint point(int i) const;

 private:
  int x_dim_, a_dim_;
  std::vector<double> xs_, as_;
  std::vector<double> ys_;
};

struct TrainConfig {
  double step_size = 0.1;      // alpha, constant across iterations
  double noise_var = 1.0;      // sigma_w^2
  double prior_var = 1.0;      // sigma_p^2
  double perturb_scale = 0.0;  // sigma~_w; 0 turns the perturbation term off
  int batch_data = 32;         // n_data
  int batch_index = 16;        // n_z
  int sgd_per_period = 1;      // n_sgd

  void validate() const;
};

// A trainable hypermodel together with the differential base architecture it
// parameterizes, the optional fixed additive prior, and the frozen initial
// hypermodel used as the regularization anchor. For per-arm block structure
// (diagonal linear hypermodels) the block width is recorded so perturbation
// vectors can be embedded in the acting arm's block.
struct ModelBundle {
  Hypermodel hypermodel;
  Hypermodel initial;
  BaseArchitecture base;
  std::optional<AdditivePriorSpec> prior;
  ReferenceDistribution index_dist;
  int per_arm_block_width = 0;  // 0 = no per-arm structure
};

ModelBundle make_bundle(Hypermodel hm, BaseArchitecture base,
                        std::optional<AdditivePriorSpec> prior, ReferenceDistribution dist,
                        int per_arm_block_width = 0);

// Full model value f_{g_nu(z)}(x) = prior(z, x) + differential(map(z), x).
double bundle_value(const ModelBundle& b, const Tensor& z, const Tensor& x);

// Perturbation vector for a new data point. Gaussian p_z gets a unit
// hypersphere draw (embedded in the acting block when block_width > 0);
// hypersphere and one-hot p_z get a standard Gaussian draw.
Tensor make_perturbation(const ReferenceDistribution& dist, RngStream& rng,
                         int block_offset = -1, int block_width = 0);

// Approximate loss L~ evaluated directly (no graph); the independent route
// used to cross-check sgd_step gradients.
double approx_loss(const ModelBundle& bundle, const std::vector<AugmentedDataPoint>& minibatch,
                   const std::vector<Tensor>& indices, const TrainConfig& cfg, int total_n);

// Perturbed SGD on the bundle's hypermodel. Builds one static computation
// graph per (hypermodel kind, base architecture, batch shape) and reuses it
// every step; only input values are refreshed.
class TrainingSession {
 public:
  TrainingSession(ModelBundle* bundle, TrainConfig cfg);

  // One SGD step: sample minibatch and index set, update parameters in place.
  // Empty dataset is a no-op.
  void sgd_step(const AugmentedDataset& data, RngStream& rng);
  void train_period(const AugmentedDataset& data, RngStream& rng);

  const TrainConfig& config() const { return cfg_; }

  // Gradient of L~ at the current parameters for a fixed minibatch and index
  // set, flattened in binding order; minibatch/index sizes must match the
  // configured batch shape. Used by the finite-difference suites.
  std::vector<double> loss_gradient(const AugmentedDataset& data,
                                    const std::vector<int>& minibatch,
                                    const std::vector<Tensor>& indices, int total_n);
  std::vector<double> param_vector();
  void set_param_vector(const std::vector<double>& flat);

 private:
  enum class Src { Particles, Offset, Mixer, HypernetParams, SoftmaxNu };
  struct ParamBinding {
    NodeId node = -1;
    Src src;
    int src_offset = 0;   // element offset into the source buffer
    int rows = 0, cols = 0;
    int src_stride = 0;   // row stride in the source buffer
    bool masked = false;  // mixer entries outside the block mask stay zero
  };

  void build();
  double* source_data(Src src);
  const double* mask_data() const;
  void push_params();
  void refresh_step_inputs(const AugmentedDataset& data, int total_n);
  void apply_update(double scale);

  ModelBundle* bundle_;
  TrainConfig cfg_;
  ComputationGraph g_;

  std::vector<ParamBinding> bindings_;
  NodeId x_node_ = -1;
  NodeId loss_ = -1;
  std::vector<NodeId> z_nodes_;            // per index sample (unused for softmax)
  std::vector<NodeId> softmax_weight_;     // weighted-scale node per index sample
  std::vector<NodeId> softmax_shift_;      // max-subtraction constant per index sample
  std::vector<NodeId> resid_const_;        // per index sample
  std::vector<NodeId> data_scale_;         // per index sample
  std::vector<std::vector<NodeId>> anchor_const_;  // per index sample, per block

  std::vector<Tensor> z_draws_;
  std::vector<int> batch_idx_;
  Tensor theta0_scratch_, prior_theta_scratch_, prior_out_scratch_;
  std::optional<BatchEvaluator> prior_eval_;
};

}  // namespace hypx
