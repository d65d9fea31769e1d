#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hypx/base_models.hpp"
#include "hypx/rng.hpp"
#include "hypx/tensor.hpp"

namespace hypx {

// Index distribution p_z.
struct ReferenceDistribution {
  enum class Kind { GaussianUnit, HypersphereUniform, OneHotUniform };
  Kind kind = Kind::GaussianUnit;
  int dim = 0;

  Tensor sample(RngStream& rng) const;
};

Tensor sample_index(const ReferenceDistribution& dist, RngStream& rng);

// g_nu(z) = nu z; column k holds the parameters of particle k.
struct EnsembleHypermodel {
  Tensor particles;  // N_theta x N_nu
};

// g_nu(z) = a + B z, with an optional 0/1 mask constraining B's support.
// Masked-out entries are exactly zero in storage at all times.
struct LinearHypermodel {
  Tensor offset;  // N_theta x 1
  Tensor mixer;   // N_theta x N_z
  std::optional<Tensor> block_mask;
};

// g_nu(z) = MLP(z) with N_z inputs and N_theta outputs.
struct HypernetworkHypermodel {
  MlpArchitecture net;
  Tensor params;  // flat, per MlpArchitecture packing
};

// (g_nu(z))_m = exp(beta nu_m (z_m^2 + alpha)) / sum_n exp(beta nu_n (z_n^2 + alpha))
struct SparseSoftmaxHypermodel {
  Tensor nu;  // N_theta x 1
  double alpha_s = 0.01;
  double beta = 10.0;
};

using Hypermodel =
    std::variant<EnsembleHypermodel, LinearHypermodel, HypernetworkHypermodel,
                 SparseSoftmaxHypermodel>;

int index_dim(const Hypermodel& hm);
int output_dim(const Hypermodel& hm);

Tensor map_index(const Hypermodel& hm, const Tensor& z);
// Allocation-free variant for hot loops; out is resized on first use.
void map_index_into(const Hypermodel& hm, const Tensor& z, Tensor& out);

// B with one unit-hypersphere row per output coordinate inside its block and
// zeros elsewhere. blocks = list of (rows, cols); empty blocks are errors.
Tensor make_block_diagonal_mixer(const std::vector<std::pair<int, int>>& blocks, RngStream& rng);
Tensor make_block_diagonal_mask(const std::vector<std::pair<int, int>>& blocks);
Tensor make_gaussian_mixer(int rows, int cols, RngStream& rng);

enum class InitScheme { Zeros, Gaussian, TruncatedGaussian, GlorotUniform };

EnsembleHypermodel make_ensemble(int n_theta, int n_particles, InitScheme scheme, double scale,
                                 RngStream& rng);
// Glorot initializes the mixer (fan_in = N_z, fan_out = N_theta) and zeros the
// offset; Gaussian schemes initialize both. A mask is applied after drawing.
LinearHypermodel make_linear_hypermodel(int n_theta, int n_z, InitScheme scheme, double scale,
                                        RngStream& rng, std::optional<Tensor> mask = {});
HypernetworkHypermodel make_hypernetwork(MlpArchitecture net, InitScheme scheme, double scale,
                                         RngStream& rng);
SparseSoftmaxHypermodel make_sparse_softmax(int n_theta, double alpha_s = 0.01, double beta = 10.0);

// Checkpointing; round trips are bit-exact (hex float text).
void save_hypermodel(const Hypermodel& hm, std::ostream& os);
Hypermodel load_hypermodel(std::istream& is);
void save_hypermodel_file(const Hypermodel& hm, const std::string& path);
Hypermodel load_hypermodel_file(const std::string& path);

}  // namespace hypx
