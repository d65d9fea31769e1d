#pragma once

#include <cstdint>
#include <string>

#include "hypx/harness.hpp"

namespace hypx {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Graph gradients of random hypermodel/base compositions vs central finite
// differences of the directly evaluated loss. Instances whose ReLU
// preactivations come within 1e-6 of a kink are redrawn.
CheckResult check_gradients(int n_instances = 100, std::uint64_t seed = 2024);

// Perturbed-SGD posterior recovery on 5 independent Gaussian arms against the
// conjugate closed form (the acceptance-1 procedure).
CheckResult check_posterior(std::uint64_t seed = 11);

// IDS pair-enumeration optimizer vs grid/sampling oracles on random instances.
CheckResult check_ids(int n_instances = 1000, std::uint64_t seed = 5);

// Bisection action-set structure counts.
CheckResult check_bisection();

// Remaining structural checks used by the acceptance suite.
CheckResult check_simplex(int n_samples = 10000, std::uint64_t seed = 8);
CheckResult check_block_mask(int n_steps = 1000, std::uint64_t seed = 9);
CheckResult check_csv_determinism(std::uint64_t seed = 10);

CheckResult run_check_suite(const std::string& suite);

}  // namespace hypx
