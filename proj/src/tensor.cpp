#include "hypx/tensor.hpp"

#include <cmath>

namespace hypx {

void matmul_into(const Tensor& a, const Tensor& b, Tensor& out) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
  if (out.rows() != a.rows() || out.cols() != b.cols()) out = Tensor(a.rows(), b.cols());
  const int r = a.rows(), k = a.cols(), c = b.cols();
  const double* ap = a.data();
  const double* bp = b.data();
  double* op = out.data();
  if (c == 1) {
    // matrix * vector; skip exact zeros of the vector (one-hot indices are common)
    for (int i = 0; i < r; ++i) {
      double acc = 0.0;
      const double* arow = ap + static_cast<std::size_t>(i) * k;
      for (int j = 0; j < k; ++j) {
        const double bj = bp[j];
        if (bj != 0.0) acc += arow[j] * bj;
      }
      op[i] = acc;
    }
    return;
  }
  for (int i = 0; i < r; ++i) {
    double* orow = op + static_cast<std::size_t>(i) * c;
    for (int j = 0; j < c; ++j) orow[j] = 0.0;
    const double* arow = ap + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < k; ++j) {
      const double av = arow[j];
      if (av == 0.0) continue;
      const double* brow = bp + static_cast<std::size_t>(j) * c;
      for (int l = 0; l < c; ++l) orow[l] += av * brow[l];
    }
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tensor out;
  matmul_into(a, b, out);
  return out;
}

double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw DimensionError("dot: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(const Tensor& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * a[i];
  return std::sqrt(acc);
}

}  // namespace hypx
