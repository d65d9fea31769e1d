#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "hypx/errors.hpp"

namespace hypx {

// Dense row-major matrix of doubles. Vectors are n x 1.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw DimensionError("Tensor: negative dimension");
    data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  }

  static Tensor vector(int n) { return Tensor(n, 1); }
  static Tensor vector(std::initializer_list<double> vals) {
    Tensor t(static_cast<int>(vals.size()), 1);
    int i = 0;
    for (double v : vals) t.data_[i++] = v;
    return t;
  }
  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.data_[0] = v;
    return t;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  std::vector<int> shape() const { return {rows_, cols_}; }
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double v) { data_.assign(data_.size(), v); }
  void reshape(int rows, int cols) {
    if (static_cast<std::size_t>(rows) * cols != data_.size())
      throw DimensionError("Tensor::reshape: size mismatch");
    rows_ = rows;
    cols_ = cols;
  }

  bool operator==(const Tensor& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// out = a * b. Shapes must be (r x k) * (k x c); out is resized if needed.
void matmul_into(const Tensor& a, const Tensor& b, Tensor& out);
Tensor matmul(const Tensor& a, const Tensor& b);

double dot(const Tensor& a, const Tensor& b);
double norm2(const Tensor& a);

}  // namespace hypx
