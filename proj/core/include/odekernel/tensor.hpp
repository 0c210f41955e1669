#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "odekernel/errors.hpp"

namespace odekernel {

struct Shape {
  int rows = 0;
  int cols = 0;
  bool operator==(const Shape&) const = default;
};

/// Dense row-major matrix of doubles. A column vector is an n-by-1 tensor.
/// Values are immutable from the point of view of every free function below;
/// all of them return fresh tensors.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols);  // zero-filled
  Tensor(int rows, int cols, std::vector<double> data);

  static Tensor zeros(int rows, int cols) { return Tensor(rows, cols); }
  static Tensor ones(int rows, int cols);
  static Tensor filled(int rows, int cols, double value);
  static Tensor identity(int n);
  /// n-by-1 column vector.
  static Tensor column(std::vector<double> values);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);

  int rows() const { return shape_.rows; }
  int cols() const { return shape_.cols; }
  Shape shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * shape_.cols + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * shape_.cols + j]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  void fill(double value);
  bool all_finite() const;

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// ---- elementwise and product operations ----

/// Standard matrix product; requires a.cols == b.rows.
Tensor matmul(const Tensor& a, const Tensor& b);

/// Elementwise product; requires equal shapes.
Tensor hadamard(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor transpose(const Tensor& a);

/// Elementwise integer power, n >= 1, computed by repeated multiplication.
Tensor elementwise_power(const Tensor& a, int n);

/// Elementwise logistic function 1/(1+exp(-x)).
Tensor sigmoid(const Tensor& a);

double dot(const Tensor& a, const Tensor& b);  // flattened inner product
double norm_inf(const Tensor& a);
double norm2(const Tensor& a);
double sum(const Tensor& a);

// Allocation-free kernels writing into a preshaped destination. The free
// functions above are thin wrappers over these; the autodiff tape replays
// through the same kernels so taped and plain evaluation round identically.
void matmul_into(const Tensor& a, const Tensor& b, Tensor& dst);
void hadamard_into(const Tensor& a, const Tensor& b, Tensor& dst);
void add_into(const Tensor& a, const Tensor& b, Tensor& dst);
void scale_into(const Tensor& a, double factor, Tensor& dst);
void sigmoid_into(const Tensor& a, Tensor& dst);
void power_into(const Tensor& a, int n, Tensor& dst);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }
inline Tensor operator*(const Tensor& a, double s) { return scale(a, s); }

// ---- linear solves ----

/// Solves a x = b for square a by LU decomposition with partial pivoting.
/// b may carry multiple right-hand sides as columns.
Tensor solve(const Tensor& a, const Tensor& b);

/// Solves (k + lambda I) alpha = y for symmetric k. When the shifted matrix is
/// numerically singular the solve falls back to a pseudo-inverse built from a
/// truncated symmetric eigendecomposition: eigenvalues whose magnitude is
/// below 1e-12 times the largest magnitude are dropped.
Tensor solve_regularized(const Tensor& k, double lambda, const Tensor& y);

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
/// Returns eigenvalues in `values` (n-by-1) and eigenvectors as the columns
/// of `vectors`, so that a = vectors * diag(values) * vectors^T.
struct SymmetricEigen {
  Tensor values;
  Tensor vectors;
};
SymmetricEigen eigen_symmetric(const Tensor& a);

}  // namespace odekernel
