#include "odekernel/tensor.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>

namespace odekernel {

namespace {

std::string shape_str(const Tensor& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a) +
                         " vs " + shape_str(b));
  }
}

}  // namespace

Tensor::Tensor(int rows, int cols)
    : shape_{rows, cols},
      data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0) {
  if (rows < 0 || cols < 0) throw DimensionError("tensor: negative dimension");
}

Tensor::Tensor(int rows, int cols, std::vector<double> data)
    : shape_{rows, cols}, data_(std::move(data)) {
  if (rows < 0 || cols < 0) throw DimensionError("tensor: negative dimension");
  if (data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw DimensionError("tensor: data length does not match shape");
  }
}

Tensor Tensor::ones(int rows, int cols) { return filled(rows, cols, 1.0); }

Tensor Tensor::filled(int rows, int cols, double value) {
  Tensor t(rows, cols);
  t.fill(value);
  return t;
}

Tensor Tensor::identity(int n) {
  Tensor t(n, n);
  for (int i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

Tensor Tensor::column(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return Tensor(n, 1, std::move(values));
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r == 0 ? 0 : static_cast<int>(rows.begin()->size());
  Tensor t(r, c);
  int i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) {
      throw DimensionError("from_rows: ragged rows");
    }
    int j = 0;
    for (double v : row) t(i, j++) = v;
    ++i;
  }
  return t;
}

void Tensor::fill(double value) {
  for (double& v : data_) v = value;
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void matmul_into(const Tensor& a, const Tensor& b, Tensor& dst) {
  const int m = a.rows(), k = a.cols(), n = b.cols();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < k; ++l) acc += a(i, l) * b(l, j);
      dst(i, j) = acc;
    }
  }
}

void hadamard_into(const Tensor& a, const Tensor& b, Tensor& dst) {
  for (std::size_t i = 0; i < a.size(); ++i) dst[i] = a[i] * b[i];
}

void add_into(const Tensor& a, const Tensor& b, Tensor& dst) {
  for (std::size_t i = 0; i < a.size(); ++i) dst[i] = a[i] + b[i];
}

void scale_into(const Tensor& a, double factor, Tensor& dst) {
  for (std::size_t i = 0; i < a.size(); ++i) dst[i] = factor * a[i];
}

void sigmoid_into(const Tensor& a, Tensor& dst) {
  for (std::size_t i = 0; i < a.size(); ++i) dst[i] = 1.0 / (1.0 + std::exp(-a[i]));
}

void power_into(const Tensor& a, int n, Tensor& dst) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    double acc = a[i];
    for (int k = 1; k < n; ++k) acc *= a[i];
    dst[i] = acc;
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ (" + shape_str(a) +
                         " times " + shape_str(b) + ")");
  }
  Tensor c(a.rows(), b.cols());
  matmul_into(a, b, c);
  return c;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor c(a.rows(), a.cols());
  hadamard_into(a, b, c);
  return c;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor c(a.rows(), a.cols());
  add_into(a, b, c);
  return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

Tensor scale(const Tensor& a, double factor) {
  Tensor c(a.rows(), a.cols());
  scale_into(a, factor, c);
  return c;
}

Tensor transpose(const Tensor& a) {
  Tensor c(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(j, i) = a(i, j);
  return c;
}

Tensor elementwise_power(const Tensor& a, int n) {
  if (n < 1) throw InvalidInputError("elementwise_power: exponent must be >= 1");
  Tensor c(a.rows(), a.cols());
  power_into(a, n, c);
  return c;
}

Tensor sigmoid(const Tensor& a) {
  Tensor c(a.rows(), a.cols());
  sigmoid_into(a, c);
  return c;
}

double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm_inf(const Tensor& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double norm2(const Tensor& a) { return std::sqrt(dot(a, a)); }

double sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  return acc;
}

Tensor solve(const Tensor& a, const Tensor& b) {
  if (a.rows() != a.cols()) throw DimensionError("solve: matrix must be square");
  if (b.rows() != a.rows()) throw DimensionError("solve: rhs row count mismatch");
  const int n = a.rows(), m = b.cols();
  Tensor lu = a;
  Tensor x = b;
  std::vector<int> piv(n);
  for (int i = 0; i < n; ++i) piv[i] = i;

  for (int col = 0; col < n; ++col) {
    int p = col;
    double best = std::abs(lu(col, col));
    for (int i = col + 1; i < n; ++i) {
      const double v = std::abs(lu(i, col));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best == 0.0) throw NumericError("solve: singular matrix");
    if (p != col) {
      for (int j = 0; j < n; ++j) std::swap(lu(col, j), lu(p, j));
      for (int j = 0; j < m; ++j) std::swap(x(col, j), x(p, j));
    }
    for (int i = col + 1; i < n; ++i) {
      const double f = lu(i, col) / lu(col, col);
      lu(i, col) = f;
      for (int j = col + 1; j < n; ++j) lu(i, j) -= f * lu(col, j);
      for (int j = 0; j < m; ++j) x(i, j) -= f * x(col, j);
    }
  }
  for (int col = n - 1; col >= 0; --col) {
    for (int j = 0; j < m; ++j) x(col, j) /= lu(col, col);
    for (int i = 0; i < col; ++i) {
      for (int j = 0; j < m; ++j) x(i, j) -= lu(i, col) * x(col, j);
    }
  }
  return x;
}

SymmetricEigen eigen_symmetric(const Tensor& a) {
  if (a.rows() != a.cols()) throw DimensionError("eigen_symmetric: matrix must be square");
  const int n = a.rows();
  Tensor m = a;
  Tensor v = Tensor::identity(n);

  auto off_diag_sq = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += m(i, j) * m(i, j);
    return s;
  };

  double fro = 0.0;
  for (double x : m.data()) fro += x * x;
  const double tol = 1e-30 * (fro > 0 ? fro : 1.0);

  for (int sweep = 0; sweep < 64 && off_diag_sq() > tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < n; ++i) {
          const double mip = m(i, p), miq = m(i, q);
          m(i, p) = c * mip - s * miq;
          m(i, q) = s * mip + c * miq;
        }
        for (int j = 0; j < n; ++j) {
          const double mpj = m(p, j), mqj = m(q, j);
          m(p, j) = c * mpj - s * mqj;
          m(q, j) = s * mpj + c * mqj;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  Tensor values(n, 1);
  for (int i = 0; i < n; ++i) values[i] = m(i, i);
  return {values, v};
}

Tensor solve_regularized(const Tensor& k, double lambda, const Tensor& y) {
  if (k.rows() != k.cols()) {
    throw DimensionError("solve_regularized: kernel matrix must be square");
  }
  if (y.rows() != k.rows()) {
    throw DimensionError("solve_regularized: rhs row count mismatch");
  }
  if (!k.all_finite() || !y.all_finite() || !std::isfinite(lambda)) {
    throw InvalidInputError("solve_regularized: non-finite input");
  }

  const int n = k.rows();
  Tensor shifted = k;
  for (int i = 0; i < n; ++i) shifted(i, i) += lambda;

  const SymmetricEigen eig = eigen_symmetric(shifted);
  double max_abs = 0.0;
  for (int i = 0; i < n; ++i) max_abs = std::max(max_abs, std::abs(eig.values[i]));
  const double cutoff = 1e-12 * max_abs;

  // alpha = V diag(g) V^T y with g_i = 1/w_i for retained eigenvalues.
  Tensor vty = matmul(transpose(eig.vectors), y);
  for (int i = 0; i < n; ++i) {
    const double w = eig.values[i];
    const double g = std::abs(w) > cutoff ? 1.0 / w : 0.0;
    for (int j = 0; j < vty.cols(); ++j) vty(i, j) *= g;
  }
  return matmul(eig.vectors, vty);
}

}  // namespace odekernel
