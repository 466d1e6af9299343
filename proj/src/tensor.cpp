#include "chemcomm/tensor.hpp"

#include <cmath>

namespace chemcomm::num {

namespace {

std::size_t product(std::span<const std::size_t> dims) {
  std::size_t n = 1;
  for (auto d : dims) {
    if (d == 0) throw std::invalid_argument("Tensor: zero dimension");
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::initializer_list<std::size_t> dims, std::vector<double> values)
    : shape(dims), data(std::move(values)) {
  if (product(shape) != data.size())
    throw std::invalid_argument("Tensor: shape does not match value count");
}

Tensor Tensor::zeros(std::initializer_list<std::size_t> dims) {
  return zeros(std::span<const std::size_t>(dims.begin(), dims.size()));
}

Tensor Tensor::zeros(std::span<const std::size_t> dims) {
  Tensor t;
  t.shape.assign(dims.begin(), dims.end());
  t.data.assign(product(dims), 0.0);
  return t;
}

void Tensor::fill(double v) {
  for (auto& x : data) x = v;
}

bool all_finite(const Tensor& t) { return all_finite(std::span<const double>(t.data)); }

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void matvec(const Tensor& W, std::span<const double> x, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  matvec_acc(W, x, out);
}

void matvec_acc(const Tensor& W, std::span<const double> x, std::span<double> out) {
  const std::size_t m = W.rows(), n = W.cols();
  if (x.size() != n || out.size() != m) throw std::invalid_argument("matvec: shape mismatch");
  const double* w = W.data.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = w + i * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    out[i] += acc;
  }
}

void tmatvec_acc(const Tensor& W, std::span<const double> y, std::span<double> out) {
  const std::size_t m = W.rows(), n = W.cols();
  if (y.size() != m || out.size() != n) throw std::invalid_argument("tmatvec: shape mismatch");
  const double* w = W.data.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double yi = y[i];
    const double* row = w + i * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += yi * row[j];
  }
}

void outer_acc(std::span<const double> y, std::span<const double> x, Tensor& dW) {
  const std::size_t m = dW.rows(), n = dW.cols();
  if (y.size() != m || x.size() != n) throw std::invalid_argument("outer_acc: shape mismatch");
  double* w = dW.data.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double yi = y[i];
    double* row = w + i * n;
    for (std::size_t j = 0; j < n; ++j) row[j] += yi * x[j];
  }
}

Tensor matmul(const Tensor& A, const Tensor& B) {
  if (A.shape.size() != 2 || B.shape.size() != 2 || A.cols() != B.rows())
    throw std::invalid_argument("matmul: shape mismatch");
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor C = Tensor::zeros({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double a = A.at(i, p);
      for (std::size_t j = 0; j < n; ++j) C.at(i, j) += a * B.at(p, j);
    }
  return C;
}

Tensor transpose(const Tensor& A) {
  if (A.shape.size() != 2) throw std::invalid_argument("transpose: 2-D only");
  Tensor T = Tensor::zeros({A.cols(), A.rows()});
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) T.at(j, i) = A.at(i, j);
  return T;
}

void add_scaled(Tensor& dst, const Tensor& src, double scale) {
  if (!dst.same_shape(src)) throw std::invalid_argument("add_scaled: shape mismatch");
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += scale * src.data[i];
}

void elementwise_mul(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  if (a.size() != b.size() || a.size() != out.size())
    throw std::invalid_argument("elementwise_mul: size mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
}

}  // namespace chemcomm::num
