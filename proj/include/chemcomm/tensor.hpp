#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace chemcomm::num {

// Dense row-major tensor of 64-bit floats.  Everything in the workbench
// (weights, biases, activations, gate values) is carried by this type.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::initializer_list<std::size_t> dims, std::vector<double> values);

  static Tensor zeros(std::initializer_list<std::size_t> dims);
  static Tensor zeros(std::span<const std::size_t> dims);

  std::size_t numel() const { return data.size(); }
  std::size_t rows() const { return shape.at(0); }
  std::size_t cols() const { return shape.at(1); }

  double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

  void fill(double v);
  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool operator==(const Tensor& other) const = default;
};

bool all_finite(const Tensor& t);
bool all_finite(std::span<const double> v);

// out = W x  (W is MxN, x has N entries, out has M entries)
void matvec(const Tensor& W, std::span<const double> x, std::span<double> out);
// out += W x
void matvec_acc(const Tensor& W, std::span<const double> x, std::span<double> out);
// out += W^T y  (gradient push-back through a dense map)
void tmatvec_acc(const Tensor& W, std::span<const double> y, std::span<double> out);
// dW += y x^T
void outer_acc(std::span<const double> y, std::span<const double> x, Tensor& dW);

Tensor matmul(const Tensor& A, const Tensor& B);
Tensor transpose(const Tensor& A);

void add_scaled(Tensor& dst, const Tensor& src, double scale);  // dst += scale * src
void elementwise_mul(std::span<const double> a, std::span<const double> b, std::span<double> out);

}  // namespace chemcomm::num
