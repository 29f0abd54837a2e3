#include "cpf/tensor.h"

#include <cmath>
#include <numeric>
#include <sstream>

#include "cpf/error.h"

namespace cpf {

namespace {

size_t shape_product(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw DimensionError("tensor shape has non-positive dimension");
    n *= static_cast<size_t>(d);
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(shape_product(shape_), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<real_t> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_product(shape_) != data_.size()) {
    throw DimensionError("tensor value count " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str());
  }
}

Tensor Tensor::scalar(real_t v) { return Tensor({1}, {v}); }

Tensor Tensor::zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(std::vector<int> shape, real_t v) {
  Tensor t(std::move(shape));
  t.fill(v);
  return t;
}

Tensor Tensor::vector(std::vector<real_t> values) {
  const int n = static_cast<int>(values.size());
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(int rows, int cols, std::vector<real_t> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::span<real_t> Tensor::row(int r) {
  const int c = cols();
  return {data_.data() + static_cast<size_t>(r) * c, static_cast<size_t>(c)};
}

std::span<const real_t> Tensor::row(int r) const {
  const int c = cols();
  return {data_.data() + static_cast<size_t>(r) * c, static_cast<size_t>(c)};
}

real_t Tensor::scalar_value() const {
  if (!is_scalar()) {
    throw DimensionError("expected scalar tensor, got shape " + shape_str());
  }
  return data_[0];
}

void Tensor::fill(real_t v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  for (real_t v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

real_t Tensor::squared_norm() const {
  real_t s = 0.0;
  for (real_t v : data_) s += v * v;
  return s;
}

real_t Tensor::norm() const { return std::sqrt(squared_norm()); }

std::string Tensor::shape_str() const {
  std::ostringstream out;
  out << "[";
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) out << "x";
    out << shape_[i];
  }
  out << "]";
  return out.str();
}

void add_in_place(Tensor& y, const Tensor& x) {
  if (!y.same_shape(x)) {
    throw DimensionError("add_in_place shape mismatch " + y.shape_str() + " vs " + x.shape_str());
  }
  real_t* yd = y.data();
  const real_t* xd = x.data();
  for (int i = 0; i < y.size(); ++i) yd[i] += xd[i];
}

void axpy(Tensor& y, real_t a, const Tensor& x) {
  if (!y.same_shape(x)) {
    throw DimensionError("axpy shape mismatch " + y.shape_str() + " vs " + x.shape_str());
  }
  real_t* yd = y.data();
  const real_t* xd = x.data();
  for (int i = 0; i < y.size(); ++i) yd[i] += a * xd[i];
}

}  // namespace cpf
